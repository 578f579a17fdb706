//! Entanglement capabilities of two-qudit gates.
//!
//! The crate computes operator Schmidt coefficients, operator entanglement and
//! the unassisted and ancilla-assisted entangling powers of unitaries on
//! `d x d` systems. Linear-entropy powers are available through two exact
//! routes (a Haar-average trace formula evaluated by tensor contraction, and
//! a decomposition into operator entanglements) and a Monte Carlo estimator;
//! von Neumann powers are Monte Carlo only, bracketed by `-ln(1 - e_p)` from
//! below and by a witnessed maximal-entanglement search from above.
//!
//! Registers order their systems most-significant first. For the assisted
//! quantities the register is `(A', A, B, B')` with the gate on `(A, B)` and
//! the entanglement cut between `(A', A)` and `(B, B')`.

pub mod contraction;
pub mod error;
pub mod exec;
pub mod gates;
pub mod opent;
pub mod power;
pub mod random;
pub mod state;
pub mod tensor;

pub use error::{Error, Result};
pub use exec::Execution;
pub use tensor::{Bipartition, CMatrix, CVector, MultipartiteOperator, C64};
