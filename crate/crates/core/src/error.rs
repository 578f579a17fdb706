use thiserror::Error;

/// Errors raised by the operator, state and entangling-power routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid subsystem dimensions: {0}")]
    InvalidDims(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid subsystem positions: {0}")]
    InvalidPositions(String),

    #[error("invalid bipartition: {0}")]
    InvalidBipartition(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("operator is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("not a density matrix: {0}")]
    InvalidDensity(String),

    #[error("value {0} outside the domain [0, 1)")]
    Domain(f64),

    #[error("dimension {d} exceeds the configured cap {cap} for this route")]
    CapExceeded { d: usize, cap: usize },

    #[error("unsupported gate: {0}")]
    UnsupportedGate(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
