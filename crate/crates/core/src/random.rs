//! Seeded random streams and Haar-distributed samples.

use nalgebra::QR;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::tensor::{c64, CMatrix, CVector, MultipartiteOperator, C64};

/// The generator used for every stochastic routine in the crate.
pub type SampleRng = ChaCha8Rng;

/// Stream `index` of the generator family keyed by `seed`.
///
/// Sample `i` of a Monte Carlo run always draws from `stream(seed, i)`, so the
/// result does not depend on how samples are scheduled across workers.
pub fn stream(seed: u64, index: u64) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn seeded(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian with `E|z|^2 = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-random unit vector in `C^dim`.
pub fn haar_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    loop {
        let v = CVector::from_fn(dim, |_, _| complex_gaussian(rng));
        let norm = v.norm();
        if norm > 1e-150 {
            return v / c64(norm, 0.0);
        }
    }
}

/// Complex Ginibre matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng))
}

/// Haar-random unitary matrix: QR of a Ginibre matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let qr = QR::new(ginibre(dim, rng));
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let rjj = r[(j, j)];
        let n = rjj.norm();
        let phase = if n > 0.0 {
            rjj / c64(n, 0.0)
        } else {
            c64(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-random unitary on a register with the given dims.
pub fn haar_unitary<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<MultipartiteOperator> {
    let total = dims.iter().product();
    MultipartiteOperator::new(haar_unitary_matrix(total, rng), dims.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let a: u64 = stream(7, 3).random();
        let b: u64 = stream(7, 3).random();
        let c: u64 = stream(7, 4).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = seeded(11);
        for dim in [2, 3, 4, 9] {
            let u = haar_unitary(&[dim], &mut rng).unwrap();
            assert!(u.unitarity_defect() < 1e-12, "dim {dim}");
        }
    }

    #[test]
    fn haar_vector_is_normalized() {
        let mut rng = seeded(5);
        for dim in 1..8 {
            assert!((haar_vector(dim, &mut rng).norm() - 1.0).abs() < 1e-12);
        }
    }
}
