//! Pure states on qudit registers and their bipartite entanglement.

use rand::Rng;

use crate::error::{Error, Result};
use crate::random::haar_vector;
use crate::tensor::{
    c64, hermitian_eigenvalues, permuted_index_map, product, singular_values, Bipartition, CMatrix,
    CVector, MultipartiteOperator, EXACT_TOL, FACTOR_TOL,
};

/// Largest-weight threshold above which a spectrum counts as a product state.
pub const PURE_TOL: f64 = 1e-12;

/// A normalized state vector tagged with its subsystem dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
    dims: Vec<usize>,
}

impl PureState {
    pub fn new(amplitudes: CVector, dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidDims(format!("state dims {dims:?}")));
        }
        if amplitudes.len() != product(&dims) {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for dims {dims:?}",
                amplitudes.len()
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > EXACT_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes, dims })
    }

    /// Normalizes `amplitudes` before construction.
    pub fn normalized(amplitudes: CVector, dims: Vec<usize>) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NotNormalized(norm));
        }
        Self::new(amplitudes / c64(norm, 0.0), dims)
    }

    pub fn basis(dims: &[usize], index: usize) -> Result<Self> {
        let total = product(dims);
        if index >= total {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for dimension {total}"
            )));
        }
        let v = CVector::from_fn(total, |i, _| c64(if i == index { 1.0 } else { 0.0 }, 0.0));
        Self::new(v, dims.to_vec())
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_systems(&self) -> usize {
        self.dims.len()
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self {
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
            dims,
        }
    }

    /// Applies an operator living on the same register.
    pub fn evolve(&self, op: &MultipartiteOperator) -> Result<Self> {
        if op.dims() != self.dims.as_slice() {
            return Err(Error::DimensionMismatch(format!(
                "operator on {:?} applied to state on {:?}",
                op.dims(),
                self.dims
            )));
        }
        Self::normalized(op.apply(&self.amplitudes)?, self.dims.clone())
    }

    /// Amplitudes arranged as a `d_left x d_right` matrix across the cut.
    pub fn coefficient_matrix(&self, split: &Bipartition) -> Result<CMatrix> {
        if split.num_systems() != self.num_systems() {
            return Err(Error::InvalidBipartition(format!(
                "bipartition of {} systems applied to a {}-system state",
                split.num_systems(),
                self.num_systems()
            )));
        }
        let (dl, dr) = split.side_dims(&self.dims);
        let amps = &self.amplitudes;
        if split.is_prefix() {
            return Ok(CMatrix::from_fn(dl, dr, |a, b| amps[a * dr + b]));
        }
        let map = permuted_index_map(&self.dims, &split.to_front_permutation());
        Ok(CMatrix::from_fn(dl, dr, |a, b| amps[map[a * dr + b]]))
    }
}

pub fn haar_random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<PureState> {
    haar_random_state_on(&[dim], rng)
}

/// Haar-random state on the full register `dims` (not a product state).
pub fn haar_random_state_on<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<PureState> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidDims(format!("state dims {dims:?}")));
    }
    PureState::normalized(haar_vector(product(dims), rng), dims.to_vec())
}

/// `(|00> + |11> + ... + |d-1 d-1>) / sqrt(d)`.
pub fn maximally_entangled_pair(d: usize) -> Result<PureState> {
    if d < 2 {
        return Err(Error::InvalidDims(format!("pair dimension {d} < 2")));
    }
    let amp = 1.0 / (d as f64).sqrt();
    let v = CVector::from_fn(d * d, |i, _| {
        c64(if i / d == i % d { amp } else { 0.0 }, 0.0)
    });
    PureState::normalized(v, vec![d, d])
}

pub fn reduced_density(psi: &PureState, keep: &[usize]) -> Result<MultipartiteOperator> {
    let n = psi.num_systems();
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.is_empty() || sorted.len() != keep.len() || sorted.iter().any(|&p| p >= n) {
        return Err(Error::InvalidPositions(format!(
            "cannot keep {keep:?} of a {n}-system state"
        )));
    }
    let kept_dims: Vec<usize> = sorted.iter().map(|&p| psi.dims[p]).collect();
    let m = if sorted.len() == n {
        CMatrix::from_column_slice(psi.amplitudes.len(), 1, psi.amplitudes.as_slice())
    } else {
        psi.coefficient_matrix(&Bipartition::new(n, &sorted)?)?
    };
    MultipartiteOperator::new(&m * m.adjoint(), kept_dims)
}

/// Squared Schmidt coefficients of a bipartite pure state, descending.
#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtSpectrum {
    lambdas: Vec<f64>,
}

impl SchmidtSpectrum {
    /// Builds a spectrum from probability weights. Entries within `1e-10`
    /// outside `[0, 1]` are clipped; larger excursions are rejected.
    pub fn from_weights(mut weights: Vec<f64>) -> Result<Self> {
        for w in weights.iter_mut() {
            if !w.is_finite() || *w < -FACTOR_TOL || *w > 1.0 + FACTOR_TOL {
                return Err(Error::InvalidDensity(format!("weight {w} outside [0, 1]")));
            }
            *w = w.clamp(0.0, 1.0);
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > FACTOR_TOL {
            return Err(Error::InvalidDensity(format!("weights sum to {sum}")));
        }
        weights.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { lambdas: weights })
    }

    /// Spectrum of the state whose coefficient matrix is `m`.
    pub(crate) fn from_coefficients(m: &CMatrix) -> Result<Self> {
        let sv = singular_values(m)?;
        Self::from_weights(sv.into_iter().map(|s| s * s).collect())
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Number of weights above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.lambdas.iter().filter(|&&l| l > tol).count()
    }

    pub fn is_pure(&self) -> bool {
        self.lambdas.first().is_some_and(|&l| l >= 1.0 - PURE_TOL)
    }

    /// `1 - sum lambda^2`.
    pub fn linear_entropy(&self) -> f64 {
        if self.is_pure() {
            return 0.0;
        }
        (1.0 - self.lambdas.iter().map(|l| l * l).sum::<f64>()).max(0.0)
    }

    /// `-sum lambda ln lambda` in nats, with `0 ln 0 = 0`.
    pub fn von_neumann_entropy(&self) -> f64 {
        if self.is_pure() {
            return 0.0;
        }
        self.lambdas
            .iter()
            .filter(|&&l| l > 0.0)
            .map(|&l| -l * l.ln())
            .sum::<f64>()
            .max(0.0)
    }
}

pub fn schmidt_spectrum(psi: &PureState, split: &Bipartition) -> Result<SchmidtSpectrum> {
    SchmidtSpectrum::from_coefficients(&psi.coefficient_matrix(split)?)
}

fn density_spectrum(rho: &MultipartiteOperator) -> Result<SchmidtSpectrum> {
    let eig = hermitian_eigenvalues(rho.matrix())?;
    SchmidtSpectrum::from_weights(eig)
}

pub fn von_neumann_entropy(rho: &MultipartiteOperator) -> Result<f64> {
    Ok(density_spectrum(rho)?.von_neumann_entropy())
}

pub fn linear_entropy(rho: &MultipartiteOperator) -> Result<f64> {
    Ok(density_spectrum(rho)?.linear_entropy())
}
