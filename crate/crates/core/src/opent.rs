//! Operator Schmidt decomposition and operator entanglement.
//!
//! A unitary `U` on `H_L (x) H_R` is treated as the normalized vector
//! `U / sqrt(dL dR)` in the space of operators; its entanglement across the
//! cut is the state entanglement of that vector, computed from the singular
//! values of the reshuffled matrix.

use std::f64::consts::TAU;

use crate::contraction::{doubled_trace, swap_copies};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::state::SchmidtSpectrum;
use crate::tensor::{
    hermitian_eigenvalues, permute_systems, reshuffle, singular_values, Bipartition, CMatrix,
    MultipartiteOperator, C64, FACTOR_TOL,
};

/// Operator Schmidt coefficients `s_n` across a cut, descending.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSchmidt {
    coefficients: Vec<f64>,
    d_left: usize,
    d_right: usize,
}

impl OperatorSchmidt {
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn d_left(&self) -> usize {
        self.d_left
    }

    pub fn d_right(&self) -> usize {
        self.d_right
    }

    /// Number of coefficients above `tol`.
    pub fn schmidt_number(&self, tol: f64) -> usize {
        self.coefficients.iter().filter(|&&s| s > tol).count()
    }

    /// `lambda_n = s_n^2 / (dL dR)`; sums to one for unitaries.
    pub fn normalized_spectrum(&self) -> Result<SchmidtSpectrum> {
        let norm = (self.d_left * self.d_right) as f64;
        SchmidtSpectrum::from_weights(self.coefficients.iter().map(|s| s * s / norm).collect())
    }
}

fn to_front(op: &MultipartiteOperator, split: &Bipartition) -> Result<MultipartiteOperator> {
    if split.num_systems() != op.num_systems() {
        return Err(Error::InvalidBipartition(format!(
            "bipartition of {} systems applied to a {}-system operator",
            split.num_systems(),
            op.num_systems()
        )));
    }
    if split.is_prefix() {
        Ok(op.clone())
    } else {
        permute_systems(op, &split.to_front_permutation())
    }
}

pub fn operator_schmidt(op: &MultipartiteOperator, split: &Bipartition) -> Result<OperatorSchmidt> {
    let front = to_front(op, split)?;
    let (d_left, d_right) = split.side_dims(op.dims());
    let r = reshuffle(&front, split.left().len())?;
    let mut coefficients = singular_values(&r)?;
    coefficients.truncate((d_left * d_left).min(d_right * d_right));
    Ok(OperatorSchmidt {
        coefficients,
        d_left,
        d_right,
    })
}

/// The cut between the two qudits of a two-qudit gate.
pub fn two_qudit_cut() -> Bipartition {
    Bipartition::contiguous(2, 1).expect("two systems")
}

/// The `(A' A) | (B B')` cut of the assisted register.
pub fn assisted_cut() -> Bipartition {
    Bipartition::contiguous(4, 2).expect("four systems")
}

/// `E(U) = 1 - sum s_n^4 / (dL dR)^2`.
pub fn linear_operator_entanglement(op: &MultipartiteOperator, split: &Bipartition) -> Result<f64> {
    op.ensure_unitary(FACTOR_TOL)?;
    Ok(operator_schmidt(op, split)?
        .normalized_spectrum()?
        .linear_entropy())
}

/// `-sum lambda_n ln lambda_n` with `lambda_n = s_n^2 / (dL dR)`, in nats.
pub fn von_neumann_operator_entanglement(
    op: &MultipartiteOperator,
    split: &Bipartition,
) -> Result<f64> {
    op.ensure_unitary(FACTOR_TOL)?;
    Ok(operator_schmidt(op, split)?
        .normalized_spectrum()?
        .von_neumann_entropy())
}

/// Linear operator entanglement from `1 - Tr(U^{(x)2} S U^{dagger (x)2} S) / (dL dR)^2`,
/// where `S` exchanges the left block between the two copies. Requires equal
/// side dimensions.
pub fn linear_op_ent_via_trace(op: &MultipartiteOperator, split: &Bipartition) -> Result<f64> {
    op.ensure_unitary(FACTOR_TOL)?;
    let (dl, dr) = split.side_dims(op.dims());
    if dl != dr {
        return Err(Error::DimensionMismatch(format!(
            "trace route needs equal sides, got {dl} and {dr}"
        )));
    }
    let front = to_front(op, split)?;
    let left: Vec<usize> = (0..split.left().len()).collect();
    let s = swap_copies(front.num_systems(), &left);
    let t = doubled_trace(&front, &s, &s)?;
    let norm = ((dl * dr) as f64).powi(2);
    Ok(1.0 - t.re / norm)
}

/// Reduced operator `A_mn(theta) = d^{-2} sum_k exp(i theta k (m - n))` of
/// the spin gate after tracing out the second qudit.
pub fn spin_a_matrix(theta: f64, d: usize) -> Result<CMatrix> {
    if d < 2 {
        return Err(Error::InvalidDims(format!("qudit dimension {d} < 2")));
    }
    if !theta.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite angle {theta}")));
    }
    let reduced = theta.rem_euclid(TAU);
    let norm = 1.0 / (d * d) as f64;
    Ok(CMatrix::from_fn(d, d, |m, n| {
        let diff = m as f64 - n as f64;
        (0..d)
            .map(|k| C64::from_polar(norm, (reduced * k as f64 * diff).rem_euclid(TAU)))
            .sum()
    }))
}

/// `1 - sum mu_i^2` over the eigenvalues of [`spin_a_matrix`].
pub fn spin_linear_entanglement(theta: f64, d: usize) -> Result<f64> {
    let a = spin_a_matrix(theta, d)?;
    let mu = hermitian_eigenvalues(&a)?;
    Ok(1.0 - mu.iter().map(|m| m * m).sum::<f64>())
}

/// Uniform grid of `points` angles on `[0, 2 pi]`, both endpoints included.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaGrid {
    pub points: usize,
}

impl Default for ThetaGrid {
    fn default() -> Self {
        Self { points: 2001 }
    }
}

impl ThetaGrid {
    pub fn new(points: usize) -> Result<Self> {
        if points < 3 {
            return Err(Error::InvalidArgument(format!(
                "theta grid needs at least 3 points, got {points}"
            )));
        }
        Ok(Self { points })
    }

    pub fn step(&self) -> f64 {
        TAU / (self.points - 1) as f64
    }

    pub fn theta(&self, k: usize) -> f64 {
        if k + 1 == self.points {
            TAU
        } else {
            k as f64 * self.step()
        }
    }

    pub fn nearest_index(&self, theta: f64) -> usize {
        ((theta / self.step()).round() as usize).min(self.points - 1)
    }
}

/// A local maximum of a scanned curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveMaximum {
    pub grid_index: usize,
    pub grid_theta: f64,
    pub grid_value: f64,
    /// Location refined by golden-section search between the neighbouring
    /// grid points.
    pub theta: f64,
    pub value: f64,
}

/// `E(theta)` sampled on a grid for one qudit dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinCurve {
    pub d: usize,
    pub grid: ThetaGrid,
    pub values: Vec<f64>,
}

/// Grid points that exceed both neighbours by more than this are maxima.
pub const MAXIMUM_MARGIN: f64 = 1e-9;

impl SpinCurve {
    pub fn scan(d: usize, grid: ThetaGrid, execution: Execution) -> Result<Self> {
        let values = map_indexed(execution, grid.points, |k| {
            spin_linear_entanglement(grid.theta(k), d)
        })
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
        Ok(Self { d, grid, values })
    }

    /// `j` with `d = 2j + 1`.
    pub fn spin(&self) -> f64 {
        (self.d as f64 - 1.0) / 2.0
    }

    pub fn maxima(&self) -> Result<Vec<CurveMaximum>> {
        let v = &self.values;
        let mut out = Vec::new();
        for k in 1..v.len() - 1 {
            if v[k] - v[k - 1] > MAXIMUM_MARGIN && v[k] - v[k + 1] > MAXIMUM_MARGIN {
                let (theta, value) =
                    golden_section_max(self.grid.theta(k - 1), self.grid.theta(k + 1), |t| {
                        spin_linear_entanglement(t, self.d)
                    })?;
                out.push(CurveMaximum {
                    grid_index: k,
                    grid_theta: self.grid.theta(k),
                    grid_value: v[k],
                    theta,
                    value: value.max(v[k]),
                });
            }
        }
        Ok(out)
    }
}

fn golden_section_max(
    mut lo: f64,
    mut hi: f64,
    f: impl Fn(f64) -> Result<f64>,
) -> Result<(f64, f64)> {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    for _ in 0..80 {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = f(b)?;
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = f(a)?;
        }
    }
    Ok(if fa > fb { (a, fa) } else { (b, fb) })
}
