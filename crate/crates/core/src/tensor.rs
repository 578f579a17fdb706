//! Dense multipartite operators.
//!
//! Composite basis indices always put system 0 in the most significant
//! position: for dims `[d0, d1, d2]` the basis state `|i0 i1 i2>` sits at
//! index `(i0 * d1 + i1) * d2 + i2`. System positions in this API are
//! zero-based.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Tolerance for identities that hold exactly in exact arithmetic.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance for quantities that pass through an iterative factorization.
pub const FACTOR_TOL: f64 = 1e-10;

pub(crate) fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub(crate) fn product(dims: &[usize]) -> usize {
    dims.iter().product()
}

/// Row-major strides for a mixed-radix register.
pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

fn validate_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() {
        return Err(Error::InvalidDims("empty dimension list".into()));
    }
    if let Some(d) = dims.iter().find(|&&d| d < 2) {
        return Err(Error::InvalidDims(format!(
            "subsystem dimension {d} < 2 in {dims:?}"
        )));
    }
    Ok(())
}

/// A dense complex square matrix acting on a register of qudits.
#[derive(Clone, Debug, PartialEq)]
pub struct MultipartiteOperator {
    data: CMatrix,
    dims: Vec<usize>,
}

impl MultipartiteOperator {
    pub fn new(data: CMatrix, dims: Vec<usize>) -> Result<Self> {
        validate_dims(&dims)?;
        let total = product(&dims);
        if data.nrows() != total || data.ncols() != total {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{} but dims {:?} require {total}x{total}",
                data.nrows(),
                data.ncols(),
                dims
            )));
        }
        Ok(Self { data, dims })
    }

    pub fn identity(dims: &[usize]) -> Result<Self> {
        validate_dims(dims)?;
        let total = product(dims);
        Ok(Self {
            data: CMatrix::identity(total, total),
            dims: dims.to_vec(),
        })
    }

    pub fn from_fn(dims: &[usize], f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        validate_dims(dims)?;
        let total = product(dims);
        Ok(Self {
            data: CMatrix::from_fn(total, total, f),
            dims: dims.to_vec(),
        })
    }

    /// Single-system operator of dimension `d`.
    pub fn single(data: CMatrix) -> Result<Self> {
        let d = data.nrows();
        Self::new(data, vec![d])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_systems(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn adjoint(&self) -> Self {
        Self {
            data: self.data.adjoint(),
            dims: self.dims.clone(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            data: &self.data * factor,
            dims: self.dims.clone(),
        }
    }

    /// Operator product `self * rhs`; both factors must live on the same register.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.dims != rhs.dims {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply operators on {:?} and {:?}",
                self.dims, rhs.dims
            )));
        }
        Ok(Self {
            data: &self.data * &rhs.data,
            dims: self.dims.clone(),
        })
    }

    /// Product of a sequence of operators, left to right.
    pub fn chain<'a>(ops: impl IntoIterator<Item = &'a Self>) -> Result<Self> {
        let mut iter = ops.into_iter();
        let first = iter
            .next()
            .ok_or_else(|| Error::InvalidArgument("empty operator chain".into()))?
            .clone();
        iter.try_fold(first, |acc, op| acc.mul(op))
    }

    pub fn apply(&self, psi: &CVector) -> Result<CVector> {
        if psi.len() != self.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "operator of dimension {} applied to vector of length {}",
                self.total_dim(),
                psi.len()
            )));
        }
        Ok(&self.data * psi)
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    /// `max |U^dagger U - I|` over all entries.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = self.data.adjoint() * &self.data;
        max_abs_diff_identity(&prod)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    /// Rejects operators that are not unitary within `tol`.
    pub fn ensure_unitary(&self, tol: f64) -> Result<()> {
        let defect = self.unitarity_defect();
        if defect.is_finite() && defect <= tol {
            Ok(())
        } else {
            Err(Error::NotUnitary(defect))
        }
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.data)
    }

    /// Entrywise `max |A - B|`; `f64::INFINITY` when shapes differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.data.shape() != other.data.shape() {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn max_abs_diff_identity(m: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((m[(i, j)] - c64(target, 0.0)).norm());
        }
    }
    worst
}

pub(crate) fn hermiticity_defect(m: &CMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let mut worst: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// A split of the systems of a register into two nonempty complementary sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bipartition {
    num_systems: usize,
    left: Vec<usize>,
    right: Vec<usize>,
}

impl Bipartition {
    pub fn new(num_systems: usize, left: &[usize]) -> Result<Self> {
        let mut sorted = left.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != left.len() {
            return Err(Error::InvalidBipartition(format!(
                "duplicate positions in {left:?}"
            )));
        }
        if sorted.iter().any(|&p| p >= num_systems) {
            return Err(Error::InvalidBipartition(format!(
                "position out of range in {left:?} for {num_systems} systems"
            )));
        }
        if sorted.is_empty() || sorted.len() == num_systems {
            return Err(Error::InvalidBipartition(
                "both sides of a bipartition must be nonempty".into(),
            ));
        }
        let right = (0..num_systems).filter(|p| !sorted.contains(p)).collect();
        Ok(Self {
            num_systems,
            left: sorted,
            right,
        })
    }

    /// Systems `0..split` on the left, the rest on the right.
    pub fn contiguous(num_systems: usize, split: usize) -> Result<Self> {
        Self::new(num_systems, &(0..split).collect::<Vec<_>>())
    }

    pub fn left(&self) -> &[usize] {
        &self.left
    }

    pub fn right(&self) -> &[usize] {
        &self.right
    }

    pub fn num_systems(&self) -> usize {
        self.num_systems
    }

    /// Permutation (old position -> new position) moving the left block to the front.
    pub fn to_front_permutation(&self) -> Vec<usize> {
        let mut perm = vec![0; self.num_systems];
        for (new, &old) in self.left.iter().chain(self.right.iter()).enumerate() {
            perm[old] = new;
        }
        perm
    }

    pub fn is_prefix(&self) -> bool {
        self.left.iter().enumerate().all(|(i, &p)| i == p)
    }

    pub fn side_dims(&self, dims: &[usize]) -> (usize, usize) {
        (
            self.left.iter().map(|&p| dims[p]).product(),
            self.right.iter().map(|&p| dims[p]).product(),
        )
    }
}

pub fn kron(a: &MultipartiteOperator, b: &MultipartiteOperator) -> MultipartiteOperator {
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    MultipartiteOperator {
        data: a.data.kronecker(&b.data),
        dims,
    }
}

/// Kronecker product of several operators, left to right (leftmost most significant).
pub fn kron_all<'a>(
    ops: impl IntoIterator<Item = &'a MultipartiteOperator>,
) -> Result<MultipartiteOperator> {
    let mut iter = ops.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::InvalidArgument("empty tensor product".into()))?
        .clone();
    Ok(iter.fold(first, |acc, op| kron(&acc, op)))
}

pub(crate) fn validate_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::InvalidPermutation(format!(
            "permutation {perm:?} has length {} but register has {n} systems",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidPermutation(format!(
                "{perm:?} is not a bijection on 0..{n}"
            )));
        }
        seen[p] = true;
    }
    Ok(())
}

/// For each composite index of the permuted register, the matching index of
/// the original register. `perm[k]` is the new position of old system `k`.
pub(crate) fn permuted_index_map(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let n = dims.len();
    let mut new_dims = vec![0; n];
    for (k, &p) in perm.iter().enumerate() {
        new_dims[p] = dims[k];
    }
    let old_strides = strides(dims);
    let total = product(dims);
    let mut map = Vec::with_capacity(total);
    let mut digits = vec![0usize; n];
    for _ in 0..total {
        let old: usize = (0..n).map(|k| digits[perm[k]] * old_strides[k]).sum();
        map.push(old);
        for s in (0..n).rev() {
            digits[s] += 1;
            if digits[s] < new_dims[s] {
                break;
            }
            digits[s] = 0;
        }
    }
    map
}

/// Relabels systems: old system `k` moves to position `perm[k]`.
///
/// Equivalent to `P op P^dagger` for the permutation operator `P`.
pub fn permute_systems(op: &MultipartiteOperator, perm: &[usize]) -> Result<MultipartiteOperator> {
    validate_permutation(perm, op.num_systems())?;
    let map = permuted_index_map(&op.dims, perm);
    let mut dims = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        dims[p] = op.dims[k];
    }
    let total = op.total_dim();
    let data = CMatrix::from_fn(total, total, |i, j| op.data[(map[i], map[j])]);
    Ok(MultipartiteOperator { data, dims })
}

/// The permutation operator `P` with `P|i_0 .. i_{n-1}> = |j>` where old
/// system `k` lands at position `perm[k]`.
pub fn permutation_operator(dims: &[usize], perm: &[usize]) -> Result<MultipartiteOperator> {
    validate_dims(dims)?;
    validate_permutation(perm, dims.len())?;
    let map = permuted_index_map(dims, perm);
    let total = product(dims);
    let mut data = CMatrix::zeros(total, total);
    for (new, &old) in map.iter().enumerate() {
        data[(new, old)] = c64(1.0, 0.0);
    }
    let mut new_dims = vec![0; dims.len()];
    for (k, &p) in perm.iter().enumerate() {
        new_dims[p] = dims[k];
    }
    // the matrix maps the old register onto the new one; keep the old labels
    // only when they coincide, which is the case for every permutation of
    // equal-dimensional systems used here
    if new_dims != dims {
        return Err(Error::InvalidPermutation(format!(
            "permutation {perm:?} changes the register layout {dims:?}"
        )));
    }
    MultipartiteOperator::new(data, dims.to_vec())
}

fn normalize_positions(positions: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut sorted = positions.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != positions.len() {
        return Err(Error::InvalidPositions(format!(
            "duplicate positions in {positions:?}"
        )));
    }
    if sorted.is_empty() {
        return Err(Error::InvalidPositions("empty position set".into()));
    }
    if let Some(p) = sorted.iter().find(|&&p| p >= n) {
        return Err(Error::InvalidPositions(format!(
            "position {p} out of range for {n} systems"
        )));
    }
    Ok(sorted)
}

/// Traces out every system not listed in `keep`. The kept systems retain
/// their relative order.
pub fn partial_trace(op: &MultipartiteOperator, keep: &[usize]) -> Result<MultipartiteOperator> {
    let n = op.num_systems();
    let keep = normalize_positions(keep, n)?;
    if keep.len() == n {
        return Ok(op.clone());
    }
    let split = Bipartition::new(n, &keep)?;
    let front = permute_systems(op, &split.to_front_permutation())?;
    let (d_keep, d_rest) = split.side_dims(&op.dims);
    let data = CMatrix::from_fn(d_keep, d_keep, |a, b| {
        (0..d_rest)
            .map(|t| front.data[(a * d_rest + t, b * d_rest + t)])
            .sum()
    });
    let dims = keep.iter().map(|&p| op.dims[p]).collect();
    MultipartiteOperator::new(data, dims)
}

/// Reshuffles an operator across the cut after the first `split` systems:
/// `R[(iL, jL), (iR, jR)] = O[(iL, iR), (jL, jR)]`.
///
/// The result has shape `dL^2 x dR^2`; its singular values are the operator
/// Schmidt coefficients across the cut.
pub fn reshuffle(op: &MultipartiteOperator, split: usize) -> Result<CMatrix> {
    let cut = Bipartition::contiguous(op.num_systems(), split)?;
    let (dl, dr) = cut.side_dims(&op.dims);
    Ok(reshuffle_matrix(&op.data, dl, dr))
}

pub(crate) fn reshuffle_matrix(m: &CMatrix, dl: usize, dr: usize) -> CMatrix {
    CMatrix::from_fn(dl * dl, dr * dr, |row, col| {
        let (il, jl) = (row / dl, row % dl);
        let (ir, jr) = (col / dr, col % dr);
        m[(il * dr + ir, jl * dr + jr)]
    })
}

/// Inverse of [`reshuffle`]: rebuilds the `dL dR x dL dR` operator matrix.
pub fn reshuffle_inverse(r: &CMatrix, dl: usize, dr: usize) -> Result<CMatrix> {
    if r.nrows() != dl * dl || r.ncols() != dr * dr {
        return Err(Error::DimensionMismatch(format!(
            "reshuffled matrix is {}x{}, expected {}x{}",
            r.nrows(),
            r.ncols(),
            dl * dl,
            dr * dr
        )));
    }
    let d = dl * dr;
    Ok(CMatrix::from_fn(d, d, |row, col| {
        let (il, ir) = (row / dr, row % dr);
        let (jl, jr) = (col / dr, col % dr);
        r[(il * dl + jl, ir * dr + jr)]
    }))
}

/// Places `u` on the listed `positions` of a register with `total_dims`,
/// acting as the identity elsewhere. System `k` of `u` goes to `positions[k]`.
pub fn embed(
    u: &MultipartiteOperator,
    total_dims: &[usize],
    positions: &[usize],
) -> Result<MultipartiteOperator> {
    validate_dims(total_dims)?;
    let n = total_dims.len();
    normalize_positions(positions, n)?;
    if positions.len() != u.num_systems() {
        return Err(Error::InvalidPositions(format!(
            "operator has {} systems but {} positions were given",
            u.num_systems(),
            positions.len()
        )));
    }
    for (k, &p) in positions.iter().enumerate() {
        if u.dims[k] != total_dims[p] {
            return Err(Error::DimensionMismatch(format!(
                "system {k} of the operator has dimension {} but position {p} has {}",
                u.dims[k], total_dims[p]
            )));
        }
    }
    let rest: Vec<usize> = (0..n).filter(|p| !positions.contains(p)).collect();
    if rest.is_empty() {
        let mut perm = vec![0; n];
        for (k, &p) in positions.iter().enumerate() {
            perm[k] = p;
        }
        return permute_systems(u, &perm);
    }
    let rest_dims: Vec<usize> = rest.iter().map(|&p| total_dims[p]).collect();
    let full = kron(u, &MultipartiteOperator::identity(&rest_dims)?);
    let perm: Vec<usize> = positions.iter().chain(rest.iter()).copied().collect();
    permute_systems(&full, &perm)
}

/// Hilbert-Schmidt inner product `Tr(X^dagger Y)`.
pub fn hs_inner(x: &MultipartiteOperator, y: &MultipartiteOperator) -> Result<C64> {
    if x.total_dim() != y.total_dim() {
        return Err(Error::DimensionMismatch(format!(
            "Hilbert-Schmidt product of dimension {} and {}",
            x.total_dim(),
            y.total_dim()
        )));
    }
    Ok(x.data.dotc(&y.data))
}

pub fn hs_norm(x: &MultipartiteOperator) -> f64 {
    x.data.norm()
}

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let svd = SVD::new(m.clone(), false, false);
    let mut values: Vec<f64> = svd.singular_values.iter().map(|s| s.max(0.0)).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Eigenvalues of a Hermitian matrix in descending order.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Result<Vec<f64>> {
    if h.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues of a non-square {}x{} matrix",
            h.nrows(),
            h.ncols()
        )));
    }
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let defect = hermiticity_defect(h);
    if defect > FACTOR_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}
