//! Qudit gates: shift, clock and Fourier on one qudit; CPHASE, SUM, DSUM,
//! SWAP, general controlled-U and the spin-coupling gate on two.

use std::f64::consts::TAU;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::random::haar_unitary_matrix;
use crate::tensor::{
    c64, max_abs_diff_identity, permutation_operator, permute_systems, CMatrix,
    MultipartiteOperator, C64, EXACT_TOL,
};

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidDims(format!("qudit dimension {d} < 2")));
    }
    Ok(())
}

fn unit_phase(turns_numerator: usize, d: usize) -> C64 {
    // exp(2 pi i k / d) with k reduced mod d first
    let angle = TAU * ((turns_numerator % d) as f64) / d as f64;
    C64::from_polar(1.0, angle)
}

/// `X|n> = |n + 1 mod d>`.
pub fn shift_x(d: usize) -> Result<MultipartiteOperator> {
    check_dim(d)?;
    MultipartiteOperator::from_fn(&[d], |i, j| {
        c64(if i == (j + 1) % d { 1.0 } else { 0.0 }, 0.0)
    })
}

/// `Z|n> = exp(2 pi i n / d)|n>`.
pub fn clock_z(d: usize) -> Result<MultipartiteOperator> {
    check_dim(d)?;
    MultipartiteOperator::from_fn(&[d], |i, j| {
        if i == j {
            unit_phase(i, d)
        } else {
            c64(0.0, 0.0)
        }
    })
}

/// Unitary Fourier transform `F|n> = d^{-1/2} sum_k exp(2 pi i n k / d)|k>`.
pub fn fourier(d: usize) -> Result<MultipartiteOperator> {
    check_dim(d)?;
    let norm = 1.0 / (d as f64).sqrt();
    MultipartiteOperator::from_fn(&[d], |k, n| unit_phase(n * k, d) * norm)
}

/// `|n><m|` on a single qudit.
pub fn projector(d: usize, n: usize, m: usize) -> Result<MultipartiteOperator> {
    check_dim(d)?;
    if n >= d || m >= d {
        return Err(Error::InvalidArgument(format!(
            "projector indices ({n}, {m}) out of range for d = {d}"
        )));
    }
    MultipartiteOperator::from_fn(&[d], |i, j| {
        c64(if i == n && j == m { 1.0 } else { 0.0 }, 0.0)
    })
}

/// `op^k` by repeated multiplication; `op^0` is the identity.
pub fn power(op: &MultipartiteOperator, k: usize) -> MultipartiteOperator {
    let mut acc = MultipartiteOperator::identity(op.dims()).expect("dims already validated");
    for _ in 0..k {
        acc = acc.mul(op).expect("same register");
    }
    acc
}

/// `C_U = sum_n |n><n| (x) U_n` assembled from its `d` target blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlledGate {
    blocks: Vec<CMatrix>,
}

impl ControlledGate {
    pub fn new(blocks: Vec<CMatrix>) -> Result<Self> {
        let d = blocks.len();
        check_dim(d)?;
        for (n, b) in blocks.iter().enumerate() {
            if b.nrows() != d || b.ncols() != d {
                return Err(Error::DimensionMismatch(format!(
                    "block {n} is {}x{}, expected {d}x{d}",
                    b.nrows(),
                    b.ncols()
                )));
            }
            let defect = max_abs_diff_identity(&(b.adjoint() * b));
            if defect.is_nan() || defect > EXACT_TOL {
                return Err(Error::NotUnitary(defect));
            }
        }
        Ok(Self { blocks })
    }

    /// Independent Haar-random blocks.
    pub fn random_haar<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Self> {
        check_dim(d)?;
        Self::new((0..d).map(|_| haar_unitary_matrix(d, rng)).collect())
    }

    /// Blocks `V X^n W` with Haar-random `V`, `W`: pairwise Hilbert-Schmidt
    /// orthogonal targets.
    pub fn random_orthogonal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Self> {
        check_dim(d)?;
        let v = haar_unitary_matrix(d, rng);
        let w = haar_unitary_matrix(d, rng);
        let x = shift_x(d)?;
        Self::new((0..d).map(|n| &v * power(&x, n).matrix() * &w).collect())
    }

    pub fn d(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn operator(&self) -> MultipartiteOperator {
        let d = self.d();
        MultipartiteOperator::from_fn(&[d, d], |i, j| {
            let (ci, ti) = (i / d, i % d);
            let (cj, tj) = (j / d, j % d);
            if ci == cj {
                self.blocks[ci][(ti, tj)]
            } else {
                c64(0.0, 0.0)
            }
        })
        .expect("d >= 2")
    }

    /// Parses the plain-text block format: the first line holds `d`, followed
    /// by `d` blocks of `d` rows, each row holding `d` pairs `re im`.
    /// Blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty controlled-gate file".into()))?;
        let d: usize = header
            .parse()
            .map_err(|_| Error::Parse(format!("invalid dimension line {header:?}")))?;
        check_dim(d)?;
        let mut blocks = Vec::with_capacity(d);
        for n in 0..d {
            let mut block = CMatrix::zeros(d, d);
            for r in 0..d {
                let line = lines
                    .next()
                    .ok_or_else(|| Error::Parse(format!("missing row {r} of block {n}")))?;
                let values = line
                    .split_whitespace()
                    .map(|t| {
                        t.parse::<f64>()
                            .map_err(|_| Error::Parse(format!("invalid number {t:?}")))
                    })
                    .collect::<Result<Vec<f64>>>()?;
                if values.len() != 2 * d {
                    return Err(Error::Parse(format!(
                        "row {r} of block {n} has {} numbers, expected {}",
                        values.len(),
                        2 * d
                    )));
                }
                for c in 0..d {
                    block[(r, c)] = c64(values[2 * c], values[2 * c + 1]);
                }
            }
            blocks.push(block);
        }
        if let Some(extra) = lines.next() {
            return Err(Error::Parse(format!("trailing content {extra:?}")));
        }
        Self::new(blocks)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Inverse of [`ControlledGate::parse`]; numbers use shortest round-trip
    /// formatting.
    pub fn to_text(&self) -> String {
        let d = self.d();
        let mut out = format!("{d}\n");
        for block in &self.blocks {
            for r in 0..d {
                let row: Vec<String> = (0..d)
                    .map(|c| format!("{} {}", block[(r, c)].re, block[(r, c)].im))
                    .collect();
                out.push_str(&row.join(" "));
                out.push('\n');
            }
        }
        out
    }
}

pub fn controlled_u(blocks: &[CMatrix]) -> Result<MultipartiteOperator> {
    Ok(ControlledGate::new(blocks.to_vec())?.operator())
}

/// `sum_n |n><n| (x) Z^n`.
pub fn cphase(d: usize) -> Result<MultipartiteOperator> {
    check_dim(d)?;
    MultipartiteOperator::from_fn(&[d, d], |i, j| {
        if i == j {
            unit_phase((i / d) * (i % d), d)
        } else {
            c64(0.0, 0.0)
        }
    })
}

/// Which qudit controls a SUM gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    /// `|m, n> -> |m, m + n>`
    FirstControls,
    /// `|m, n> -> |m + n, n>`
    SecondControls,
}

pub fn sum_gate(d: usize, direction: Direction) -> Result<MultipartiteOperator> {
    check_dim(d)?;
    let forward = MultipartiteOperator::from_fn(&[d, d], |i, j| {
        let (m, n) = (j / d, j % d);
        c64(if i == m * d + (m + n) % d { 1.0 } else { 0.0 }, 0.0)
    })?;
    match direction {
        Direction::FirstControls => Ok(forward),
        Direction::SecondControls => permute_systems(&forward, &[1, 0]),
    }
}

/// `SUM^{-1}(2 -> 1) SUM(1 -> 2)`.
pub fn dsum(d: usize) -> Result<MultipartiteOperator> {
    let forward = sum_gate(d, Direction::FirstControls)?;
    let backward = sum_gate(d, Direction::SecondControls)?;
    backward.adjoint().mul(&forward)
}

/// `exp(i theta N (x) N)` with `N|n> = n|n>`: diagonal entries `exp(i theta m n)`.
pub fn spin_gate(theta: f64, d: usize) -> Result<MultipartiteOperator> {
    check_dim(d)?;
    if !theta.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite angle {theta}")));
    }
    let reduced = theta.rem_euclid(TAU);
    MultipartiteOperator::from_fn(&[d, d], |i, j| {
        if i == j {
            let mn = ((i / d) * (i % d)) as f64;
            C64::from_polar(1.0, (reduced * mn).rem_euclid(TAU))
        } else {
            c64(0.0, 0.0)
        }
    })
}

/// Two-qudit swap `S|m, n> = |n, m>`.
pub fn swap(d: usize) -> Result<MultipartiteOperator> {
    check_dim(d)?;
    permutation_operator(&[d, d], &[1, 0])
}

/// Exchanges systems `i` and `j` of a register.
pub fn swap_systems(dims: &[usize], i: usize, j: usize) -> Result<MultipartiteOperator> {
    if i >= dims.len() || j >= dims.len() {
        return Err(Error::InvalidPositions(format!(
            "swap ({i}, {j}) on a {}-system register",
            dims.len()
        )));
    }
    if dims[i] != dims[j] {
        return Err(Error::DimensionMismatch(format!(
            "cannot swap systems of dimension {} and {}",
            dims[i], dims[j]
        )));
    }
    let mut perm: Vec<usize> = (0..dims.len()).collect();
    perm.swap(i, j);
    permutation_operator(dims, &perm)
}

/// `S_{ik} S_{jl}` for two disjoint pairs of systems.
pub fn swap_pairs(
    dims: &[usize],
    first: (usize, usize),
    second: (usize, usize),
) -> Result<MultipartiteOperator> {
    let a = swap_systems(dims, first.0, first.1)?;
    let b = swap_systems(dims, second.0, second.1)?;
    a.mul(&b)
}

/// How gate equality is judged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Comparison {
    Exact,
    #[default]
    UpToGlobalPhase,
}

/// Entrywise `max |A - e^{i phi} B|` with `phi` the phase of `Tr(B^dagger A)`
/// (or `phi = 0` in exact mode).
pub fn gate_distance(a: &MultipartiteOperator, b: &MultipartiteOperator, mode: Comparison) -> f64 {
    if a.matrix().shape() != b.matrix().shape() {
        return f64::INFINITY;
    }
    let phase = match mode {
        Comparison::Exact => c64(1.0, 0.0),
        Comparison::UpToGlobalPhase => {
            let overlap = b.matrix().dotc(a.matrix());
            if overlap.norm() > 0.0 {
                overlap / c64(overlap.norm(), 0.0)
            } else {
                c64(1.0, 0.0)
            }
        }
    };
    a.matrix()
        .iter()
        .zip(b.matrix().iter())
        .map(|(x, y)| (x - phase * y).norm())
        .fold(0.0, f64::max)
}

pub fn gates_equal(
    a: &MultipartiteOperator,
    b: &MultipartiteOperator,
    mode: Comparison,
    tol: f64,
) -> bool {
    gate_distance(a, b, mode) <= tol
}

/// The gate families addressable from the command line.
#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    Identity,
    X,
    Z,
    Fourier,
    Cphase,
    Sum(Direction),
    Dsum,
    Swap,
    Controlled {
        source: String,
        gate: ControlledGate,
    },
    Spin(f64),
}

impl GateKind {
    pub fn is_two_qudit(&self) -> bool {
        !matches!(self, GateKind::X | GateKind::Z | GateKind::Fourier)
    }

    /// Whether the gate carries a fixed dimension of its own.
    pub fn fixed_dim(&self) -> Option<usize> {
        match self {
            GateKind::Controlled { gate, .. } => Some(gate.d()),
            _ => None,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateKind::Identity => f.write_str("identity"),
            GateKind::X => f.write_str("x"),
            GateKind::Z => f.write_str("z"),
            GateKind::Fourier => f.write_str("fourier"),
            GateKind::Cphase => f.write_str("cphase"),
            GateKind::Sum(Direction::FirstControls) => f.write_str("sum"),
            GateKind::Sum(Direction::SecondControls) => f.write_str("sum:21"),
            GateKind::Dsum => f.write_str("dsum"),
            GateKind::Swap => f.write_str("swap"),
            GateKind::Controlled { source, .. } => write!(f, "controlled:{source}"),
            GateKind::Spin(theta) => write!(f, "spin:{theta}"),
        }
    }
}

impl FromStr for GateKind {
    type Err = Error;

    /// Text forms: `identity`, `x`, `z`, `fourier`, `cphase`, `sum` (or
    /// `sum:12`), `sum:21`, `dsum`, `swap`, `spin:<theta>`, `controlled:<file>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(theta) = s.strip_prefix("spin:") {
            let theta: f64 = theta
                .parse()
                .map_err(|_| Error::Parse(format!("invalid spin angle {theta:?}")))?;
            if !theta.is_finite() {
                return Err(Error::Parse(format!("non-finite spin angle {theta}")));
            }
            return Ok(GateKind::Spin(theta));
        }
        if let Some(path) = s.strip_prefix("controlled:") {
            let gate = ControlledGate::load(Path::new(path))?;
            return Ok(GateKind::Controlled {
                source: path.to_string(),
                gate,
            });
        }
        match s.to_ascii_lowercase().as_str() {
            "identity" | "id" => Ok(GateKind::Identity),
            "x" => Ok(GateKind::X),
            "z" => Ok(GateKind::Z),
            "fourier" | "f" => Ok(GateKind::Fourier),
            "cphase" => Ok(GateKind::Cphase),
            "sum" | "sum:12" => Ok(GateKind::Sum(Direction::FirstControls)),
            "sum:21" => Ok(GateKind::Sum(Direction::SecondControls)),
            "dsum" => Ok(GateKind::Dsum),
            "swap" => Ok(GateKind::Swap),
            other => Err(Error::UnsupportedGate(other.to_string())),
        }
    }
}

/// A gate family together with its qudit dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct GateSpec {
    pub kind: GateKind,
    pub d: usize,
}

impl GateSpec {
    pub fn new(kind: GateKind, d: usize) -> Result<Self> {
        check_dim(d)?;
        if let Some(fixed) = kind.fixed_dim() {
            if fixed != d {
                return Err(Error::DimensionMismatch(format!(
                    "gate {kind} has dimension {fixed}, requested {d}"
                )));
            }
        }
        Ok(Self { kind, d })
    }

    /// The matrix of the gate: `d x d` for one-qudit kinds, `d^2 x d^2` otherwise.
    pub fn build(&self) -> Result<MultipartiteOperator> {
        let d = self.d;
        match &self.kind {
            GateKind::Identity => MultipartiteOperator::identity(&[d, d]),
            GateKind::X => shift_x(d),
            GateKind::Z => clock_z(d),
            GateKind::Fourier => fourier(d),
            GateKind::Cphase => cphase(d),
            GateKind::Sum(dir) => sum_gate(d, *dir),
            GateKind::Dsum => dsum(d),
            GateKind::Swap => swap(d),
            GateKind::Controlled { gate, .. } => Ok(gate.operator()),
            GateKind::Spin(theta) => spin_gate(*theta, d),
        }
    }

    /// The two-qudit operator, rejecting one-qudit kinds.
    pub fn two_qudit(&self) -> Result<MultipartiteOperator> {
        if !self.kind.is_two_qudit() {
            return Err(Error::UnsupportedGate(format!(
                "{} is a one-qudit gate",
                self.kind
            )));
        }
        self.build()
    }
}

impl fmt::Display for GateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.kind.fmt(f)
    }
}
