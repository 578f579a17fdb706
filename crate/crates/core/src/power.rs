//! Entangling power: exact linear-entropy routes, closed forms, Monte Carlo
//! estimates over Haar product inputs and a witnessed maximal-entanglement
//! search.

use std::time::Instant;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::contraction::{doubled_trace, swap_copies};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::gates::{swap, ControlledGate, GateKind, GateSpec};
use crate::opent::{linear_operator_entanglement, two_qudit_cut};
use crate::random::{complex_gaussian, haar_vector, stream};
use crate::state::{maximally_entangled_pair, PureState, SchmidtSpectrum};
use crate::tensor::{
    c64, embed, singular_values, CMatrix, CVector, MultipartiteOperator, FACTOR_TOL,
};

/// Default largest `d` for the direct assisted trace route.
pub const DEFAULT_ASSISTED_CAP: usize = 3;
/// Largest cap the assisted trace route accepts.
pub const MAX_ASSISTED_CAP: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Trace,
    Schmidt,
    MonteCarlo,
    ClosedForm,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Trace => "trace",
            Method::Schmidt => "schmidt",
            Method::MonteCarlo => "monte-carlo",
            Method::ClosedForm => "closed-form",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Entropy {
    Linear,
    VonNeumann,
    /// `-ln(1 - e)` of the linear-entropy power.
    Bar,
}

impl Entropy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Entropy::Linear => "linear",
            Entropy::VonNeumann => "von-neumann",
            Entropy::Bar => "bar",
        }
    }

    fn of(&self, spectrum: &SchmidtSpectrum) -> Result<f64> {
        match self {
            Entropy::Linear => Ok(spectrum.linear_entropy()),
            Entropy::VonNeumann => Ok(spectrum.von_neumann_entropy()),
            Entropy::Bar => Err(Error::InvalidArgument(
                "the bar transform applies to averaged powers, not to single states".into(),
            )),
        }
    }
}

fn square_dim(u: &MultipartiteOperator) -> Result<usize> {
    match u.dims() {
        [a, b] if a == b => Ok(*a),
        [a, b] => Err(Error::DimensionMismatch(format!(
            "route needs a d x d gate, got {a} x {b}"
        ))),
        dims => Err(Error::InvalidDims(format!(
            "expected a two-qudit gate, got dims {dims:?}"
        ))),
    }
}

fn two_qudit_dims(u: &MultipartiteOperator) -> Result<(usize, usize)> {
    match u.dims() {
        [a, b] => Ok((*a, *b)),
        dims => Err(Error::InvalidDims(format!(
            "expected a two-qudit gate, got dims {dims:?}"
        ))),
    }
}

/// The `1 - [...] / (d1 (d1+1) d2 (d2+1))` Haar average written with two
/// doubled traces over the swaps `S_L`, `S_R` of the left and right blocks
/// between the copies.
fn haar_trace_formula(u: &MultipartiteOperator, left: usize, d1: usize, d2: usize) -> Result<f64> {
    let n = u.num_systems();
    let s_left = swap_copies(n, &(0..left).collect::<Vec<_>>());
    let s_right = swap_copies(n, &(left..n).collect::<Vec<_>>());
    let t1 = doubled_trace(u, &s_left, &s_left)?.re;
    let t2 = doubled_trace(u, &s_right, &s_left)?.re;
    let (d1, d2) = (d1 as f64, d2 as f64);
    let numerator = d1 * d2 * d2 + d2 * d1 * d1 + t1 + t2;
    Ok(1.0 - numerator / (d1 * (d1 + 1.0) * d2 * (d2 + 1.0)))
}

/// Unassisted linear-entropy entangling power from the Haar trace formula,
/// evaluated by contraction over two copies of `u`.
pub fn ep_unassisted_trace(u: &MultipartiteOperator) -> Result<f64> {
    let (d1, d2) = two_qudit_dims(u)?;
    u.ensure_unitary(FACTOR_TOL)?;
    haar_trace_formula(u, 1, d1, d2)
}

/// `(d/(d+1))^2 [E(U) + E(U S) - E(S)]` with `S` the two-qudit swap.
pub fn ep_unassisted_schmidt(u: &MultipartiteOperator) -> Result<f64> {
    let d = square_dim(u)?;
    let s = swap(d)?;
    let cut = two_qudit_cut();
    let e_u = linear_operator_entanglement(u, &cut)?;
    let e_us = linear_operator_entanglement(&u.mul(&s)?, &cut)?;
    let e_s = linear_operator_entanglement(&s, &cut)?;
    let df = d as f64;
    Ok((df / (df + 1.0)).powi(2) * (e_u + e_us - e_s))
}

/// `I (x) U (x) I` on the assisted register `(A', A, B, B')`.
pub fn assisted_embedding(u: &MultipartiteOperator) -> Result<MultipartiteOperator> {
    let d = square_dim(u)?;
    embed(u, &[d; 4], &[1, 2])
}

/// `E(W S)` across `(A'A)|(BB')` for `W = I (x) U (x) I` and `S` exchanging
/// `A'A` with `BB'`.
///
/// The reshuffled `W S` is `I_{d^2} (x) M` up to row and column order, with
/// `M[(x c), (y e)] = U[(x y), (e c)]`, so its singular values are those of
/// the `d^2 x d^2` matrix `M`, each repeated `d^2` times.
pub fn assisted_swap_entanglement(u: &MultipartiteOperator) -> Result<f64> {
    let d = square_dim(u)?;
    u.ensure_unitary(FACTOR_TOL)?;
    let um = u.matrix();
    let m = CMatrix::from_fn(d * d, d * d, |r, c| {
        let (x, cp) = (r / d, r % d);
        let (y, ep) = (c / d, c % d);
        um[(x * d + y, ep * d + cp)]
    });
    let norm = (d * d * d * d) as f64;
    let weights: Vec<f64> = singular_values(&m)?
        .iter()
        .flat_map(|s| std::iter::repeat_n(s * s / norm, d * d))
        .collect();
    Ok(SchmidtSpectrum::from_weights(weights)?.linear_entropy())
}

/// `(d^2/(d^2+1))^2 [E(W) + E(W S) - E(S)]` across `(A'A)|(BB')`, where `W`
/// embeds `u` and `S` exchanges `A'A` with `BB'`.
///
/// `E(W)` is evaluated as `E(U)`: the ancilla identities only rescale the
/// operator Schmidt coefficients. `E(W S)` and `E(S)` go through
/// [`assisted_swap_entanglement`].
pub fn ep_assisted_schmidt(u: &MultipartiteOperator) -> Result<f64> {
    let d = square_dim(u)?;
    let e_w = linear_operator_entanglement(u, &two_qudit_cut())?;
    let e_ws = assisted_swap_entanglement(u)?;
    let e_s = assisted_swap_entanglement(&MultipartiteOperator::identity(&[d, d])?)?;
    let dd = (d * d) as f64;
    Ok((dd / (dd + 1.0)).powi(2) * (e_w + e_ws - e_s))
}

/// Assisted power from the Haar trace formula on the four-system register
/// with `D = d^2` per side. Refuses `d > cap`; `cap` itself may not exceed
/// [`MAX_ASSISTED_CAP`].
pub fn ep_assisted_trace(u: &MultipartiteOperator, cap: usize) -> Result<f64> {
    if cap > MAX_ASSISTED_CAP {
        return Err(Error::InvalidArgument(format!(
            "assisted trace cap {cap} above the supported maximum {MAX_ASSISTED_CAP}"
        )));
    }
    let d = square_dim(u)?;
    if d > cap {
        return Err(Error::CapExceeded { d, cap });
    }
    u.ensure_unitary(FACTOR_TOL)?;
    let w = assisted_embedding(u)?;
    haar_trace_formula(&w, 2, d * d, d * d)
}

/// `-ln(1 - e)`.
pub fn bar_transform(e: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&e) {
        return Err(Error::Domain(e));
    }
    Ok(-(-e).ln_1p())
}

/// Maps `|a> (x) |b>` through a gate and measures the entropy of the output
/// across the cut between the two factors.
struct ProductEvaluator {
    op: CMatrix,
    left: usize,
    right: usize,
}

impl ProductEvaluator {
    fn new(u: &MultipartiteOperator, assisted: bool) -> Result<Self> {
        u.ensure_unitary(FACTOR_TOL)?;
        if assisted {
            let d = square_dim(u)?;
            Ok(Self {
                op: assisted_embedding(u)?.into_matrix(),
                left: d * d,
                right: d * d,
            })
        } else {
            let (left, right) = two_qudit_dims(u)?;
            Ok(Self {
                op: u.matrix().clone(),
                left,
                right,
            })
        }
    }

    fn spectrum(&self, a: &CVector, b: &CVector) -> Result<SchmidtSpectrum> {
        let out = &self.op * a.kronecker(b);
        let r = self.right;
        SchmidtSpectrum::from_coefficients(&CMatrix::from_fn(self.left, r, |i, j| out[i * r + j]))
    }

    fn entropy(&self, a: &CVector, b: &CVector, entropy: Entropy) -> Result<f64> {
        entropy.of(&self.spectrum(a, b)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MonteCarloConfig {
    pub samples: usize,
    pub seed: u64,
    pub execution: Execution,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Average output entanglement over independent Haar-random product inputs.
///
/// Unassisted inputs are `|psi_1> (x) |psi_2>`; assisted inputs are
/// `|alpha>_{A'A} (x) |beta>_{BB'}` with each factor Haar on `C^{d^2}`.
/// Sample `i` draws from `stream(seed, i)` and the mean is summed in sample
/// order.
pub fn ep_monte_carlo(
    u: &MultipartiteOperator,
    assisted: bool,
    entropy: Entropy,
    config: MonteCarloConfig,
) -> Result<MonteCarloEstimate> {
    if config.samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "Monte Carlo needs at least 2 samples, got {}",
            config.samples
        )));
    }
    if entropy == Entropy::Bar {
        return Err(Error::InvalidArgument(
            "Monte Carlo estimates linear or von Neumann entropy".into(),
        ));
    }
    let eval = ProductEvaluator::new(u, assisted)?;
    let values = map_indexed(config.execution, config.samples, |i| {
        let mut rng = stream(config.seed, i as u64);
        let a = haar_vector(eval.left, &mut rng);
        let b = haar_vector(eval.right, &mut rng);
        eval.entropy(&a, &b, entropy)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(MonteCarloEstimate {
        mean,
        stderr: (var / n).sqrt(),
        samples: config.samples,
        seed: config.seed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MaxSearchConfig {
    /// Random starting points on top of the structured ones.
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
    pub execution: Execution,
}

impl Default for MaxSearchConfig {
    fn default() -> Self {
        Self {
            restarts: 8,
            iterations: 400,
            seed: 0,
            execution: Execution::Parallel,
        }
    }
}

/// Best von Neumann entropy found, with the product input achieving it.
#[derive(Clone, Debug, PartialEq)]
pub struct MaxEntanglement {
    pub value: f64,
    pub left: PureState,
    pub right: PureState,
}

fn normalize(v: CVector) -> CVector {
    let n = v.norm();
    v / c64(n, 0.0)
}

fn structured_factors(dim: usize, assisted: bool) -> Result<Vec<CVector>> {
    let mut zero = CVector::zeros(dim);
    zero[0] = c64(1.0, 0.0);
    let uniform = CVector::from_element(dim, c64(1.0 / (dim as f64).sqrt(), 0.0));
    let mut out = vec![zero, uniform];
    if assisted {
        let d = (dim as f64).sqrt().round() as usize;
        out.push(maximally_entangled_pair(d)?.amplitudes().clone());
    }
    Ok(out)
}

fn hill_climb(
    eval: &ProductEvaluator,
    mut a: CVector,
    mut b: CVector,
    iterations: usize,
    seed: u64,
    run: u64,
) -> Result<(f64, CVector, CVector)> {
    let mut rng = stream(seed, run);
    let mut best = eval.entropy(&a, &b, Entropy::VonNeumann)?;
    let mut sigma = 0.2;
    for it in 0..iterations {
        let perturb = |v: &CVector, rng: &mut _| {
            normalize(v + CVector::from_fn(v.len(), |_, _| complex_gaussian(rng)) * c64(sigma, 0.0))
        };
        let (ta, tb) = match it % 3 {
            0 => (perturb(&a, &mut rng), b.clone()),
            1 => (a.clone(), perturb(&b, &mut rng)),
            _ => (perturb(&a, &mut rng), perturb(&b, &mut rng)),
        };
        let value = eval.entropy(&ta, &tb, Entropy::VonNeumann)?;
        if value > best {
            best = value;
            a = ta;
            b = tb;
            sigma = (sigma * 1.5).min(1.0);
        } else {
            sigma = (sigma * 0.85).max(1e-7);
        }
    }
    Ok((best, a, b))
}

/// Lower bound on the maximal von Neumann entanglement a gate creates from
/// product inputs, by local ascent from structured and random starts.
///
/// Structured starts pair `|0>`, the uniform superposition `F|0>` and, with
/// ancillas, the maximally entangled state on each factor.
pub fn max_entanglement_estimate(
    u: &MultipartiteOperator,
    assisted: bool,
    config: MaxSearchConfig,
) -> Result<MaxEntanglement> {
    let eval = ProductEvaluator::new(u, assisted)?;
    let lf = structured_factors(eval.left, assisted)?;
    let rf = structured_factors(eval.right, assisted)?;
    let mut starts: Vec<Option<(CVector, CVector)>> = Vec::new();
    for a in &lf {
        for b in &rf {
            starts.push(Some((a.clone(), b.clone())));
        }
    }
    starts.extend((0..config.restarts).map(|_| None));
    let runs = map_indexed(config.execution, starts.len(), |k| {
        let (a, b) = match &starts[k] {
            Some(pair) => pair.clone(),
            None => {
                let mut rng = stream(config.seed, (starts.len() + k) as u64);
                (
                    haar_vector(eval.left, &mut rng),
                    haar_vector(eval.right, &mut rng),
                )
            }
        };
        hill_climb(&eval, a, b, config.iterations, config.seed, k as u64)
    });
    let mut best: Option<(f64, CVector, CVector)> = None;
    for run in runs {
        let run = run?;
        if best.as_ref().is_none_or(|b| run.0 > b.0) {
            best = Some(run);
        }
    }
    let (_, a, b) = best.expect("at least one start");
    let dims = |n: usize| -> Vec<usize> {
        if assisted {
            let d = (n as f64).sqrt().round() as usize;
            vec![d, d]
        } else {
            vec![n]
        }
    };
    let left = PureState::normalized(a, dims(eval.left))?;
    let right = PureState::normalized(b, dims(eval.right))?;
    let value = eval.entropy(left.amplitudes(), right.amplitudes(), Entropy::VonNeumann)?;
    Ok(MaxEntanglement { value, left, right })
}

/// Recomputes the von Neumann entropy generated from a stored witness.
pub fn witness_entropy(
    u: &MultipartiteOperator,
    assisted: bool,
    witness: &MaxEntanglement,
) -> Result<f64> {
    let eval = ProductEvaluator::new(u, assisted)?;
    eval.entropy(
        witness.left.amplitudes(),
        witness.right.amplitudes(),
        Entropy::VonNeumann,
    )
}

/// Gates with tabulated closed forms. CPHASE shares the SUM row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClosedGate {
    Sum,
    Dsum,
    Swap,
    Cphase,
}

impl ClosedGate {
    pub const ALL: [ClosedGate; 4] = [
        ClosedGate::Sum,
        ClosedGate::Dsum,
        ClosedGate::Swap,
        ClosedGate::Cphase,
    ];

    pub fn from_kind(kind: &GateKind) -> Result<Self> {
        match kind {
            GateKind::Sum(_) => Ok(ClosedGate::Sum),
            GateKind::Dsum => Ok(ClosedGate::Dsum),
            GateKind::Swap => Ok(ClosedGate::Swap),
            GateKind::Cphase => Ok(ClosedGate::Cphase),
            other => Err(Error::UnsupportedGate(format!(
                "no closed form for {other}"
            ))),
        }
    }

    pub fn kind(&self) -> GateKind {
        match self {
            ClosedGate::Sum => GateKind::Sum(crate::gates::Direction::FirstControls),
            ClosedGate::Dsum => GateKind::Dsum,
            ClosedGate::Swap => GateKind::Swap,
            ClosedGate::Cphase => GateKind::Cphase,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClosedGate::Sum => "sum",
            ClosedGate::Dsum => "dsum",
            ClosedGate::Swap => "swap",
            ClosedGate::Cphase => "cphase",
        }
    }
}

/// Largest `d` for which the closed forms are evaluated exactly.
pub const CLOSED_FORM_MAX_D: usize = 1 << 20;

/// An exact rational value of a tabulated power or operator entanglement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClosedForm {
    pub gate: ClosedGate,
    pub d: usize,
    pub assisted: bool,
    pub value: Ratio<i128>,
}

impl ClosedForm {
    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(self.value)
    }

    /// `-ln(1 - e)` from the exact complement `(q - p) / q`.
    pub fn bar(&self) -> Result<f64> {
        let (p, q) = (*self.value.numer(), *self.value.denom());
        if p < 0 || p >= q {
            return Err(Error::Domain(self.to_f64()));
        }
        Ok((q as f64).ln() - ((q - p) as f64).ln())
    }
}

pub fn ratio_to_f64(r: Ratio<i128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn closed_dim(d: usize) -> Result<i128> {
    if !(2..=CLOSED_FORM_MAX_D).contains(&d) {
        return Err(Error::InvalidDims(format!(
            "closed forms need 2 <= d <= {CLOSED_FORM_MAX_D}, got {d}"
        )));
    }
    Ok(d as i128)
}

/// Tabulated linear-entropy entangling power.
pub fn closed_form_power(gate: ClosedGate, d: usize, assisted: bool) -> Result<ClosedForm> {
    let n = closed_dim(d)?;
    let (sq, sq1) = (n * n, n * n + 1);
    let value = match (gate, assisted) {
        (ClosedGate::Sum | ClosedGate::Cphase | ClosedGate::Dsum, false) => {
            Ratio::new(n * (n - 1), (n + 1) * (n + 1))
        }
        (ClosedGate::Sum | ClosedGate::Cphase, true) => Ratio::new(n * sq * (n - 1), sq1 * sq1),
        (ClosedGate::Dsum, true) => Ratio::new(sq * sq - sq - n + 1, sq1 * sq1),
        (ClosedGate::Swap, false) => Ratio::from_integer(0),
        (ClosedGate::Swap, true) => Ratio::new((sq - 1) * (sq - 1), sq1 * sq1),
    };
    Ok(ClosedForm {
        gate,
        d,
        assisted,
        value,
    })
}

/// Tabulated linear operator entanglement.
pub fn closed_form_operator_entanglement(gate: ClosedGate, d: usize) -> Result<Ratio<i128>> {
    let n = closed_dim(d)?;
    Ok(match gate {
        ClosedGate::Sum | ClosedGate::Cphase => Ratio::new(n - 1, n),
        ClosedGate::Dsum | ClosedGate::Swap => Ratio::new(n * n - 1, n * n),
    })
}

/// One pass/fail comparison inside a verification report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub computed: f64,
    pub expected: f64,
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, computed: f64, expected: f64, tolerance: f64) -> Self {
        let deviation = (computed - expected).abs();
        Self {
            name: name.into(),
            computed,
            expected,
            deviation,
            tolerance,
            pass: deviation <= tolerance,
        }
    }

    /// Passes when `computed >= bound - tolerance`; the deviation is the
    /// shortfall.
    pub fn at_least(name: impl Into<String>, computed: f64, bound: f64, tolerance: f64) -> Self {
        let deviation = (bound - computed).max(0.0);
        Self {
            name: name.into(),
            computed,
            expected: bound,
            deviation,
            tolerance,
            pass: deviation <= tolerance,
        }
    }

    /// Passes when `computed <= bound + tolerance`.
    pub fn at_most(name: impl Into<String>, computed: f64, bound: f64, tolerance: f64) -> Self {
        let deviation = (computed - bound).max(0.0);
        Self {
            name: name.into(),
            computed,
            expected: bound,
            deviation,
            tolerance,
            pass: deviation <= tolerance,
        }
    }
}

/// Tolerance of the proportionality checks.
pub const PROPORTIONALITY_TOL: f64 = 1e-10;

/// Proportionality of both entangling powers to the operator entanglement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProportionalityReport {
    pub d: usize,
    /// Whether the input was given as a controlled gate.
    pub controlled: bool,
    pub operator_entanglement: f64,
    pub ep: f64,
    pub ep_assisted: f64,
    pub checks: Vec<Check>,
}

impl ProportionalityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Checks `e_p = (d/(d+1))^2 E`, `e_p^anc = (d^2/(d^2+1))^2 E`, their ratio,
/// `E(U S_12) = 1 - 1/d^2` and `E(W S_13 S_24) = 1 - 1/d^4`.
///
/// All five hold for every controlled-U gate; other gates are reported
/// with whichever checks fail.
pub fn proportionality_check(u: &MultipartiteOperator) -> Result<ProportionalityReport> {
    proportionality(u, false)
}

/// [`proportionality_check`] for a controlled-U gate.
pub fn prop1_check(gate: &ControlledGate) -> Result<ProportionalityReport> {
    proportionality(&gate.operator(), true)
}

fn proportionality(u: &MultipartiteOperator, controlled: bool) -> Result<ProportionalityReport> {
    let d = square_dim(u)?;
    let df = d as f64;
    let dd = df * df;
    let tol = PROPORTIONALITY_TOL;
    let e = linear_operator_entanglement(u, &two_qudit_cut())?;
    let ep = ep_unassisted_schmidt(u)?;
    let ep_anc = ep_assisted_schmidt(u)?;
    let e_us = linear_operator_entanglement(&u.mul(&swap(d)?)?, &two_qudit_cut())?;
    let e_ws = assisted_swap_entanglement(u)?;
    let ratio_expected = ((dd + df) / (dd + 1.0)).powi(2);
    let ratio_check = if ep.abs() > 1e-8 {
        Check::new(
            "assisted/unassisted ratio",
            ep_anc / ep,
            ratio_expected,
            tol,
        )
    } else {
        Check::new(
            "assisted/unassisted ratio (scaled)",
            ep_anc,
            ratio_expected * ep,
            tol,
        )
    };
    let checks = vec![
        Check::new(
            "unassisted power vs operator entanglement",
            ep * ((df + 1.0) / df).powi(2),
            e,
            tol,
        ),
        Check::new(
            "assisted power vs operator entanglement",
            ep_anc * ((dd + 1.0) / dd).powi(2),
            e,
            tol,
        ),
        ratio_check,
        Check::new("E(U S12)", e_us, 1.0 - 1.0 / dd, tol),
        Check::new("E(W S13 S24)", e_ws, 1.0 - 1.0 / (dd * dd), tol),
    ];
    Ok(ProportionalityReport {
        d,
        controlled,
        operator_entanglement: e,
        ep,
        ep_assisted: ep_anc,
        checks,
    })
}

/// [`prop1_check`] on `trials` controlled gates with Haar-random blocks;
/// trial `i` draws its blocks from `stream(seed, i)`.
pub fn prop1_trials(
    d: usize,
    trials: usize,
    seed: u64,
    execution: Execution,
) -> Result<Vec<ProportionalityReport>> {
    map_indexed(execution, trials, |i| {
        let mut rng = stream(seed, i as u64);
        prop1_check(&ControlledGate::random_haar(d, &mut rng)?)
    })
    .into_iter()
    .collect()
}

/// Largest `d` accepted by [`asymptotic_table`].
pub const ASYMPTOTIC_MAX_D: usize = 64;

/// Exact bar-power of one gate at one dimension against its large-`d`
/// leading term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRow {
    pub gate: ClosedGate,
    pub assisted: bool,
    pub d: usize,
    pub value: f64,
    pub leading: f64,
    pub residual: f64,
    /// Bound on `|residual|` at this `d`.
    pub bound: f64,
    pub within_bound: bool,
    /// `|residual|` strictly below the previous row of the same series;
    /// absent for the first row. Identically zero series count as shrinking.
    pub shrinking: Option<bool>,
}

/// Leading term and residual bound of `-ln(1 - e)` at dimension `d`.
pub fn leading_term(gate: ClosedGate, assisted: bool, d: usize) -> (f64, f64) {
    let (l, df) = ((d as f64).ln(), d as f64);
    match (gate, assisted) {
        (ClosedGate::Sum | ClosedGate::Cphase | ClosedGate::Dsum, false) => {
            (l - 3f64.ln(), 2.0 / df)
        }
        (ClosedGate::Sum | ClosedGate::Cphase, true) => (l, 3.0 / df),
        (ClosedGate::Dsum, true) => (2.0 * l - 3f64.ln(), 3.0 / df),
        (ClosedGate::Swap, false) => (0.0, 0.0),
        (ClosedGate::Swap, true) => (2.0 * l - 4f64.ln(), 4.0 / (df * df)),
    }
}

/// Rows for every gate, both settings and every `d` (ascending, at most
/// [`ASYMPTOTIC_MAX_D`]). Only closed forms are evaluated.
pub fn asymptotic_table(gates: &[ClosedGate], ds: &[usize]) -> Result<Vec<AsymptoticRow>> {
    if ds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!(
            "dimensions {ds:?} not strictly ascending"
        )));
    }
    if let Some(&d) = ds.iter().find(|&&d| !(2..=ASYMPTOTIC_MAX_D).contains(&d)) {
        return Err(Error::InvalidDims(format!(
            "asymptotic table needs 2 <= d <= {ASYMPTOTIC_MAX_D}, got {d}"
        )));
    }
    let mut rows = Vec::new();
    for &gate in gates {
        for assisted in [false, true] {
            let mut previous: Option<f64> = None;
            for &d in ds {
                let value = closed_form_power(gate, d, assisted)?.bar()?;
                let (leading, bound) = leading_term(gate, assisted, d);
                let residual = value - leading;
                let shrinking =
                    previous.map(|p| residual.abs() < p.abs() || (residual == 0.0 && p == 0.0));
                previous = Some(residual);
                rows.push(AsymptoticRow {
                    gate,
                    assisted,
                    d,
                    value,
                    leading,
                    residual,
                    bound,
                    within_bound: residual.abs() <= bound,
                    shrinking,
                });
            }
        }
    }
    Ok(rows)
}

/// One computed entangling power with its provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerReport {
    /// Text form of the gate, as accepted by `GateKind::from_str`.
    pub gate: String,
    pub d: usize,
    pub assisted: bool,
    pub method: Method,
    pub entropy: Entropy,
    pub value: f64,
    pub stderr: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    /// Wall time, recorded only when requested.
    pub runtime_ms: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PowerOptions {
    pub assisted_cap: usize,
    pub samples: usize,
    pub seed: u64,
    pub execution: Execution,
    pub timing: bool,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            assisted_cap: DEFAULT_ASSISTED_CAP,
            samples: 20_000,
            seed: 0,
            execution: Execution::Parallel,
            timing: false,
        }
    }
}

/// Computes one entangling power of `spec` with the requested method.
///
/// Exact routes and closed forms give linear or bar values; Monte Carlo gives
/// linear or von Neumann estimates.
pub fn compute_power(
    spec: &GateSpec,
    assisted: bool,
    method: Method,
    entropy: Entropy,
    options: &PowerOptions,
) -> Result<PowerReport> {
    let start = Instant::now();
    let mut stderr = None;
    let mut samples = None;
    let mut seed = None;
    let value = match method {
        Method::ClosedForm => {
            let cf = closed_form_power(ClosedGate::from_kind(&spec.kind)?, spec.d, assisted)?;
            match entropy {
                Entropy::Linear => cf.to_f64(),
                Entropy::Bar => cf.bar()?,
                Entropy::VonNeumann => return Err(no_exact_von_neumann()),
            }
        }
        Method::Trace | Method::Schmidt => {
            let u = spec.two_qudit()?;
            let e = match (method, assisted) {
                (Method::Trace, false) => ep_unassisted_trace(&u)?,
                (Method::Trace, true) => ep_assisted_trace(&u, options.assisted_cap)?,
                (_, false) => ep_unassisted_schmidt(&u)?,
                (_, true) => ep_assisted_schmidt(&u)?,
            };
            match entropy {
                Entropy::Linear => e,
                Entropy::Bar => bar_transform(e)?,
                Entropy::VonNeumann => return Err(no_exact_von_neumann()),
            }
        }
        Method::MonteCarlo => {
            let u = spec.two_qudit()?;
            let est = ep_monte_carlo(
                &u,
                assisted,
                entropy,
                MonteCarloConfig {
                    samples: options.samples,
                    seed: options.seed,
                    execution: options.execution,
                },
            )?;
            stderr = Some(est.stderr);
            samples = Some(est.samples);
            seed = Some(est.seed);
            est.mean
        }
    };
    Ok(PowerReport {
        gate: spec.kind.to_string(),
        d: spec.d,
        assisted,
        method,
        entropy,
        value,
        stderr,
        samples,
        seed,
        runtime_ms: options.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
    })
}

fn no_exact_von_neumann() -> Error {
    Error::InvalidArgument("von Neumann powers are available only by Monte Carlo".into())
}
