//! Verification suites behind `entpower verify`.

use clap::ValueEnum;
use serde::Serialize;

use entpower::gates::{
    cphase, dsum, fourier, gate_distance, power, sum_gate, swap, Comparison, ControlledGate,
    Direction, GateSpec,
};
use entpower::opent::{
    linear_op_ent_via_trace, linear_operator_entanglement, two_qudit_cut, SpinCurve, ThetaGrid,
};
use entpower::power::{
    bar_transform, ep_assisted_schmidt, ep_assisted_trace, ep_monte_carlo, ep_unassisted_schmidt,
    ep_unassisted_trace, max_entanglement_estimate, prop1_trials, proportionality_check,
    witness_entropy, Check, Entropy, MaxSearchConfig, MonteCarloConfig,
};
use entpower::random::{haar_unitary, stream};
use entpower::tensor::kron;
use entpower::{Execution, MultipartiteOperator, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Prop1,
    Identities,
    Bounds,
    Routes,
    Spin,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Prop1 => "prop1",
            Suite::Identities => "identities",
            Suite::Bounds => "bounds",
            Suite::Routes => "routes",
            Suite::Spin => "spin",
        }
    }

    /// Whether the suite draws random gates or samples.
    pub fn is_stochastic(&self) -> bool {
        !matches!(self, Suite::Spin)
    }

    pub fn default_dims(&self) -> Vec<usize> {
        match self {
            Suite::Prop1 => vec![3],
            Suite::Identities => vec![4],
            Suite::Bounds => vec![2],
            Suite::Routes => vec![2, 3],
            Suite::Spin => vec![2, 3, 4, 5],
        }
    }
}

pub const VERIFY_HEADER: [&str; 9] = [
    "suite",
    "check",
    "d",
    "computed",
    "expected",
    "deviation",
    "tolerance",
    "pass",
    "seed",
];

#[derive(Clone, Debug, Serialize)]
pub struct VerifyRow {
    pub suite: &'static str,
    pub check: String,
    pub d: usize,
    pub computed: f64,
    pub expected: f64,
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub seed: Option<u64>,
}

pub struct VerifyParams {
    pub dims: Vec<usize>,
    pub trials: usize,
    pub controlled_trials: usize,
    pub seed: u64,
    pub gate: Option<GateSpec>,
    pub samples: usize,
    pub points: usize,
    pub assisted_cap: usize,
    /// Replaces the default tolerance of every equality check.
    pub tolerance: Option<f64>,
    pub execution: Execution,
}

struct Collector {
    suite: &'static str,
    seed: Option<u64>,
    tolerance: Option<f64>,
    rows: Vec<VerifyRow>,
}

impl Collector {
    fn push(&mut self, d: usize, check: Check) {
        self.rows.push(VerifyRow {
            suite: self.suite,
            check: check.name,
            d,
            computed: check.computed,
            expected: check.expected,
            deviation: check.deviation,
            tolerance: check.tolerance,
            pass: check.pass,
            seed: self.seed,
        });
    }

    fn equal(&mut self, d: usize, name: impl Into<String>, computed: f64, expected: f64, tol: f64) {
        let tol = self.tolerance.unwrap_or(tol);
        self.push(d, Check::new(name, computed, expected, tol));
    }
}

fn trial_rng(seed: u64, d: usize, i: usize) -> entpower::random::SampleRng {
    stream(seed, ((d as u64) << 32) | i as u64)
}

pub fn run(suite: Suite, params: &VerifyParams) -> Result<Vec<VerifyRow>> {
    let mut c = Collector {
        suite: suite.name(),
        seed: suite.is_stochastic().then_some(params.seed),
        tolerance: params.tolerance,
        rows: Vec::new(),
    };
    for &d in &params.dims {
        match suite {
            Suite::Prop1 => prop1(&mut c, d, params)?,
            Suite::Identities => identities(&mut c, d, params)?,
            Suite::Bounds => bounds(&mut c, d, params)?,
            Suite::Routes => routes(&mut c, d, params)?,
            Suite::Spin => spin(&mut c, d, params)?,
        }
    }
    Ok(c.rows)
}

fn prop1(c: &mut Collector, d: usize, p: &VerifyParams) -> Result<()> {
    if let Some(spec) = &p.gate {
        let report = proportionality_check(&spec.two_qudit()?)?;
        for check in report.checks {
            c.equal(
                d,
                format!("{}: {}", spec.kind, check.name),
                check.computed,
                check.expected,
                check.tolerance,
            );
        }
        return Ok(());
    }
    for (i, report) in prop1_trials(d, p.trials, p.seed, p.execution)?
        .into_iter()
        .enumerate()
    {
        for check in report.checks {
            c.equal(
                d,
                format!("trial {i}: {}", check.name),
                check.computed,
                check.expected,
                check.tolerance,
            );
        }
    }
    Ok(())
}

fn identities(c: &mut Collector, d: usize, p: &VerifyParams) -> Result<()> {
    let f = fourier(d)?;
    let id = MultipartiteOperator::identity(&[d])?;
    let sum = sum_gate(d, Direction::FirstControls)?;
    let conj =
        MultipartiteOperator::chain([&kron(&id, &f.adjoint()), &cphase(d)?, &kron(&id, &f)])?;
    c.equal(
        d,
        "SUM = (I x F^-1) CPHASE (I x F)",
        gate_distance(&sum, &conj, Comparison::UpToGlobalPhase),
        0.0,
        1e-12,
    );
    let from_sums = MultipartiteOperator::chain([&kron(&power(&f, 2), &id), &sum, &dsum(d)?])?;
    c.equal(
        d,
        "SWAP = (F^2 x I) SUM DSUM",
        gate_distance(&swap(d)?, &from_sums, Comparison::UpToGlobalPhase),
        0.0,
        1e-12,
    );
    let cut = two_qudit_cut();
    let mut worst: f64 = 0.0;
    for i in 0..p.trials {
        let u = haar_unitary(&[d, d], &mut trial_rng(p.seed, d, i))?;
        let e = linear_operator_entanglement(&u, &cut)?;
        let e_dag = linear_operator_entanglement(&u.adjoint(), &cut)?;
        worst = worst.max((e - e_dag).abs());
    }
    c.equal(
        d,
        format!("E(U) = E(U^dagger), worst of {} unitaries", p.trials),
        worst,
        0.0,
        1e-10,
    );
    let mut rng = trial_rng(p.seed, d, p.trials);
    let a = haar_unitary(&[d], &mut rng)?;
    let b = haar_unitary(&[d], &mut rng)?;
    let s = swap(d)?;
    let lhs = kron(&a, &b).mul(&s)?;
    let rhs = s.mul(&kron(&b, &a))?;
    c.equal(
        d,
        "(A x B) S12 = S12 (B x A)",
        lhs.max_abs_diff(&rhs),
        0.0,
        0.0,
    );
    Ok(())
}

fn bounds(c: &mut Collector, d: usize, p: &VerifyParams) -> Result<()> {
    let spec = match &p.gate {
        Some(spec) => GateSpec::new(spec.kind.clone(), d)?,
        None => GateSpec::new(entpower::gates::GateKind::Sum(Direction::FirstControls), d)?,
    };
    let u = spec.two_qudit()?;
    let ln_d = (d as f64).ln();
    for assisted in [false, true] {
        let tag = if assisted { "assisted" } else { "unassisted" };
        let e = if assisted {
            ep_assisted_schmidt(&u)?
        } else {
            ep_unassisted_schmidt(&u)?
        };
        let bar = bar_transform(e)?;
        let mc = ep_monte_carlo(
            &u,
            assisted,
            Entropy::VonNeumann,
            MonteCarloConfig {
                samples: p.samples,
                seed: p.seed,
                execution: p.execution,
            },
        )?;
        let max = max_entanglement_estimate(
            &u,
            assisted,
            MaxSearchConfig {
                seed: p.seed,
                execution: p.execution,
                ..MaxSearchConfig::default()
            },
        )?;
        let cap = if assisted { 2.0 * ln_d } else { ln_d };
        c.push(
            d,
            Check::at_least(
                format!("{spec} {tag}: bar power >= linear power"),
                bar,
                e,
                0.0,
            ),
        );
        c.push(
            d,
            Check::at_least(
                format!("{spec} {tag}: von Neumann estimate + 5 stderr >= bar power"),
                mc.mean + 5.0 * mc.stderr,
                bar,
                0.0,
            ),
        );
        c.push(
            d,
            Check::at_most(
                format!("{spec} {tag}: von Neumann estimate <= max entanglement"),
                mc.mean,
                max.value,
                1e-9,
            ),
        );
        c.push(
            d,
            Check::at_most(
                format!("{spec} {tag}: max entanglement <= state capacity"),
                max.value,
                cap,
                1e-12,
            ),
        );
        c.equal(
            d,
            format!("{spec} {tag}: witness reproduces max entanglement"),
            witness_entropy(&u, assisted, &max)?,
            max.value,
            0.0,
        );
    }
    Ok(())
}

fn routes(c: &mut Collector, d: usize, p: &VerifyParams) -> Result<()> {
    let cut = two_qudit_cut();
    let named = [
        ("sum", sum_gate(d, Direction::FirstControls)?),
        ("dsum", dsum(d)?),
        ("swap", swap(d)?),
        ("cphase", cphase(d)?),
    ];
    let assisted_ok = d <= p.assisted_cap;
    for (name, u) in &named {
        c.equal(
            d,
            format!("{name}: unassisted trace vs schmidt"),
            ep_unassisted_trace(u)?,
            ep_unassisted_schmidt(u)?,
            1e-10,
        );
        c.equal(
            d,
            format!("{name}: operator entanglement trace vs svd"),
            linear_op_ent_via_trace(u, &cut)?,
            linear_operator_entanglement(u, &cut)?,
            1e-10,
        );
        if assisted_ok {
            c.equal(
                d,
                format!("{name}: assisted trace vs schmidt"),
                ep_assisted_trace(u, p.assisted_cap)?,
                ep_assisted_schmidt(u)?,
                1e-10,
            );
        }
    }
    let mut worst: f64 = 0.0;
    let mut worst_op: f64 = 0.0;
    for i in 0..p.trials {
        let u = haar_unitary(&[d, d], &mut trial_rng(p.seed, d, i))?;
        worst = worst.max((ep_unassisted_trace(&u)? - ep_unassisted_schmidt(&u)?).abs());
        worst_op = worst_op.max(
            (linear_op_ent_via_trace(&u, &cut)? - linear_operator_entanglement(&u, &cut)?).abs(),
        );
    }
    c.equal(
        d,
        format!(
            "unassisted trace vs schmidt, worst of {} unitaries",
            p.trials
        ),
        worst,
        0.0,
        1e-10,
    );
    c.equal(
        d,
        format!(
            "operator entanglement trace vs svd, worst of {} unitaries",
            p.trials
        ),
        worst_op,
        0.0,
        1e-10,
    );
    if assisted_ok {
        let mut worst: f64 = 0.0;
        for i in 0..p.controlled_trials {
            let g = ControlledGate::random_haar(d, &mut trial_rng(p.seed, d, p.trials + i))?;
            let u = g.operator();
            worst = worst
                .max((ep_assisted_trace(&u, p.assisted_cap)? - ep_assisted_schmidt(&u)?).abs());
        }
        c.equal(
            d,
            format!(
                "assisted trace vs schmidt, worst of {} controlled gates",
                p.controlled_trials
            ),
            worst,
            0.0,
            1e-10,
        );
    }
    Ok(())
}

fn spin(c: &mut Collector, d: usize, p: &VerifyParams) -> Result<()> {
    let grid = ThetaGrid::new(p.points)?;
    let curve = SpinCurve::scan(d, grid, p.execution)?;
    if d == 2 {
        let worst = (0..grid.points)
            .map(|k| (curve.values[k] - 0.5 * (grid.theta(k) / 2.0).sin().powi(2)).abs())
            .fold(0.0, f64::max);
        c.equal(
            d,
            "E(theta) = sin^2(theta/2)/2 on the grid",
            worst,
            0.0,
            1e-10,
        );
    }
    let last = curve.values[grid.points - 1];
    c.equal(
        d,
        "periodic at the grid endpoints",
        curve.values[0] - last,
        0.0,
        1e-12,
    );
    c.equal(d, "E(0) = 0", curve.values[0], 0.0, 1e-12);
    let target = std::f64::consts::TAU / d as f64;
    let maxima = curve.maxima()?;
    let first = maxima.first();
    c.equal(
        d,
        "first maximum at the grid point nearest 2 pi/d",
        first.map_or(f64::INFINITY, |m| m.grid_index as f64),
        grid.nearest_index(target) as f64,
        0.0,
    );
    c.equal(
        d,
        "first maximum value = 1 - 1/d",
        first.map_or(f64::INFINITY, |m| m.value),
        1.0 - 1.0 / d as f64,
        1e-8,
    );
    Ok(())
}
