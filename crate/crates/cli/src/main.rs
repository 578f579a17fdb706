mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use entpower::gates::{GateKind, GateSpec};
use entpower::opent::{
    linear_op_ent_via_trace, linear_operator_entanglement, two_qudit_cut, SpinCurve, ThetaGrid,
};
use entpower::power::{
    asymptotic_table, closed_form_operator_entanglement, closed_form_power, compute_power,
    ep_assisted_schmidt, ep_assisted_trace, ep_unassisted_schmidt, ep_unassisted_trace,
    ratio_to_f64, ClosedGate, Entropy, Method, PowerOptions, PowerReport, ASYMPTOTIC_MAX_D,
    DEFAULT_ASSISTED_CAP,
};
use entpower::{Error, Execution};

use output::{emit, Format};
use verify::{Suite, VerifyParams, VERIFY_HEADER};

const ROUTE_TOL: f64 = 1e-10;

#[derive(Parser)]
#[command(
    name = "entpower",
    version,
    about = "Entangling power and operator entanglement of two-qudit gates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run everything on the calling thread.
    #[arg(long)]
    sequential: bool,
}

impl OutputArgs {
    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Closed forms of e_p, e_p^anc and E against the computed routes.
    GateTable {
        #[arg(long = "d", value_delimiter = ',', default_value = "2,3,4,5")]
        dims: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_ASSISTED_CAP)]
        assisted_cap: usize,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Operator entanglement of the spin-coupling gate over a theta grid.
    SpinScan {
        #[arg(long = "d", value_delimiter = ',', conflicts_with = "spins")]
        dims: Option<Vec<usize>>,
        /// Spins j, each giving d = 2j + 1.
        #[arg(long, value_delimiter = ',')]
        spins: Option<Vec<f64>>,
        /// Uniform grid points on [0, 2 pi], endpoints included.
        #[arg(long, default_value_t = ThetaGrid::default().points)]
        points: usize,
        /// Also write the detected maxima here.
        #[arg(long)]
        maxima: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// One report per requested method.
    Power {
        #[arg(long)]
        gate: String,
        #[arg(long = "d")]
        d: Option<usize>,
        #[arg(long)]
        assisted: bool,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "schmidt")]
        method: Vec<MethodArg>,
        #[arg(long, value_enum, default_value = "linear")]
        entropy: EntropyArg,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        #[arg(long, env = "ENTPOWER_SEED")]
        seed: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_ASSISTED_CAP)]
        assisted_cap: usize,
        /// Record wall time in runtime_ms (outputs are then no longer reproducible).
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Runs a verification suite; exits 1 if any check fails.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long = "d", value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 20)]
        controlled_trials: usize,
        #[arg(long, env = "ENTPOWER_SEED")]
        seed: Option<u64>,
        #[arg(long)]
        gate: Option<String>,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        #[arg(long, default_value_t = ThetaGrid::default().points)]
        points: usize,
        #[arg(long, default_value_t = DEFAULT_ASSISTED_CAP)]
        assisted_cap: usize,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Bar powers from the closed forms against their large-d leading terms.
    Asymptotics {
        #[arg(
            long,
            value_enum,
            value_delimiter = ',',
            default_value = "sum,dsum,swap"
        )]
        gates: Vec<GateArg>,
        /// Doubles from 8 up to this bound unless --d-list is given.
        #[arg(long, default_value_t = ASYMPTOTIC_MAX_D)]
        d_max: usize,
        #[arg(long, value_delimiter = ',')]
        d_list: Option<Vec<usize>>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Trace,
    Schmidt,
    #[value(alias = "monte-carlo")]
    Mc,
    ClosedForm,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Trace => Method::Trace,
            MethodArg::Schmidt => Method::Schmidt,
            MethodArg::Mc => Method::MonteCarlo,
            MethodArg::ClosedForm => Method::ClosedForm,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EntropyArg {
    Linear,
    VonNeumann,
    Bar,
}

impl From<EntropyArg> for Entropy {
    fn from(e: EntropyArg) -> Self {
        match e {
            EntropyArg::Linear => Entropy::Linear,
            EntropyArg::VonNeumann => Entropy::VonNeumann,
            EntropyArg::Bar => Entropy::Bar,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GateArg {
    Sum,
    Dsum,
    Swap,
    Cphase,
}

impl From<GateArg> for ClosedGate {
    fn from(g: GateArg) -> Self {
        match g {
            GateArg::Sum => ClosedGate::Sum,
            GateArg::Dsum => ClosedGate::Dsum,
            GateArg::Swap => ClosedGate::Swap,
            GateArg::Cphase => ClosedGate::Cphase,
        }
    }
}

enum Failure {
    Tolerance,
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<String> for Failure {
    fn from(e: String) -> Self {
        Failure::Usage(e)
    }
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let nanos = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|t| t.as_nanos() as u64)
            .unwrap_or(0);
        eprintln!("entpower: no seed given, using {nanos}");
        nanos
    })
}

fn parse_gate(text: &str, d: Option<usize>) -> Result<GateSpec, Failure> {
    let kind: GateKind = text.parse()?;
    let d = d
        .or(kind.fixed_dim())
        .ok_or_else(|| Failure::Usage(format!("gate {kind} needs --d")))?;
    Ok(GateSpec::new(kind, d)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Tolerance) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("entpower: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::GateTable {
            dims,
            assisted_cap,
            tol,
            output,
        } => gate_table(&dims, assisted_cap, tol.unwrap_or(ROUTE_TOL), &output),
        Command::SpinScan {
            dims,
            spins,
            points,
            maxima,
            output,
        } => spin_scan(dims, spins, points, maxima, &output),
        Command::Power {
            gate,
            d,
            assisted,
            method,
            entropy,
            samples,
            seed,
            assisted_cap,
            timing,
            output,
        } => {
            let spec = parse_gate(&gate, d)?;
            let needs_seed = method.iter().any(|m| matches!(m, MethodArg::Mc));
            let options = PowerOptions {
                assisted_cap,
                samples,
                seed: if needs_seed {
                    resolve_seed(seed)
                } else {
                    seed.unwrap_or(0)
                },
                execution: output.execution(),
                timing,
            };
            let reports = method
                .into_iter()
                .map(|m| compute_power(&spec, assisted, m.into(), entropy.into(), &options))
                .collect::<Result<Vec<PowerReport>, Error>>()?;
            emit(
                &reports,
                &POWER_HEADER,
                output.format,
                output.out.as_deref(),
            )?;
            Ok(())
        }
        Command::Verify {
            suite,
            dims,
            trials,
            controlled_trials,
            seed,
            gate,
            samples,
            points,
            assisted_cap,
            tol,
            output,
        } => {
            let dims = dims.unwrap_or_else(|| suite.default_dims());
            let gate = match gate {
                Some(text) => Some(parse_gate(&text, dims.first().copied())?),
                None => None,
            };
            let params = VerifyParams {
                dims,
                trials,
                controlled_trials,
                seed: if suite.is_stochastic() {
                    resolve_seed(seed)
                } else {
                    seed.unwrap_or(0)
                },
                gate,
                samples,
                points,
                assisted_cap,
                tolerance: tol,
                execution: output.execution(),
            };
            let rows = verify::run(suite, &params)?;
            emit(&rows, &VERIFY_HEADER, output.format, output.out.as_deref())?;
            let failed = rows.iter().filter(|r| !r.pass).count();
            if failed > 0 {
                eprintln!("entpower: {failed} of {} checks failed", rows.len());
                return Err(Failure::Tolerance);
            }
            Ok(())
        }
        Command::Asymptotics {
            gates,
            d_max,
            d_list,
            output,
        } => {
            if d_max > ASYMPTOTIC_MAX_D {
                return Err(Failure::Usage(format!("--d-max above {ASYMPTOTIC_MAX_D}")));
            }
            let ds = d_list.unwrap_or_else(|| {
                std::iter::successors(Some(8usize), |d| Some(d * 2))
                    .take_while(|&d| d <= d_max)
                    .collect()
            });
            let gates: Vec<ClosedGate> = gates.into_iter().map(Into::into).collect();
            let rows = asymptotic_table(&gates, &ds)?;
            emit(
                &rows,
                &ASYMPTOTIC_HEADER,
                output.format,
                output.out.as_deref(),
            )?;
            if rows.iter().any(|r| !r.within_bound) {
                return Err(Failure::Tolerance);
            }
            Ok(())
        }
    }
}

const POWER_HEADER: [&str; 10] = [
    "gate",
    "d",
    "assisted",
    "method",
    "entropy",
    "value",
    "stderr",
    "samples",
    "seed",
    "runtime_ms",
];

const ASYMPTOTIC_HEADER: [&str; 9] = [
    "gate",
    "assisted",
    "d",
    "value",
    "leading",
    "residual",
    "bound",
    "within_bound",
    "shrinking",
];

#[derive(Serialize)]
struct GateTableRow {
    gate: &'static str,
    d: usize,
    ep_exact: String,
    ep_closed: f64,
    ep_schmidt: f64,
    ep_trace: f64,
    ep_anc_exact: String,
    ep_anc_closed: f64,
    ep_anc_schmidt: f64,
    ep_anc_trace: Option<f64>,
    e_exact: String,
    e_closed: f64,
    e_schmidt: f64,
    e_trace: f64,
    max_deviation: f64,
    note: String,
}

const GATE_TABLE_HEADER: [&str; 16] = [
    "gate",
    "d",
    "ep_exact",
    "ep_closed",
    "ep_schmidt",
    "ep_trace",
    "ep_anc_exact",
    "ep_anc_closed",
    "ep_anc_schmidt",
    "ep_anc_trace",
    "e_exact",
    "e_closed",
    "e_schmidt",
    "e_trace",
    "max_deviation",
    "note",
];

fn gate_table(dims: &[usize], cap: usize, tol: f64, output: &OutputArgs) -> Result<(), Failure> {
    let cut = two_qudit_cut();
    let mut rows = Vec::new();
    for &d in dims {
        for gate in ClosedGate::ALL {
            let u = GateSpec::new(gate.kind(), d)?.two_qudit()?;
            let ep = closed_form_power(gate, d, false)?;
            let anc = closed_form_power(gate, d, true)?;
            let e = closed_form_operator_entanglement(gate, d)?;
            let ep_schmidt = ep_unassisted_schmidt(&u)?;
            let ep_trace = ep_unassisted_trace(&u)?;
            let anc_schmidt = ep_assisted_schmidt(&u)?;
            let (anc_trace, note) = match ep_assisted_trace(&u, cap) {
                Ok(v) => (Some(v), String::new()),
                Err(err @ Error::CapExceeded { .. }) => {
                    (None, format!("assisted trace skipped: {err}"))
                }
                Err(err) => return Err(err.into()),
            };
            let e_schmidt = linear_operator_entanglement(&u, &cut)?;
            let e_trace = linear_op_ent_via_trace(&u, &cut)?;
            let mut deviations = vec![
                (ep_schmidt - ep.to_f64()).abs(),
                (ep_trace - ep.to_f64()).abs(),
                (anc_schmidt - anc.to_f64()).abs(),
                (e_schmidt - ratio_to_f64(e)).abs(),
                (e_trace - ratio_to_f64(e)).abs(),
            ];
            if let Some(t) = anc_trace {
                deviations.push((t - anc.to_f64()).abs());
            }
            rows.push(GateTableRow {
                gate: gate.name(),
                d,
                ep_exact: ep.value.to_string(),
                ep_closed: ep.to_f64(),
                ep_schmidt,
                ep_trace,
                ep_anc_exact: anc.value.to_string(),
                ep_anc_closed: anc.to_f64(),
                ep_anc_schmidt: anc_schmidt,
                ep_anc_trace: anc_trace,
                e_exact: e.to_string(),
                e_closed: ratio_to_f64(e),
                e_schmidt,
                e_trace,
                max_deviation: deviations.into_iter().fold(0.0, f64::max),
                note,
            });
        }
    }
    emit(
        &rows,
        &GATE_TABLE_HEADER,
        output.format,
        output.out.as_deref(),
    )?;
    if rows.iter().any(|r| r.max_deviation > tol) {
        return Err(Failure::Tolerance);
    }
    Ok(())
}

#[derive(Serialize)]
struct SpinRow {
    theta: f64,
    j: f64,
    d: usize,
    #[serde(rename = "E_linear")]
    e_linear: f64,
}

#[derive(Serialize)]
struct MaximumRow {
    d: usize,
    j: f64,
    grid_index: usize,
    grid_theta: f64,
    grid_value: f64,
    theta: f64,
    value: f64,
}

const SPIN_HEADER: [&str; 4] = ["theta", "j", "d", "E_linear"];
const MAXIMA_HEADER: [&str; 7] = [
    "d",
    "j",
    "grid_index",
    "grid_theta",
    "grid_value",
    "theta",
    "value",
];

fn spin_scan(
    dims: Option<Vec<usize>>,
    spins: Option<Vec<f64>>,
    points: usize,
    maxima_out: Option<PathBuf>,
    output: &OutputArgs,
) -> Result<(), Failure> {
    let dims = match (dims, spins) {
        (Some(d), _) => d,
        (None, Some(js)) => js
            .iter()
            .map(|&j| {
                let d = 2.0 * j + 1.0;
                if j > 0.0 && d.fract() == 0.0 {
                    Ok(d as usize)
                } else {
                    Err(Failure::Usage(format!(
                        "spin {j} is not a positive half-integer"
                    )))
                }
            })
            .collect::<Result<_, _>>()?,
        (None, None) => vec![2, 3, 4, 5],
    };
    let grid = ThetaGrid::new(points)?;
    let mut rows = Vec::new();
    let mut maxima = Vec::new();
    for d in dims {
        let curve = SpinCurve::scan(d, grid, output.execution())?;
        let j = curve.spin();
        rows.extend(curve.values.iter().enumerate().map(|(k, &e)| SpinRow {
            theta: grid.theta(k),
            j,
            d,
            e_linear: e,
        }));
        maxima.extend(curve.maxima()?.into_iter().map(|m| MaximumRow {
            d,
            j,
            grid_index: m.grid_index,
            grid_theta: m.grid_theta,
            grid_value: m.grid_value,
            theta: m.theta,
            value: m.value,
        }));
    }
    emit(&rows, &SPIN_HEADER, output.format, output.out.as_deref())?;
    match maxima_out {
        Some(path) => emit(&maxima, &MAXIMA_HEADER, output.format, Some(&path))?,
        None => {
            for m in &maxima {
                eprintln!("maximum d={} theta={} E={}", m.d, m.theta, m.value);
            }
        }
    }
    Ok(())
}
