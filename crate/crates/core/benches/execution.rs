use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use entpower::gates::{sum_gate, Direction};
use entpower::opent::{SpinCurve, ThetaGrid};
use entpower::power::{ep_monte_carlo, prop1_trials, Entropy, MonteCarloConfig};
use entpower::Execution;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn monte_carlo(c: &mut Criterion) {
    let u = sum_gate(3, Direction::FirstControls).unwrap();
    let mut group = c.benchmark_group("monte_carlo_sum_d3_assisted");
    group.sample_size(10);
    for (name, execution) in MODES {
        let cfg = MonteCarloConfig {
            samples: 2000,
            seed: 1,
            execution,
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| ep_monte_carlo(&u, true, Entropy::Linear, cfg).unwrap())
        });
    }
    group.finish();
}

fn spin_scan(c: &mut Criterion) {
    let mut group = c.benchmark_group("spin_scan_d5");
    group.sample_size(10);
    for (name, execution) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| SpinCurve::scan(5, ThetaGrid::default(), execution).unwrap())
        });
    }
    group.finish();
}

fn random_trials(c: &mut Criterion) {
    let mut group = c.benchmark_group("prop1_trials_d3");
    group.sample_size(10);
    for (name, execution) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| prop1_trials(3, 50, 1, execution).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, monte_carlo, spin_scan, random_trials);
criterion_main!(benches);
