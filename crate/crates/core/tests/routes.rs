use std::time::Instant;

use entpower::gates::{cphase, dsum, sum_gate, swap, swap_pairs, ControlledGate, Direction};
use entpower::opent::{assisted_cut, linear_operator_entanglement, two_qudit_cut};
use entpower::power::{
    assisted_embedding, assisted_swap_entanglement, bar_transform, closed_form_power,
    ep_assisted_schmidt, ep_assisted_trace, ep_monte_carlo, ep_unassisted_schmidt,
    ep_unassisted_trace, max_entanglement_estimate, prop1_check, ClosedGate, Entropy,
    MaxSearchConfig, MonteCarloConfig, DEFAULT_ASSISTED_CAP,
};
use entpower::random::{haar_unitary, seeded};
use entpower::{Execution, MultipartiteOperator};

fn named(d: usize) -> Vec<(&'static str, MultipartiteOperator)> {
    vec![
        ("sum", sum_gate(d, Direction::FirstControls).unwrap()),
        ("dsum", dsum(d).unwrap()),
        ("swap", swap(d).unwrap()),
        ("cphase", cphase(d).unwrap()),
    ]
}

#[test]
fn named_gates_match_closed_forms() {
    for d in 2..=5 {
        for (name, u) in named(d) {
            let gate: ClosedGate = match name {
                "sum" => ClosedGate::Sum,
                "dsum" => ClosedGate::Dsum,
                "swap" => ClosedGate::Swap,
                _ => ClosedGate::Cphase,
            };
            let ep = closed_form_power(gate, d, false).unwrap().to_f64();
            let anc = closed_form_power(gate, d, true).unwrap().to_f64();
            assert!(
                (ep_unassisted_schmidt(&u).unwrap() - ep).abs() < 1e-10,
                "{name} d={d}"
            );
            assert!(
                (ep_assisted_schmidt(&u).unwrap() - anc).abs() < 1e-10,
                "{name} d={d}"
            );
            assert!(
                (ep_unassisted_trace(&u).unwrap() - ep).abs() < 1e-10,
                "{name} d={d}"
            );
        }
    }
}

#[test]
fn dsum_and_sum_share_unassisted_power() {
    for d in 2..=4 {
        let a = ep_unassisted_schmidt(&dsum(d).unwrap()).unwrap();
        let b = ep_unassisted_schmidt(&sum_gate(d, Direction::FirstControls).unwrap()).unwrap();
        assert!((a - b).abs() < 1e-10);
        let cut = two_qudit_cut();
        let e1 = linear_operator_entanglement(&dsum(d).unwrap(), &cut).unwrap();
        let e2 = linear_operator_entanglement(&swap(d).unwrap(), &cut).unwrap();
        assert!((e1 - e2).abs() < 1e-10);
    }
}

#[test]
fn assisted_routes_agree_on_controlled_gates() {
    let mut rng = seeded(90);
    for d in [2, 3] {
        for _ in 0..5 {
            let u = ControlledGate::random_haar(d, &mut rng).unwrap().operator();
            let a = ep_assisted_trace(&u, DEFAULT_ASSISTED_CAP).unwrap();
            let b = ep_assisted_schmidt(&u).unwrap();
            assert!((a - b).abs() < 1e-10, "d={d}: {a} vs {b}");
        }
    }
    let u = haar_unitary(&[2, 2], &mut rng).unwrap();
    let a = ep_assisted_trace(&u, DEFAULT_ASSISTED_CAP).unwrap();
    let b = ep_assisted_schmidt(&u).unwrap();
    assert!((a - b).abs() < 1e-10);
}

#[test]
fn assisted_trace_cap_extends_to_four() {
    let u = sum_gate(4, Direction::FirstControls).unwrap();
    let start = Instant::now();
    let a = ep_assisted_trace(&u, 4).unwrap();
    assert!((a - ep_assisted_schmidt(&u).unwrap()).abs() < 1e-10);
    eprintln!("assisted trace at d=4: {:?}", start.elapsed());
}

#[test]
fn orthogonal_block_controlled_gates_match_sum() {
    let mut rng = seeded(91);
    for d in 2..=4 {
        let sum = ep_unassisted_schmidt(&sum_gate(d, Direction::FirstControls).unwrap()).unwrap();
        for _ in 0..5 {
            let g = ControlledGate::random_orthogonal(d, &mut rng).unwrap();
            let ep = ep_unassisted_schmidt(&g.operator()).unwrap();
            assert!((ep - sum).abs() < 1e-10, "d={d}: {ep} vs {sum}");
        }
    }
}

#[test]
fn proportionality_at_four() {
    let mut rng = seeded(92);
    let start = Instant::now();
    for _ in 0..5 {
        let g = ControlledGate::random_haar(4, &mut rng).unwrap();
        assert!(prop1_check(&g).unwrap().passed());
    }
    eprintln!("5 proportionality checks at d=4: {:?}", start.elapsed());
}

#[test]
fn structured_assisted_swap_term_matches_generic_route_at_four() {
    let mut rng = seeded(93);
    let u = ControlledGate::random_haar(4, &mut rng).unwrap().operator();
    let w = assisted_embedding(&u).unwrap();
    let s = swap_pairs(&[4; 4], (0, 2), (1, 3)).unwrap();
    let generic = linear_operator_entanglement(&w.mul(&s).unwrap(), &assisted_cut()).unwrap();
    assert!((generic - assisted_swap_entanglement(&u).unwrap()).abs() < 1e-10);
    assert!((generic - (1.0 - 4f64.powi(-4))).abs() < 1e-10);
}

#[test]
fn inequality_chain_for_sum() {
    let u = sum_gate(2, Direction::FirstControls).unwrap();
    let cfg = MonteCarloConfig {
        samples: 5000,
        seed: 12,
        execution: Execution::Parallel,
    };
    let vn = ep_monte_carlo(&u, false, Entropy::VonNeumann, cfg).unwrap();
    let bar = bar_transform(ep_unassisted_trace(&u).unwrap()).unwrap();
    let max = max_entanglement_estimate(&u, false, MaxSearchConfig::default()).unwrap();
    assert!(vn.mean + 5.0 * vn.stderr >= bar);
    assert!(bar >= ep_unassisted_trace(&u).unwrap());
    assert!(vn.mean <= max.value + 1e-9);
}
