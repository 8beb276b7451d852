mod common;

use std::path::PathBuf;
use std::time::Duration;

use proptest::prelude::*;
use qmap_core::circuit::{Gate, LogicalCircuit};
use qmap_core::device::{generate_grid, load_device, ErrorModel};
use qmap_core::evaluator::{
    analytic_fidelity, compact_routed, hellinger_fidelity, ideal_distribution, simulate, OutcomeDistribution,
};
use qmap_core::expansion::{expand, select_and_expand};
use qmap_core::region::{recursive_community_fusion, FusionConfig, RegionTriple};
use qmap_core::solver::{solve, solve_regional, validate_solution, RegionalOptions, SolveOptions, SolveOutcome};
use rand::Rng;

fn options() -> SolveOptions {
    SolveOptions {
        time_limit: Some(Duration::from_secs(60)),
        ..SolveOptions::default()
    }
}

#[test]
fn ancilla_joins_the_region() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/small_device.json");
    let g = load_device(path).unwrap();
    let region = expand(&g, &RegionTriple::from_members(&g, vec![0, 6, 1, 8, 2]), 1);
    assert!(region.qubits.contains(&7));
    assert!(region.ancillas().contains(&7));
    assert_eq!(expand(&g, &RegionTriple::from_members(&g, (0..9).collect()), 3).qubits.len(), 9);
}

#[test]
fn regional_layout_stays_inside_the_region() {
    let grid = generate_grid(5, 5, ErrorModel::seeded(31));
    let mut rng = common::rng(31);
    for _ in 0..5 {
        let c = common::random_circuit(&mut rng, 5, 8, 3);
        let run = solve_regional(&c, &grid, &RegionalOptions::default()).unwrap();
        let s = run.outcome.solution().expect("solved").clone();
        validate_solution(&c, &grid, &s).unwrap();
        assert!(s.used_physical().iter().all(|p| run.region.qubits.contains(p)));
        assert_eq!(run.summary.device_qubits, 25);
        assert!(s.stats.solve_graph_qubits < 25);
    }
}

#[test]
fn regional_swaps_never_beat_the_full_graph() {
    // the region is a subgraph, so its optimum can only be worse or equal;
    // equality is the expected case at these sizes
    let mut rng = common::rng(32);
    let mut differing = 0;
    for _ in 0..25 {
        let n_p = rng.gen_range(5..=12);
        let g = common::random_graph(&mut rng, n_p, 0.15, true);
        let n_q = rng.gen_range(2..=5);
        let c = common::random_circuit(&mut rng, n_q, 6, 0);
        let full = solve(&c, &g, &options()).unwrap().solution().unwrap().swap_count();
        let run = solve_regional(&c, &g, &RegionalOptions::default()).unwrap();
        let regional = run.outcome.solution().unwrap().swap_count();
        assert!(regional >= full);
        differing += (regional != full) as usize;
    }
    println!("regional swap count differed from the full graph in {differing}/25 instances");
}

#[test]
fn exact_size_region_still_routes() {
    // k = 0 leaves no ancilla, yet a connected region of n_q qubits always
    // admits swaps, so no retry is needed
    let grid = generate_grid(3, 3, ErrorModel::Uniform(0.01));
    let set = recursive_community_fusion(&grid, &FusionConfig::default()).unwrap();
    let region = select_and_expand(&grid, &set, 3, 0).unwrap();
    assert!(region.num_qubits() >= 3);
    let c = LogicalCircuit::from_pairs(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
    let opts = RegionalOptions {
        expand_k: 0,
        ..RegionalOptions::default()
    };
    let run = solve_regional(&c, &grid, &opts).unwrap();
    assert!(matches!(run.outcome, SolveOutcome::Solved(_)));
    assert!(!run.summary.retried);
}

#[test]
fn noise_lowers_hellinger_fidelity_of_routed_circuits() {
    let grid = generate_grid(3, 3, ErrorModel::Uniform(0.05));
    let mut c = LogicalCircuit::new(4);
    // not a uniform superposition, which every Pauli would leave unchanged
    c.push(Gate::single("x", 0)).unwrap();
    c.push(Gate::single("h", 1)).unwrap();
    for &(a, b) in &[(0, 1), (2, 3), (0, 3), (1, 2), (0, 2)] {
        c.push(Gate::cx(a, b)).unwrap();
    }
    let s = solve(&c, &grid, &options()).unwrap().solution().unwrap().clone();
    let compact = compact_routed(&s, &grid);
    let ideal = simulate(&compact.circuit, None, Some(&compact.measure), 1024, 5).unwrap();
    let noisy = simulate(&compact.circuit, Some(&compact.noise), Some(&compact.measure), 1024, 5).unwrap();
    let hf = hellinger_fidelity(&noisy, &ideal);
    assert!(hf < 1.0 && hf > 0.3, "{hf}");

    // the routed circuit measured through its final layout reproduces the
    // original distribution
    let exact_original = ideal_distribution(&c, None).unwrap();
    let exact_routed = ideal_distribution(&compact.circuit, Some(&compact.measure)).unwrap();
    assert!((hellinger_fidelity(&exact_original, &exact_routed) - 1.0).abs() < 1e-9);

    let f = analytic_fidelity(&s.routed_circuit, &grid).unwrap();
    let expected = 0.95f64.powi((c.two_qubit_count() + 3 * s.swap_count()) as i32);
    assert!((f - expected).abs() < 1e-12);
}

#[test]
fn simulation_is_reproducible_per_seed() {
    let grid = generate_grid(2, 3, ErrorModel::Uniform(0.1));
    let c = LogicalCircuit::from_gates(3, vec![Gate::single("h", 0), Gate::cx(0, 1), Gate::cx(1, 2), Gate::cx(0, 2)])
        .unwrap();
    let s = solve(&c, &grid, &options()).unwrap().solution().unwrap().clone();
    let compact = compact_routed(&s, &grid);
    let a = simulate(&compact.circuit, Some(&compact.noise), Some(&compact.measure), 512, 9).unwrap();
    let b = simulate(&compact.circuit, Some(&compact.noise), Some(&compact.measure), 512, 9).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.shots, 512);
    assert!((a.total() - 1.0).abs() < 1e-9);
}

fn distribution(weights: &[f64]) -> OutcomeDistribution {
    let total: f64 = weights.iter().sum();
    OutcomeDistribution::exact(
        weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(k, w)| (format!("{k:03b}"), w / total))
            .collect(),
    )
}

/// Direct `(1 - 0.5 * sum (sqrt p - sqrt q)^2)^2` over the union support.
fn hellinger_by_definition(p: &OutcomeDistribution, q: &OutcomeDistribution) -> f64 {
    let keys: std::collections::BTreeSet<&String> = p.probabilities.keys().chain(q.probabilities.keys()).collect();
    let sum: f64 = keys.iter().map(|k| (p.get(k).sqrt() - q.get(k).sqrt()).powi(2)).sum();
    (1.0 - 0.5 * sum).powi(2)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn hellinger_properties(
        a in proptest::collection::vec(0.0f64..1.0, 8),
        b in proptest::collection::vec(0.0f64..1.0, 8),
    ) {
        prop_assume!(a.iter().sum::<f64>() > 1e-3 && b.iter().sum::<f64>() > 1e-3);
        let (p, q) = (distribution(&a), distribution(&b));
        let hf = hellinger_fidelity(&p, &q);
        prop_assert!((0.0..=1.0).contains(&hf));
        prop_assert!((hf - hellinger_fidelity(&q, &p)).abs() < 1e-12);
        prop_assert!((hellinger_fidelity(&p, &p) - 1.0).abs() < 1e-12);
        prop_assert!((hf - hellinger_by_definition(&p, &q)).abs() < 1e-9);
    }

    #[test]
    fn analytic_fidelity_falls_with_swaps(extra in 0usize..6, error in 0.0f64..0.2) {
        let g = generate_grid(1, 2, ErrorModel::Uniform(error));
        let mut c = LogicalCircuit::from_pairs(2, &[(0, 1), (0, 1)]).unwrap();
        let mut previous = analytic_fidelity(&c, &g).unwrap();
        for _ in 0..extra {
            c.push(Gate::pair("swap", 0, 1)).unwrap();
            let f = analytic_fidelity(&c, &g).unwrap();
            prop_assert!(f <= previous);
            previous = f;
        }
    }
}
