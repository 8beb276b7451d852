//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Pass criterion numbers as arguments to run a
//! subset, e.g. `cargo test -p qmap-core --test acceptance -- 5 7`.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use qmap_core::circuit::LogicalCircuit;
use qmap_core::device::{generate_grid, generate_heavy_hex, CouplingGraph, ErrorModel};
use qmap_core::evaluator::{
    analytic_fidelity, compact_routed, complexity_estimates, hellinger_fidelity, pruning_ratios,
    statevector, ComplexityInputs, OutcomeDistribution, PruningRatios,
};
use qmap_core::expansion::{expand, restrict_graph};
use qmap_core::region::{modularity, recursive_community_fusion, FusionConfig, RegionTriple};
use qmap_core::solver::{
    encode, solve, solve_on_region, solve_regional, validate_solution, EncodingBounds, MappingSolution,
    RegionalOptions, SolveOptions, SolveOutcome,
};
use rand::Rng;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(message())
    }
}

fn within(started: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let elapsed = started.elapsed();
    ensure(elapsed < limit, || format!("{what} took {elapsed:.2?}, limit {limit:?}"))
}

fn options(limit: u64) -> SolveOptions {
    SolveOptions {
        time_limit: Some(Duration::from_secs(limit)),
        ..SolveOptions::default()
    }
}

fn solved(outcome: SolveOutcome) -> Result<MappingSolution, String> {
    match outcome {
        SolveOutcome::Solved(s) => Ok(s),
        other => Err(format!("expected a layout, got {}", other.label())),
    }
}

fn modularity_oracle() -> Result<String, String> {
    let started = Instant::now();
    let mut rng = common::rng(101);
    let mut worst = 0.0f64;
    let mut checked = 0;
    while checked < 200 {
        let n = rng.gen_range(2..=12);
        let density = rng.gen_range(0.1..0.8);
        let g = common::random_graph(&mut rng, n, density, false);
        if g.num_edges() == 0 {
            continue;
        }
        let p = common::random_partition(&mut rng, n);
        let fast = modularity(&g, &p).map_err(|e| e.to_string())?;
        let diff = (fast - common::brute_modularity(&g, p.communities())).abs();
        ensure(diff <= 1e-12, || format!("graph {checked}: difference {diff:e}"))?;
        worst = worst.max(diff);
        checked += 1;
    }
    within(started, Duration::from_secs(10), "200 graphs")?;
    Ok(format!("200 graphs, max |diff| {worst:e}, {:.2?}", started.elapsed()))
}

fn fusion_correctness() -> Result<String, String> {
    let started = Instant::now();
    let mut rng = common::rng(102);
    let mut merges = 0;
    for i in 0..100 {
        let n = rng.gen_range(2..=12);
        let density = rng.gen_range(0.05..0.6);
        let g = common::random_graph(&mut rng, n, density, true);
        let omega = rng.gen_range(0.0..2.0);
        let set = recursive_community_fusion(&g, &FusionConfig::with_omega(omega)).map_err(|e| e.to_string())?;
        merges += common::check_fusion_against_scan(&g, omega, &set.steps).map_err(|e| format!("graph {i}: {e}"))?;
        let last = set.triples.last().ok_or("no triples")?;
        ensure(last.members == (0..n).collect::<Vec<_>>(), || format!("graph {i}: final triple does not cover P"))?;
    }
    within(started, Duration::from_secs(60), "100 graphs")?;
    Ok(format!("100 graphs, {merges} merges matched the brute-force scan, {:.2?}", started.elapsed()))
}

fn scale_invariance() -> Result<String, String> {
    let mut rng = common::rng(103);
    let config = FusionConfig::with_omega(0.0);
    for i in 0..50 {
        let n = rng.gen_range(2..=14);
        let g = common::random_graph(&mut rng, n, 0.3, true);
        let a = recursive_community_fusion(&g, &config).map_err(|e| e.to_string())?;
        let b = recursive_community_fusion(&common::scale_errors(&g, 0.5), &config).map_err(|e| e.to_string())?;
        let merges = |s: &qmap_core::region::TripleSet| {
            s.steps.iter().map(|st| (st.left.clone(), st.right.clone())).collect::<Vec<_>>()
        };
        ensure(merges(&a) == merges(&b), || format!("graph {i}: merge sequence changed"))?;
        ensure(a.triples == b.triples, || format!("graph {i}: triple set changed"))?;
    }
    Ok("50 graphs, identical merge sequences and triple sets".into())
}

fn expansion_bounds() -> Result<String, String> {
    let mut rng = common::rng(104);
    let mut tightest = 0.0f64;
    for i in 0..100 {
        let g = if i % 2 == 0 {
            generate_grid(rng.gen_range(3..=10), rng.gen_range(3..=10), ErrorModel::Uniform(0.01))
        } else {
            generate_heavy_hex(rng.gen_range(1..=4), ErrorModel::Uniform(0.01))
        };
        let n_q = rng.gen_range(1..=8.min(g.num_qubits()));
        let members = common::planted_region(&mut rng, &g, n_q);
        let region = expand(&g, &RegionTriple::from_members(&g, members), 1);
        let d = g.max_degree();
        let p_bound = n_q * d + 1;
        // |E_f| <= (d/2)(n_q d + 1), compared doubled to stay in integers
        let e_bound2 = d * (n_q * d + 1);
        ensure(region.num_qubits() <= p_bound, || {
            format!("{}: |P_f| = {} > {p_bound}", g.name(), region.num_qubits())
        })?;
        ensure(2 * region.num_edges() <= e_bound2, || {
            format!("{}: |E_f| = {} > {}", g.name(), region.num_edges(), e_bound2 as f64 / 2.0)
        })?;
        tightest = tightest.max(region.num_qubits() as f64 / p_bound as f64);
    }
    Ok(format!("100 planted regions within both bounds (max |P_f|/bound {tightest:.3})"))
}

fn solver_optimality() -> Result<String, String> {
    let started = Instant::now();
    let mut circuits = Vec::new();
    for len in 1..=6 {
        circuits.extend(common::pair_sequences(len, 4));
    }
    let mut instances = 0;
    for n_p in 2..=5 {
        for edges in common::connected_graphs(n_p) {
            let g = CouplingGraph::new("g", n_p, edges.iter().map(|&(a, b)| (a, b, 0.01))).map_err(|e| e.to_string())?;
            for seq in &circuits {
                let n_q = common::labels_used(seq);
                if n_q > n_p {
                    continue;
                }
                let c = LogicalCircuit::from_pairs(n_q, seq).map_err(|e| e.to_string())?;
                let expected = common::bfs_min_swaps(&c, &g).ok_or("oracle found no layout")?;
                let s = solved(solve(&c, &g, &options(60)).map_err(|e| e.to_string())?)?;
                ensure(s.stats.complete, || format!("{seq:?} on {edges:?}: search incomplete"))?;
                ensure(s.swap_count() == expected, || {
                    format!("{seq:?} on {edges:?}: solver {} swaps, oracle {expected}", s.swap_count())
                })?;
                instances += 1;
            }
        }
    }
    within(started, Duration::from_secs(600), "exhaustive family")?;
    Ok(format!(
        "{instances} instances ({} circuit orbits over the 30 connected graphs with 2-5 qubits), all optimal, {:.1?}",
        circuits.len(),
        started.elapsed()
    ))
}

/// Largest amplitude difference between the original circuit and the routed
/// one read back through its final layout; ancilla wires must stay in |0>.
fn routed_state_error(circuit: &LogicalCircuit, solution: &MappingSolution, device: &CouplingGraph) -> Result<f64, String> {
    let compact = compact_routed(solution, device);
    let original = statevector(circuit).map_err(|e| e.to_string())?;
    let routed = statevector(&compact.circuit).map_err(|e| e.to_string())?;
    let mut expected = vec![Complex64::new(0.0, 0.0); routed.len()];
    for (x, amp) in original.iter().enumerate() {
        let y: usize = compact.measure.iter().enumerate().map(|(q, &w)| (x >> q & 1) << w).sum();
        expected[y] = *amp;
    }
    Ok(expected.iter().zip(&routed).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
}

fn solution_validity() -> Result<String, String> {
    let mut rng = common::rng(106);
    let mut worst = 0.0f64;
    let mut swaps = 0;
    for i in 0..500 {
        let n_q = rng.gen_range(2..=6);
        let n_p = rng.gen_range(n_q..=12);
        let density = rng.gen_range(0.0..0.15);
        let g = common::random_graph(&mut rng, n_p, density, true);
        let two = rng.gen_range(1..=8);
        let single = rng.gen_range(0..=6);
        let c = common::random_circuit(&mut rng, n_q, two, single);
        let s = solved(solve(&c, &g, &options(60)).map_err(|e| e.to_string())?)?;
        validate_solution(&c, &g, &s).map_err(|e| format!("instance {i}: {e}"))?;
        let err = routed_state_error(&c, &s, &g)?;
        ensure(err <= 1e-9, || format!("instance {i}: statevector mismatch {err:e}"))?;
        worst = worst.max(err);
        swaps += s.swap_count();
    }
    Ok(format!("500 solves valid ({swaps} swaps in total), max amplitude error {worst:e}"))
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

fn encoding_shrink() -> Result<String, String> {
    let grid = generate_grid(10, 10, ErrorModel::seeded(107));
    let mut rng = common::rng(107);
    let regional = RegionalOptions {
        solve: options(600),
        ..RegionalOptions::default()
    };
    let mut lines = Vec::new();
    let mut speedups = Vec::new();
    for i in 0..3 {
        let c = common::random_circuit(&mut rng, 5, 8, 0);
        let run = solve_regional(&c, &grid, &regional).map_err(|e| e.to_string())?;
        let s = solved(run.outcome.clone())?;
        let bounds = EncodingBounds {
            blocks: s.blocks(),
            swaps: Some(s.swap_count()),
        };
        let restricted = restrict_graph(&grid, &run.region);
        let small = encode(&c, &restricted.graph, bounds).map_err(|e| e.to_string())?.stats;
        let full = encode(&c, &grid, bounds).map_err(|e| e.to_string())?.stats;
        ensure(small.n_var < full.n_var && small.n_clause < full.n_clause, || {
            format!("circuit {i}: restricted {}/{} vs full {}/{}", small.n_var, small.n_clause, full.n_var, full.n_clause)
        })?;

        let measured = PruningRatios {
            r_ae: grid.num_edges() as f64 / restricted.graph.num_edges() as f64,
            r_aq: grid.num_qubits() as f64 / restricted.graph.num_qubits() as f64,
            ..PruningRatios::identity()
        };
        let inputs = ComplexityInputs::new(&c, &grid, bounds.blocks, s.swap_count());
        let predicted = complexity_estimates(&inputs, &measured).regional.tbolsq2_vars;
        let rel = (small.variable_groups as f64 - predicted).abs() / predicted;
        ensure(rel <= 0.30, || format!("circuit {i}: variable groups {} vs estimate {predicted:.1}", small.variable_groups))?;

        let mut base_times = Vec::new();
        let mut region_times = Vec::new();
        for _ in 0..5 {
            let t = Instant::now();
            solved(solve(&c, &grid, &options(600)).map_err(|e| e.to_string())?)?;
            base_times.push(t.elapsed().as_secs_f64());
            let t = Instant::now();
            solved(solve_regional(&c, &grid, &regional).map_err(|e| e.to_string())?.outcome)?;
            region_times.push(t.elapsed().as_secs_f64());
        }
        let speedup = median(base_times.clone()) / median(region_times.clone());
        ensure(speedup >= 5.0, || format!("circuit {i}: median speedup {speedup:.2}x"))?;
        speedups.push(speedup);
        lines.push(format!(
            "vars {}->{} clauses {}->{} groups {} (est {predicted:.0}) {speedup:.1}x",
            full.n_var, small.n_var, full.n_clause, small.n_clause, small.variable_groups
        ));
    }
    Ok(lines.join("; "))
}

/// Grid whose qubits in `cluster` couple with error 0.005 and every other
/// edge with 0.05.
fn clustered_grid(rows: usize, cols: usize, cluster: &[usize]) -> CouplingGraph {
    let base = generate_grid(rows, cols, ErrorModel::Uniform(0.05));
    CouplingGraph::new(
        "clustered",
        rows * cols,
        base.edges().iter().map(|e| {
            let low = cluster.contains(&e.u) && cluster.contains(&e.v);
            (e.u, e.v, if low { 0.005 } else { 0.05 })
        }),
    )
    .expect("valid grid")
}

fn fidelity_aware_selection() -> Result<String, String> {
    let (rows, cols) = (6, 6);
    // 3x3 low-error block in the top-left corner
    let cluster: Vec<usize> = (0..3).flat_map(|r| (0..3).map(move |c| r * cols + c)).collect();
    let g = clustered_grid(rows, cols, &cluster);
    let device_mean = g.mean_error();
    let mut rng = common::rng(108);
    let opts = RegionalOptions {
        fusion: FusionConfig::with_omega(1.0),
        solve: options(120),
        ..RegionalOptions::default()
    };
    let mut lines = Vec::new();
    for i in 0..5 {
        let n_q = rng.gen_range(3..=5);
        let c = common::random_circuit(&mut rng, n_q, 6, 2);
        let run = solve_regional(&c, &g, &opts).map_err(|e| e.to_string())?;
        let chosen = solved(run.outcome)?;
        validate_solution(&c, &g, &chosen).map_err(|e| e.to_string())?;
        let origin_error = 1.0 - qmap_core::region::average_internal_fidelity(&g, &run.region.origin.members);
        ensure(origin_error <= device_mean, || {
            format!("circuit {i}: region mean error {origin_error:.4} > device mean {device_mean:.4}")
        })?;

        // same shape moved into the bottom-right background
        let shift = |p: usize| (p / cols + 3) * cols + (p % cols + 3);
        let moved: Vec<usize> = run.region.origin.members.iter().map(|&p| shift(p)).collect();
        ensure(moved.iter().all(|&p| !cluster.contains(&p)), || "translated region overlaps the cluster".into())?;
        let forced_region = expand(&g, &RegionTriple::from_members(&g, moved), opts.expand_k);
        let forced = solved(solve_on_region(&c, &g, &forced_region, &opts.solve).map_err(|e| e.to_string())?)?;
        validate_solution(&c, &g, &forced).map_err(|e| e.to_string())?;
        let good = analytic_fidelity(&chosen.routed_circuit, &g).map_err(|e| e.to_string())?;
        let bad = analytic_fidelity(&forced.routed_circuit, &g).map_err(|e| e.to_string())?;
        ensure(good >= bad, || format!("circuit {i}: chosen {good:.4} < background {bad:.4}"))?;
        lines.push(format!("{good:.4} vs {bad:.4}"));
    }
    Ok(format!(
        "device mean error {device_mean:.4}; analytic fidelity chosen vs background: {}",
        lines.join(", ")
    ))
}

fn estimator_identities() -> Result<String, String> {
    let r = PruningRatios::compute(127, 144, 3, 5);
    ensure((r.r_aq - 127.0 / 11.0).abs() <= 1e-3, || format!("r_aq = {}", r.r_aq))?;
    let mut rng = common::rng(109);
    for _ in 0..100 {
        let inputs = ComplexityInputs {
            n_p: rng.gen_range(1..500),
            n_e: rng.gen_range(0..900),
            n_q: rng.gen_range(1..30),
            n_g: rng.gen_range(0..200),
            n_el: rng.gen_range(0..100),
            b: rng.gen_range(0..200),
            t: rng.gen_range(1..50),
            s: rng.gen_range(0..20),
            d_max: rng.gen_range(1..6),
            d_min: 1,
        };
        let identity = complexity_estimates(&inputs, &PruningRatios::identity());
        ensure(identity.regional == identity.baseline, || format!("{inputs:?}: identity ratios changed the estimates"))?;
        let f = |x: usize| x as f64;
        let (t, n_p, n_e, n_q, n_g, n_el) = (f(inputs.t), f(inputs.n_p), f(inputs.n_e), f(inputs.n_q), f(inputs.n_g), f(inputs.n_el));
        let b = &identity.baseline;
        ensure(b.qs_v2_vars == t * (n_q * n_p + n_el + n_g), || "qs-v2 variables".into())?;
        ensure(b.qs_v2_clauses == t * (n_q * n_p + n_q * n_e + n_el * n_p * n_p + n_g), || "qs-v2 clauses".into())?;
        ensure(b.tbolsq2_vars == t * (n_q + n_e) + n_g, || "tbolsq2 variables".into())?;
        let cons = t * (n_q * n_q + (n_g + f(inputs.d_max) + n_q) * n_e + n_q * n_p) + f(inputs.b);
        ensure(b.tbolsq2_constraints == cons, || "tbolsq2 constraints".into())?;
    }
    let hh = generate_heavy_hex(3, ErrorModel::Uniform(0.01));
    let live = pruning_ratios(&hh, 5);
    Ok(format!("r_aq = {:.4} (127/11 = {:.4}); heavy_hex_d3 r_aq = {:.3}", r.r_aq, 127.0 / 11.0, live.r_aq))
}

fn expansion_factor_study() -> Result<String, String> {
    let device = generate_grid(6, 6, ErrorModel::seeded(110));
    let mut rng = common::rng(110);
    let circuits: Vec<LogicalCircuit> = (0..10).map(|_| common::random_circuit(&mut rng, 5, 10, 0)).collect();
    let mut solved_counts = Vec::new();
    let mut medians = Vec::new();
    for k in 0..=2 {
        let opts = RegionalOptions {
            expand_k: k,
            retry_on_infeasible: false,
            solve: options(60),
            ..RegionalOptions::default()
        };
        let mut count = 0;
        let mut times = Vec::new();
        for c in &circuits {
            let t = Instant::now();
            let run = solve_regional(c, &device, &opts).map_err(|e| e.to_string())?;
            let elapsed = t.elapsed().as_secs_f64();
            if let SolveOutcome::Solved(s) = &run.outcome {
                validate_solution(c, &device, s).map_err(|e| e.to_string())?;
                if !s.stats.timed_out {
                    count += 1;
                }
            }
            // unsolved runs count at the limit
            times.push(if matches!(run.outcome, SolveOutcome::Solved(ref s) if !s.stats.timed_out) { elapsed } else { 60.0 });
        }
        solved_counts.push(count);
        medians.push(median(times));
    }
    let summary = format!(
        "solved k0/k1/k2 = {}/{}/{}, median seconds {:.3}/{:.3}/{:.3}",
        solved_counts[0], solved_counts[1], solved_counts[2], medians[0], medians[1], medians[2]
    );
    ensure(solved_counts[1] >= solved_counts[0], || summary.clone())?;
    ensure(medians[1] <= medians[2], || summary.clone())?;
    Ok(summary)
}

fn hf_spot_values() -> Result<String, String> {
    let dist = |pairs: &[(&str, f64)]| {
        OutcomeDistribution::exact(pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect())
    };
    let mut rng = common::rng(111);
    for _ in 0..100 {
        let width = rng.gen_range(1..=4);
        let raw: Vec<f64> = (0..1 << width).map(|_| rng.gen_range(0.0..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let p = OutcomeDistribution::exact(
            raw.iter()
                .enumerate()
                .map(|(k, v)| (format!("{k:0width$b}"), v / total))
                .collect(),
        );
        let hf = hellinger_fidelity(&p, &p);
        ensure((hf - 1.0).abs() <= 1e-12, || format!("HF(p,p) = {hf}"))?;
    }
    let same = dist(&[("00", 0.25), ("11", 0.75)]);
    ensure(hellinger_fidelity(&same, &same) == 1.0, || "HF(p,p) != 1".into())?;
    let det = dist(&[("0", 1.0)]);
    let uniform = dist(&[("0", 0.5), ("1", 0.5)]);
    let hf = hellinger_fidelity(&det, &uniform);
    ensure(hf == 0.5, || format!("deterministic vs uniform gave {hf:e}"))?;
    Ok("HF(p,p) = 1 on 100 random distributions; deterministic vs uniform = 0.5 exactly".into())
}

fn main() {
    let criteria: [(usize, &str, Check); 11] = [
        (1, "modularity oracle", modularity_oracle),
        (2, "fusion correctness", fusion_correctness),
        (3, "omega=0 scale invariance", scale_invariance),
        (4, "expansion bounds", expansion_bounds),
        (5, "solver optimality", solver_optimality),
        (6, "solution validity", solution_validity),
        (7, "encoding shrink and speedup", encoding_shrink),
        (8, "fidelity-aware selection", fidelity_aware_selection),
        (9, "estimator identities", estimator_identities),
        (10, "expansion-factor study", expansion_factor_study),
        (11, "HF spot values", hf_spot_values),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, check) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("criterion {id:>2} PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
