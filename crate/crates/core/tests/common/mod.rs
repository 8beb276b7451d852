//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet, VecDeque};

use qmap_core::circuit::LogicalCircuit;
use qmap_core::device::CouplingGraph;
use qmap_core::region::Partition;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Minimum swap count by breadth-first search over (executed gates,
/// placement) states. Gates run greedily as soon as they are ready and
/// adjacent, which never costs swaps. `None` if no placement can finish.
pub fn bfs_min_swaps(circuit: &LogicalCircuit, graph: &CouplingGraph) -> Option<usize> {
    let n_q = circuit.num_qubits();
    let n_p = graph.num_qubits();
    if n_q > n_p {
        return None;
    }
    let pairs: Vec<(usize, usize)> = circuit.gates().iter().filter_map(|g| g.pair_operands()).collect();
    let n_g = pairs.len();
    assert!(n_g <= 64);
    // every earlier gate sharing a qubit must run first
    let preds: Vec<u64> = (0..n_g)
        .map(|j| {
            (0..j)
                .filter(|&i| {
                    let (a, b) = pairs[i];
                    let (c, d) = pairs[j];
                    a == c || a == d || b == c || b == d
                })
                .fold(0u64, |m, i| m | 1 << i)
        })
        .collect();
    let full: u64 = if n_g == 64 { u64::MAX } else { (1u64 << n_g) - 1 };
    let adjacent = |a: usize, b: usize| graph.edges().iter().any(|e| (e.u, e.v) == (a.min(b), a.max(b)));

    let closure = |mut done: u64, place: &[usize]| loop {
        let mut progressed = false;
        for (g, &(a, b)) in pairs.iter().enumerate() {
            if done >> g & 1 == 0 && done & preds[g] == preds[g] && adjacent(place[a], place[b]) {
                done |= 1 << g;
                progressed = true;
            }
        }
        if !progressed {
            return done;
        }
    };

    let mut seen: HashSet<(u64, Vec<usize>)> = HashSet::new();
    let mut queue = VecDeque::new();
    for place in injections(n_q, n_p) {
        let done = closure(0, &place);
        if done == full {
            return Some(0);
        }
        if seen.insert((done, place.clone())) {
            queue.push_back((done, place, 0usize));
        }
    }
    while let Some((done, place, dist)) = queue.pop_front() {
        for e in graph.edges() {
            let mut next = place.clone();
            for p in next.iter_mut() {
                if *p == e.u {
                    *p = e.v;
                } else if *p == e.v {
                    *p = e.u;
                }
            }
            let nd = closure(done, &next);
            if nd == full {
                return Some(dist + 1);
            }
            if seen.insert((nd, next.clone())) {
                queue.push_back((nd, next, dist + 1));
            }
        }
    }
    None
}

/// All injective maps from `k` items into `0..n`.
pub fn injections(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(k: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for p in 0..n {
            if !cur.contains(&p) {
                cur.push(p);
                rec(k, n, cur, out);
                cur.pop();
            }
        }
    }
    rec(k, n, &mut cur, &mut out);
    out
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    injections(n, n)
}

fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect()
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(p) = stack.pop() {
        for &(a, b) in edges {
            for (x, y) in [(a, b), (b, a)] {
                if x == p && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// One representative edge list per isomorphism class of connected simple
/// graphs on `n` labelled vertices.
pub fn connected_graphs(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs = all_pairs(n);
    let index: HashMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let perms = permutations(n);
    let mut classes = HashSet::new();
    let mut out = Vec::new();
    for mask in 0u32..1 << pairs.len() {
        let edges: Vec<(usize, usize)> = (0..pairs.len()).filter(|&i| mask >> i & 1 == 1).map(|i| pairs[i]).collect();
        if !connected(n, &edges) {
            continue;
        }
        let canon = perms
            .iter()
            .map(|perm| {
                edges.iter().fold(0u32, |m, &(a, b)| {
                    let (x, y) = (perm[a], perm[b]);
                    m | 1 << index[&(x.min(y), x.max(y))]
                })
            })
            .min()
            .unwrap();
        if classes.insert(canon) {
            out.push(edges);
        }
    }
    out
}

/// Sequences of `len` unordered qubit pairs over at most `max_labels` labels,
/// one per orbit under relabelling. Each representative is the
/// lexicographically smallest member of its orbit, so it uses labels `0..k`.
pub fn pair_sequences(len: usize, max_labels: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs = all_pairs(max_labels);
    let perms = permutations(max_labels);
    let mut orbits = HashSet::new();
    let mut out = Vec::new();
    let mut digits = vec![0usize; len];
    loop {
        let seq: Vec<(usize, usize)> = digits.iter().map(|&d| pairs[d]).collect();
        let canon = perms
            .iter()
            .map(|perm| {
                seq.iter()
                    .map(|&(a, b)| (perm[a].min(perm[b]), perm[a].max(perm[b])))
                    .collect::<Vec<_>>()
            })
            .min()
            .unwrap();
        if orbits.insert(canon.clone()) {
            out.push(canon);
        }
        // odometer over pair indices
        let mut i = 0;
        loop {
            if i == len {
                return out;
            }
            digits[i] += 1;
            if digits[i] < pairs.len() {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

pub fn labels_used(seq: &[(usize, usize)]) -> usize {
    seq.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0)
}

/// Newman modularity straight from the definition: for every community,
/// the fraction of edges inside it minus the squared fraction of edge
/// endpoints attached to it.
pub fn brute_modularity(graph: &CouplingGraph, communities: &[Vec<usize>]) -> f64 {
    let m = graph.num_edges() as f64;
    communities
        .iter()
        .map(|c| {
            let inside = graph.edges().iter().filter(|e| c.contains(&e.u) && c.contains(&e.v)).count() as f64;
            let ends: f64 = graph
                .edges()
                .iter()
                .map(|e| c.contains(&e.u) as usize + c.contains(&e.v) as usize)
                .sum::<usize>() as f64;
            inside / m - (ends / (2.0 * m)).powi(2)
        })
        .sum()
}

pub fn brute_fidelity(graph: &CouplingGraph, members: &[usize]) -> f64 {
    let errors: Vec<f64> = graph
        .edges()
        .iter()
        .filter(|e| members.contains(&e.u) && members.contains(&e.v))
        .map(|e| e.error)
        .collect();
    if errors.is_empty() {
        1.0
    } else {
        1.0 - errors.iter().sum::<f64>() / errors.len() as f64
    }
}

/// Random graph on `n` vertices: each pair is an edge with probability
/// `density`; if `connected_only`, a random spanning tree is added first.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, density: f64, connected_only: bool) -> CouplingGraph {
    let mut edges: HashSet<(usize, usize)> = HashSet::new();
    if connected_only {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        for i in 1..n {
            let j = rng.gen_range(0..i);
            let (a, b) = (order[i], order[j]);
            edges.insert((a.min(b), a.max(b)));
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(density) {
                edges.insert((a, b));
            }
        }
    }
    let mut edges: Vec<(usize, usize)> = edges.into_iter().collect();
    edges.sort_unstable();
    let list: Vec<(usize, usize, f64)> = edges
        .into_iter()
        .map(|(a, b)| (a, b, rng.gen_range(0.001..0.05)))
        .collect();
    CouplingGraph::new("random", n, list).unwrap()
}

pub fn random_partition(rng: &mut ChaCha8Rng, n: usize) -> Partition {
    let k = rng.gen_range(1..=n);
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); k];
    for p in 0..n {
        // first k qubits seed each group so none is empty
        let g = if p < k { p } else { rng.gen_range(0..k) };
        groups[g].push(p);
    }
    Partition::new(n, groups).unwrap()
}

pub fn random_circuit(rng: &mut ChaCha8Rng, n_q: usize, two_qubit: usize, single: usize) -> LogicalCircuit {
    use qmap_core::circuit::Gate;
    let names = ["h", "x", "t", "s", "sdg", "sx"];
    let mut kinds: Vec<bool> = std::iter::repeat(true)
        .take(two_qubit)
        .chain(std::iter::repeat(false).take(single))
        .collect();
    kinds.shuffle(rng);
    let mut c = LogicalCircuit::new(n_q);
    for two in kinds {
        if two && n_q >= 2 {
            let a = rng.gen_range(0..n_q);
            let mut b = rng.gen_range(0..n_q - 1);
            if b >= a {
                b += 1;
            }
            let name = ["cx", "cz", "cx"][rng.gen_range(0..3)];
            c.push(Gate::pair(name, a, b)).unwrap();
        } else {
            let q = rng.gen_range(0..n_q);
            if rng.gen_bool(0.3) {
                c.push(Gate::single("rz", q).with_params(vec![rng.gen_range(-3.0..3.0)])).unwrap();
            } else {
                c.push(Gate::single(names[rng.gen_range(0..names.len())], q)).unwrap();
            }
        }
    }
    c
}

/// Replays a fusion run and checks every recorded merge against a
/// brute-force scan of all adjacent community pairs, scoring each candidate
/// with [`brute_modularity`] and [`brute_fidelity`]. Returns the number of
/// merges checked.
pub fn check_fusion_against_scan(
    graph: &CouplingGraph,
    omega: f64,
    steps: &[qmap_core::region::FusionStep],
) -> Result<usize, String> {
    let n = graph.num_qubits();
    let mut communities: Vec<Vec<usize>> = (0..n).map(|p| vec![p]).collect();
    for (i, step) in steps.iter().enumerate() {
        let mut best = f64::NEG_INFINITY;
        for a in 0..communities.len() {
            for b in a + 1..communities.len() {
                let adjacent = graph.edges().iter().any(|e| {
                    (communities[a].contains(&e.u) && communities[b].contains(&e.v))
                        || (communities[a].contains(&e.v) && communities[b].contains(&e.u))
                });
                if !adjacent {
                    continue;
                }
                let mut merged: Vec<usize> = communities[a].iter().chain(&communities[b]).copied().collect();
                merged.sort_unstable();
                let mut after: Vec<Vec<usize>> = communities
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != a && j != b)
                    .map(|(_, c)| c.clone())
                    .collect();
                after.push(merged.clone());
                let f = brute_modularity(graph, &after) + omega * brute_fidelity(graph, &merged);
                best = best.max(f);
            }
        }
        let left = communities.iter().position(|c| *c == step.left);
        let right = communities.iter().position(|c| *c == step.right);
        let (Some(l), Some(r)) = (left, right) else {
            return Err(format!("step {i}: merged sides are not current communities"));
        };
        if (step.reward - best).abs() > 1e-12 {
            return Err(format!("step {i}: chose F={} but the best admissible F is {best}", step.reward));
        }
        let mut merged: Vec<usize> = communities[l].iter().chain(&communities[r]).copied().collect();
        merged.sort_unstable();
        communities.retain(|c| *c != step.left && *c != step.right);
        communities.push(merged);
    }
    if communities.len() != 1 {
        return Err(format!("{} communities remain", communities.len()));
    }
    Ok(steps.len())
}

/// A random connected set of `size` qubits grown from a random seed qubit.
pub fn planted_region(rng: &mut ChaCha8Rng, graph: &CouplingGraph, size: usize) -> Vec<usize> {
    let mut members = vec![rng.gen_range(0..graph.num_qubits())];
    while members.len() < size {
        let mut border: Vec<usize> = members
            .iter()
            .flat_map(|&p| graph.neighbors(p))
            .filter(|n| !members.contains(n))
            .collect();
        border.sort_unstable();
        border.dedup();
        members.push(*border.choose(rng).expect("graph larger than the region"));
    }
    members.sort_unstable();
    members
}

pub fn scale_errors(graph: &CouplingGraph, factor: f64) -> CouplingGraph {
    CouplingGraph::new(
        graph.name(),
        graph.num_qubits(),
        graph.edges().iter().map(|e| (e.u, e.v, e.error * factor)),
    )
    .unwrap()
}
