//! Candidate mapping regions from agglomerative community fusion.
//!
//! Starting from singletons, the pair of adjacent communities whose merge
//! maximizes `F = Q + omega * E` is fused until one community remains. `Q` is
//! Newman modularity of the partition after the merge and `E` is one minus the
//! mean error over the merged community's internal edges. Every merged
//! community is recorded as a [`RegionTriple`].

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::device::CouplingGraph;

/// Rewards closer than this are treated as equal and resolved by the
/// tie-break rule. It absorbs summation-order noise in `E` and sits far below
/// the smallest modularity step `1 / 4m^2` for any realistic device.
pub const REWARD_TIE_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RegionError {
    #[error("modularity undefined: graph has no edges")]
    ModularityUndefined,
    #[error("graph disconnected: no admissible merge")]
    NoAdmissibleMerge,
    #[error("no region large enough for {requested} qubits (largest has {largest})")]
    NoRegionLargeEnough { requested: usize, largest: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("omega must be finite and non-negative, got {0}")]
    InvalidOmega(f64),
}

/// Disjoint cover of the physical qubits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    communities: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(num_qubits: usize, mut communities: Vec<Vec<usize>>) -> Result<Self, RegionError> {
        let mut seen = vec![false; num_qubits];
        for c in &mut communities {
            if c.is_empty() {
                return Err(RegionError::InvalidPartition("empty community".into()));
            }
            c.sort_unstable();
            for &p in c.iter() {
                if p >= num_qubits || std::mem::replace(&mut seen[p], true) {
                    return Err(RegionError::InvalidPartition(format!(
                        "qubit {p} missing from the graph or listed twice"
                    )));
                }
            }
        }
        if let Some(p) = seen.iter().position(|s| !s) {
            return Err(RegionError::InvalidPartition(format!("qubit {p} not covered")));
        }
        Ok(Partition { communities })
    }

    pub fn singletons(num_qubits: usize) -> Self {
        Partition {
            communities: (0..num_qubits).map(|p| vec![p]).collect(),
        }
    }

    pub fn communities(&self) -> &[Vec<usize>] {
        &self.communities
    }

    pub fn len(&self) -> usize {
        self.communities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.communities.is_empty()
    }

    /// Community index of every qubit.
    pub fn labels(&self, num_qubits: usize) -> Vec<usize> {
        let mut labels = vec![usize::MAX; num_qubits];
        for (i, c) in self.communities.iter().enumerate() {
            for &p in c {
                labels[p] = i;
            }
        }
        labels
    }
}

/// `4m^2 * Q` for community internal-edge counts `internal` and degree sums
/// `degree_sums`, exact in integers.
fn scaled_modularity(m: usize, internal: &[usize], degree_sums: &[usize]) -> i128 {
    let m = m as i128;
    internal
        .iter()
        .zip(degree_sums)
        .map(|(&l, &d)| 4 * m * l as i128 - (d as i128) * (d as i128))
        .sum()
}

fn modularity_from_scaled(m: usize, scaled: i128) -> f64 {
    let m = m as f64;
    scaled as f64 / (4.0 * m * m)
}

pub fn modularity(graph: &CouplingGraph, partition: &Partition) -> Result<f64, RegionError> {
    let m = graph.num_edges();
    if m == 0 {
        return Err(RegionError::ModularityUndefined);
    }
    let labels = partition.labels(graph.num_qubits());
    let k = partition.len();
    let mut internal = vec![0usize; k];
    let mut degree_sums = vec![0usize; k];
    for e in graph.edges() {
        let (a, b) = (labels[e.u], labels[e.v]);
        degree_sums[a] += 1;
        degree_sums[b] += 1;
        if a == b {
            internal[a] += 1;
        }
    }
    Ok(modularity_from_scaled(m, scaled_modularity(m, &internal, &degree_sums)))
}

/// One minus the mean error over edges with both endpoints in `members`;
/// 1 when there are none.
pub fn average_internal_fidelity(graph: &CouplingGraph, members: &[usize]) -> f64 {
    let internal = graph.induced_edges(members);
    if internal.is_empty() {
        return 1.0;
    }
    let sum: f64 = internal.iter().map(|&i| graph.edges()[i].error).sum();
    1.0 - sum / internal.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum TieBreak {
    /// Smallest `(min(a0, b0), max(a0, b0))`, where `a0`, `b0` are the
    /// communities' smallest members.
    #[default]
    LowestMembers,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    pub omega: f64,
    pub tie_break: TieBreak,
    /// Only communities joined by at least one coupling edge may merge.
    pub adjacency_only: bool,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            omega: 0.5,
            tie_break: TieBreak::LowestMembers,
            adjacency_only: true,
        }
    }
}

impl FusionConfig {
    pub fn with_omega(omega: f64) -> Self {
        FusionConfig {
            omega,
            ..FusionConfig::default()
        }
    }
}

/// `F` for a partition that already contains the merged community.
pub fn reward(
    graph: &CouplingGraph,
    partition_after_merge: &Partition,
    merged: &[usize],
    config: &FusionConfig,
) -> Result<f64, RegionError> {
    let q = modularity(graph, partition_after_merge)?;
    Ok(q + config.omega * average_internal_fidelity(graph, merged))
}

/// A recorded community: its size, sorted members and the indices (into
/// [`CouplingGraph::edges`]) of every coupling edge inside it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionTriple {
    pub size: usize,
    pub members: Vec<usize>,
    pub edges: Vec<usize>,
}

impl RegionTriple {
    pub fn from_members(graph: &CouplingGraph, mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        let edges = graph.induced_edges(&members);
        RegionTriple {
            size: members.len(),
            members,
            edges,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionStep {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub reward: f64,
    pub modularity: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleSet {
    pub triples: Vec<RegionTriple>,
    /// Merges in the order they were made.
    pub steps: Vec<FusionStep>,
}

impl TripleSet {
    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.triples.iter().map(|t| t.size).collect()
    }

    /// Smallest region holding at least `n_q` qubits; the earliest recorded
    /// wins among equal sizes.
    pub fn best_region_for(&self, n_q: usize) -> Result<&RegionTriple, RegionError> {
        let mut best: Option<&RegionTriple> = None;
        for t in &self.triples {
            if t.size >= n_q && best.map_or(true, |b| t.size < b.size) {
                best = Some(t);
            }
        }
        best.ok_or(RegionError::NoRegionLargeEnough {
            requested: n_q,
            largest: self.triples.iter().map(|t| t.size).max().unwrap_or(0),
        })
    }
}

struct Community {
    members: Vec<usize>,
    internal: usize,
    degree_sum: usize,
    error_sum: f64,
}

#[derive(Default, Clone, Copy)]
struct Cut {
    count: usize,
    error_sum: f64,
}

pub fn recursive_community_fusion(
    graph: &CouplingGraph,
    config: &FusionConfig,
) -> Result<TripleSet, RegionError> {
    if !config.omega.is_finite() || config.omega < 0.0 {
        return Err(RegionError::InvalidOmega(config.omega));
    }
    let n = graph.num_qubits();
    let m = graph.num_edges();
    let mut set = TripleSet {
        triples: Vec::new(),
        steps: Vec::new(),
    };
    if n == 1 {
        set.triples.push(RegionTriple::from_members(graph, vec![0]));
        return Ok(set);
    }
    if m == 0 {
        return Err(if config.adjacency_only {
            RegionError::NoAdmissibleMerge
        } else {
            RegionError::ModularityUndefined
        });
    }

    let mut communities: Vec<Option<Community>> = (0..n)
        .map(|p| {
            Some(Community {
                members: vec![p],
                internal: 0,
                degree_sum: graph.degree(p),
                error_sum: 0.0,
            })
        })
        .collect();
    let mut label: Vec<usize> = (0..n).collect();
    let mut scaled_q = scaled_modularity(
        m,
        &vec![0; n],
        &(0..n).map(|p| graph.degree(p)).collect::<Vec<_>>(),
    );
    let four_m = 4 * m as i128;
    let mut recorded: HashSet<Vec<usize>> = HashSet::new();

    for _ in 1..n {
        let mut cuts: BTreeMap<(usize, usize), Cut> = BTreeMap::new();
        for e in graph.edges() {
            let (a, b) = (label[e.u], label[e.v]);
            if a != b {
                let c = cuts.entry((a.min(b), a.max(b))).or_default();
                c.count += 1;
                c.error_sum += e.error;
            }
        }
        let live: Vec<usize> = (0..n).filter(|&i| communities[i].is_some()).collect();
        let mut candidates: Vec<(usize, usize, Cut)> = Vec::new();
        if config.adjacency_only {
            candidates.extend(cuts.iter().map(|(&(a, b), &c)| (a, b, c)));
        } else {
            for (x, &a) in live.iter().enumerate() {
                for &b in &live[x + 1..] {
                    candidates.push((a, b, cuts.get(&(a, b)).copied().unwrap_or_default()));
                }
            }
        }
        if candidates.is_empty() {
            return Err(RegionError::NoAdmissibleMerge);
        }

        // Community ids are the smallest member, so (a, b) with a < b is
        // already the tie-break key; scanning in key order and replacing only
        // on a strictly larger reward keeps the lowest key among ties.
        candidates.sort_by_key(|&(a, b, _)| (a, b));
        let mut best: Option<(usize, usize, f64, f64, f64)> = None;
        for (a, b, cut) in candidates {
            let ca = communities[a].as_ref().expect("live community");
            let cb = communities[b].as_ref().expect("live community");
            let delta = four_m * cut.count as i128 - 2 * ca.degree_sum as i128 * cb.degree_sum as i128;
            let q = modularity_from_scaled(m, scaled_q + delta);
            let internal = ca.internal + cb.internal + cut.count;
            let fidelity = if internal == 0 {
                1.0
            } else {
                1.0 - (ca.error_sum + cb.error_sum + cut.error_sum) / internal as f64
            };
            let f = q + config.omega * fidelity;
            if best.map_or(true, |(_, _, bf, _, _)| f > bf + REWARD_TIE_EPSILON) {
                best = Some((a, b, f, q, fidelity));
            }
        }
        let (a, b, f, q, fidelity) = best.expect("non-empty candidate list");
        let cut = cuts.get(&(a, b)).copied().unwrap_or_default();
        let cb = communities[b].take().expect("live community");
        let ca = communities[a].as_mut().expect("live community");
        scaled_q += four_m * cut.count as i128 - 2 * ca.degree_sum as i128 * cb.degree_sum as i128;
        let left = ca.members.clone();
        for &p in &cb.members {
            label[p] = a;
        }
        ca.members.extend_from_slice(&cb.members);
        ca.members.sort_unstable();
        ca.internal += cb.internal + cut.count;
        ca.degree_sum += cb.degree_sum;
        ca.error_sum += cb.error_sum + cut.error_sum;

        set.steps.push(FusionStep {
            left,
            right: cb.members,
            reward: f,
            modularity: q,
            fidelity,
        });
        if recorded.insert(ca.members.clone()) {
            set.triples.push(RegionTriple::from_members(graph, ca.members.clone()));
        }
    }
    Ok(set)
}
