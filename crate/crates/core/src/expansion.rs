//! Growing a selected region by whole neighbor rings, and cutting the device
//! down to the grown region.

use serde::{Deserialize, Serialize};

use crate::device::{CouplingEdge, CouplingGraph};
use crate::region::{RegionError, RegionTriple, TripleSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingRegion {
    /// Sorted device qubit ids.
    pub qubits: Vec<usize>,
    /// Indices of every device edge with both endpoints in `qubits`.
    pub edges: Vec<usize>,
    pub origin: RegionTriple,
    pub k_applied: usize,
}

impl MappingRegion {
    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Qubits added by expansion.
    pub fn ancillas(&self) -> Vec<usize> {
        self.qubits
            .iter()
            .copied()
            .filter(|p| self.origin.members.binary_search(p).is_err())
            .collect()
    }
}

/// `k` rounds, each absorbing every neighbor of the current set.
pub fn expand(graph: &CouplingGraph, triple: &RegionTriple, k: usize) -> MappingRegion {
    let mut inside = vec![false; graph.num_qubits()];
    let mut frontier: Vec<usize> = triple.members.clone();
    for &p in &frontier {
        inside[p] = true;
    }
    for _ in 0..k {
        let mut next = Vec::new();
        for &p in &frontier {
            for n in graph.neighbors(p) {
                if !inside[n] {
                    inside[n] = true;
                    next.push(n);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    let qubits: Vec<usize> = (0..graph.num_qubits()).filter(|&p| inside[p]).collect();
    let edges = graph.induced_edges(&qubits);
    MappingRegion {
        qubits,
        edges,
        origin: triple.clone(),
        k_applied: k,
    }
}

/// A region cut out as a standalone graph over local ids `0..n`, assigned in
/// ascending device id order.
#[derive(Debug, Clone)]
pub struct RestrictedGraph {
    pub graph: CouplingGraph,
    to_device: Vec<usize>,
    to_local: Vec<Option<usize>>,
}

impl RestrictedGraph {
    pub fn device_id(&self, local: usize) -> usize {
        self.to_device[local]
    }

    pub fn local_id(&self, device: usize) -> Option<usize> {
        self.to_local.get(device).copied().flatten()
    }

    pub fn translation(&self) -> &[usize] {
        &self.to_device
    }
}

pub fn restrict_graph(graph: &CouplingGraph, region: &MappingRegion) -> RestrictedGraph {
    let mut to_local = vec![None; graph.num_qubits()];
    for (local, &p) in region.qubits.iter().enumerate() {
        to_local[p] = Some(local);
    }
    let edges = region.edges.iter().map(|&i| {
        let e = &graph.edges()[i];
        CouplingEdge {
            u: to_local[e.u].expect("edge inside region"),
            v: to_local[e.v].expect("edge inside region"),
            error: e.error,
        }
    });
    let name = format!("{}[region {}]", graph.name(), region.qubits.len());
    let restricted = CouplingGraph::new(name, region.qubits.len(), edges)
        .expect("sub-graph of a valid graph is valid");
    RestrictedGraph {
        graph: restricted,
        to_device: region.qubits.clone(),
        to_local,
    }
}

/// Smallest recorded region with room for `n_q` qubits, grown by `k` rings.
pub fn select_and_expand(
    graph: &CouplingGraph,
    triples: &TripleSet,
    n_q: usize,
    k: usize,
) -> Result<MappingRegion, RegionError> {
    let triple = triples.best_region_for(n_q)?;
    Ok(expand(graph, triple, k))
}
