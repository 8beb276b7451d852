//! Transition-based CNF model.
//!
//! Time is coarse: `T` blocks, each a set of two-qubit gates run under one
//! mapping, separated by layers of parallel swaps. Variables:
//!
//! * `x[q][t][p]`: logical `q` sits on physical `p` during block `t`
//!   (one-hot over `p`);
//! * `y[g][t]`: two-qubit gate `g` runs in block `t` (one-hot over `t`);
//! * `s[e][t]`: edge `e` swaps between block `t` and `t + 1`.

use std::collections::BTreeSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::cardinality::at_most_k;
use super::cnf::{Cnf, Family, FamilyCounts, Lit};
use crate::circuit::LogicalCircuit;
use crate::device::CouplingGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingBounds {
    /// Number of gate blocks `T`.
    pub blocks: usize,
    /// Swap budget `S`; `None` leaves the count free.
    pub swaps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error("infeasible bounds: need at least one block")]
    InfeasibleBounds,
    #[error("infeasible: {logical} logical qubits exceed {physical} physical qubits")]
    TooManyQubits { logical: usize, physical: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EncodingStats {
    pub n_var: usize,
    pub n_clause: usize,
    /// `T * (n_q + n_E) + n_G`: one group per one-hot position, swap flag
    /// and one-hot gate time, before one-hot expansion.
    pub variable_groups: usize,
    pub clauses_by_family: FamilyCounts,
    pub constraints_by_family: FamilyCounts,
    pub blocks: usize,
    pub swap_bound: Option<usize>,
    pub encode_seconds: f64,
}

/// Where each model variable lives.
#[derive(Debug, Clone)]
pub struct VarDirectory {
    pub num_logical: usize,
    pub num_physical: usize,
    pub num_edges: usize,
    pub blocks: usize,
    /// Circuit indices of the two-qubit gates, in program order.
    pub two_qubit_gates: Vec<usize>,
    mapping_base: Lit,
    time_base: Lit,
    swap_base: Lit,
}

impl VarDirectory {
    pub fn mapping(&self, q: usize, t: usize, p: usize) -> Lit {
        self.mapping_base + ((q * self.blocks + t) * self.num_physical + p) as Lit
    }

    /// `g` indexes [`VarDirectory::two_qubit_gates`].
    pub fn gate_time(&self, g: usize, t: usize) -> Lit {
        self.time_base + (g * self.blocks + t) as Lit
    }

    pub fn swap(&self, e: usize, t: usize) -> Lit {
        self.swap_base + (e * self.blocks + t) as Lit
    }

    /// Swap flags that may be true: every edge in every block but the last.
    pub fn live_swaps(&self) -> Vec<Lit> {
        (0..self.blocks.saturating_sub(1))
            .flat_map(|t| (0..self.num_edges).map(move |e| (e, t)))
            .map(|(e, t)| self.swap(e, t))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Encoding {
    pub cnf: Cnf,
    pub directory: VarDirectory,
    pub stats: EncodingStats,
}

impl Encoding {
    pub fn refresh_stats(&mut self) {
        self.stats.n_var = self.cnf.num_vars() as usize;
        self.stats.n_clause = self.cnf.num_clauses();
        self.stats.clauses_by_family = self.cnf.clauses_by_family();
        self.stats.constraints_by_family = self.cnf.constraints_by_family();
    }
}

/// Immediate-predecessor pairs among two-qubit gates only, as indices into
/// the two-qubit gate list.
pub fn two_qubit_dependencies(circuit: &LogicalCircuit, two_qubit: &[usize]) -> Vec<(usize, usize)> {
    let mut last = vec![None::<usize>; circuit.num_qubits()];
    let mut deps = BTreeSet::new();
    for (k, &gi) in two_qubit.iter().enumerate() {
        let (a, b) = circuit.gates()[gi].pair_operands().expect("two-qubit gate");
        for q in [a, b] {
            if let Some(prev) = last[q].replace(k) {
                deps.insert((prev, k));
            }
        }
    }
    deps.into_iter().collect()
}

pub fn encode(
    circuit: &LogicalCircuit,
    graph: &CouplingGraph,
    bounds: EncodingBounds,
) -> Result<Encoding, EncodeError> {
    let started = Instant::now();
    let n_q = circuit.num_qubits();
    let n_p = graph.num_qubits();
    let n_e = graph.num_edges();
    let t_max = bounds.blocks;
    if t_max == 0 {
        return Err(EncodeError::InfeasibleBounds);
    }
    if n_q > n_p {
        return Err(EncodeError::TooManyQubits {
            logical: n_q,
            physical: n_p,
        });
    }
    let two_qubit = circuit.two_qubit_indices();
    let n_g = two_qubit.len();

    let mut cnf = Cnf::new();
    let mapping_base = cnf.num_vars() as Lit + 1;
    cnf.new_vars(n_q * t_max * n_p);
    let time_base = cnf.num_vars() as Lit + 1;
    cnf.new_vars(n_g * t_max);
    let swap_base = cnf.num_vars() as Lit + 1;
    cnf.new_vars(n_e * t_max);
    let dir = VarDirectory {
        num_logical: n_q,
        num_physical: n_p,
        num_edges: n_e,
        blocks: t_max,
        two_qubit_gates: two_qubit.clone(),
        mapping_base,
        time_base,
        swap_base,
    };

    // injective mapping
    for q in 0..n_q {
        for t in 0..t_max {
            let lits: Vec<Lit> = (0..n_p).map(|p| dir.mapping(q, t, p)).collect();
            cnf.exactly_one(Family::Injective, &lits);
        }
    }
    if n_q > 1 {
        for t in 0..t_max {
            for p in 0..n_p {
                let lits: Vec<Lit> = (0..n_q).map(|q| dir.mapping(q, t, p)).collect();
                cnf.constraint(Family::Injective);
                cnf.at_most_one(Family::Injective, &lits);
            }
        }
    }

    // consistency: each gate runs once, on adjacent qubits
    for g in 0..n_g {
        let lits: Vec<Lit> = (0..t_max).map(|t| dir.gate_time(g, t)).collect();
        cnf.exactly_one(Family::Consistency, &lits);
        let (a, b) = circuit.gates()[two_qubit[g]].pair_operands().expect("two-qubit gate");
        for t in 0..t_max {
            cnf.constraint(Family::Consistency);
            for p in 0..n_p {
                let mut clause = vec![-dir.gate_time(g, t), -dir.mapping(a, t, p)];
                clause.extend(graph.neighbors(p).map(|n| dir.mapping(b, t, n)));
                cnf.clause(Family::Consistency, clause);
            }
        }
    }

    // dependency: a gate never runs in an earlier block than its predecessor
    for (before, after) in two_qubit_dependencies(circuit, &two_qubit) {
        cnf.constraint(Family::Dependency);
        for t in 0..t_max {
            let mut clause = vec![-dir.gate_time(after, t)];
            clause.extend((0..=t).map(|s| dir.gate_time(before, s)));
            cnf.clause(Family::Dependency, clause);
        }
    }

    // swaps: none after the last block, disjoint within a layer, budget
    cnf.constraint(Family::Swap);
    for e in 0..n_e {
        cnf.clause(Family::Swap, vec![-dir.swap(e, t_max - 1)]);
    }
    for t in 0..t_max.saturating_sub(1) {
        for p in 0..n_p {
            let incident: Vec<Lit> = graph.incident(p).iter().map(|&(_, e)| dir.swap(e, t)).collect();
            if incident.len() > 1 {
                cnf.constraint(Family::Swap);
                cnf.at_most_one(Family::Swap, &incident);
            }
        }
    }
    if let Some(s) = bounds.swaps {
        at_most_k(&mut cnf, Family::Swap, &dir.live_swaps(), s);
    }

    // transformation: mapping at t + 1 follows from mapping and swaps at t
    for t in 0..t_max.saturating_sub(1) {
        for q in 0..n_q {
            cnf.constraint(Family::Transformation);
            for (e, edge) in graph.edges().iter().enumerate() {
                let s = dir.swap(e, t);
                for (from, to) in [(edge.u, edge.v), (edge.v, edge.u)] {
                    cnf.clause(
                        Family::Transformation,
                        vec![-dir.mapping(q, t, from), -s, dir.mapping(q, t + 1, to)],
                    );
                }
            }
            for p in 0..n_p {
                let mut clause = vec![-dir.mapping(q, t, p), dir.mapping(q, t + 1, p)];
                clause.extend(graph.incident(p).iter().map(|&(_, e)| dir.swap(e, t)));
                cnf.clause(Family::Transformation, clause);
            }
        }
    }

    let mut encoding = Encoding {
        cnf,
        directory: dir,
        stats: EncodingStats {
            variable_groups: t_max * (n_q + n_e) + n_g,
            blocks: t_max,
            swap_bound: bounds.swaps,
            ..EncodingStats::default()
        },
    };
    encoding.refresh_stats();
    encoding.stats.encode_seconds = started.elapsed().as_secs_f64();
    Ok(encoding)
}
