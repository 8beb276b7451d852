//! Decoded layouts and the routed circuits they induce.

use serde::{Deserialize, Serialize};

use super::encode::{EncodingStats, VarDirectory};
use crate::circuit::{Gate, LogicalCircuit};
use crate::device::CouplingGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ScheduledSwap {
    /// Swap layer between block `step` and `step + 1`.
    pub step: usize,
    pub u: usize,
    pub v: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    /// Encoding that produced the returned solution (or the last one tried).
    pub encoding: EncodingStats,
    pub solver_calls: usize,
    pub encodings_built: usize,
    pub encode_seconds: f64,
    pub solve_seconds: f64,
    pub total_seconds: f64,
    /// The search ran to completion, so the swap count is optimal under the
    /// chosen policy.
    pub complete: bool,
    pub timed_out: bool,
    pub solve_graph_qubits: usize,
    pub solve_graph_edges: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingSolution {
    /// Qubit count of the graph the ids below refer to.
    pub num_physical: usize,
    /// Logical qubit `q` starts on `initial_mapping[q]`.
    pub initial_mapping: Vec<usize>,
    /// `mapping_trace[t][q]`: position of `q` during block `t`.
    pub mapping_trace: Vec<Vec<usize>>,
    pub swap_schedule: Vec<ScheduledSwap>,
    /// Block of every circuit gate, indexed like the circuit.
    pub gate_schedule: Vec<usize>,
    /// Gates and swaps over physical ids, in execution order.
    pub routed_circuit: LogicalCircuit,
    pub stats: SolveStats,
}

impl MappingSolution {
    pub fn swap_count(&self) -> usize {
        self.swap_schedule.len()
    }

    pub fn blocks(&self) -> usize {
        self.mapping_trace.len()
    }

    pub fn final_mapping(&self) -> &[usize] {
        self.mapping_trace.last().map_or(&[], Vec::as_slice)
    }

    /// Routed depth with each swap counted as one gate.
    pub fn depth(&self) -> usize {
        self.routed_circuit.depth()
    }

    /// Physical qubits holding a logical qubit at some point.
    pub fn used_physical(&self) -> Vec<usize> {
        let mut used: Vec<usize> = self.mapping_trace.iter().flatten().copied().collect();
        used.sort_unstable();
        used.dedup();
        used
    }

    /// Rewrites every physical id through `to_device`, onto a device with
    /// `device_qubits` qubits.
    pub fn translated(&self, to_device: &[usize], device_qubits: usize) -> MappingSolution {
        let map = |p: usize| to_device[p];
        let mut swaps: Vec<ScheduledSwap> = self
            .swap_schedule
            .iter()
            .map(|s| {
                let (a, b) = (map(s.u), map(s.v));
                ScheduledSwap {
                    step: s.step,
                    u: a.min(b),
                    v: a.max(b),
                }
            })
            .collect();
        swaps.sort_unstable();
        MappingSolution {
            num_physical: device_qubits,
            initial_mapping: self.initial_mapping.iter().map(|&p| map(p)).collect(),
            mapping_trace: self
                .mapping_trace
                .iter()
                .map(|step| step.iter().map(|&p| map(p)).collect())
                .collect(),
            swap_schedule: swaps,
            gate_schedule: self.gate_schedule.clone(),
            routed_circuit: self
                .routed_circuit
                .relabeled(device_qubits, map)
                .expect("translation stays on the device"),
            stats: self.stats.clone(),
        }
    }
}

/// Reads a model back into a solution over the solve graph.
pub(crate) fn decode(
    circuit: &LogicalCircuit,
    graph: &CouplingGraph,
    dir: &VarDirectory,
    model: &[bool],
) -> MappingSolution {
    let value = |lit: i32| model[lit as usize - 1];
    let blocks = dir.blocks;
    let n_q = dir.num_logical;
    let n_p = dir.num_physical;

    let mapping_trace: Vec<Vec<usize>> = (0..blocks)
        .map(|t| {
            (0..n_q)
                .map(|q| {
                    (0..n_p)
                        .find(|&p| value(dir.mapping(q, t, p)))
                        .expect("one-hot position")
                })
                .collect()
        })
        .collect();

    let mut swap_schedule = Vec::new();
    for t in 0..blocks {
        for (e, edge) in graph.edges().iter().enumerate() {
            if value(dir.swap(e, t)) {
                swap_schedule.push(ScheduledSwap {
                    step: t,
                    u: edge.u,
                    v: edge.v,
                });
            }
        }
    }

    // two-qubit gates carry their own block; single-qubit gates ride with
    // the latest earlier gate on their qubit
    let mut gate_schedule = vec![0usize; circuit.gates().len()];
    for (k, &gi) in dir.two_qubit_gates.iter().enumerate() {
        gate_schedule[gi] = (0..blocks)
            .find(|&t| value(dir.gate_time(k, t)))
            .expect("one-hot gate time");
    }
    let mut latest = vec![0usize; n_q];
    for (gi, gate) in circuit.gates().iter().enumerate() {
        if !gate.is_two_qubit() {
            let q = gate.operands.qubits().next().expect("one operand");
            gate_schedule[gi] = latest[q];
        }
        for q in gate.operands.qubits() {
            latest[q] = gate_schedule[gi];
        }
    }

    let routed_circuit = build_routed(circuit, n_p, &mapping_trace, &gate_schedule, &swap_schedule);
    MappingSolution {
        num_physical: n_p,
        initial_mapping: mapping_trace[0].clone(),
        mapping_trace,
        swap_schedule,
        gate_schedule,
        routed_circuit,
        stats: SolveStats::default(),
    }
}

/// Block by block: the block's gates in program order under that block's
/// mapping, then the swap layer that follows it.
pub(crate) fn build_routed(
    circuit: &LogicalCircuit,
    num_physical: usize,
    trace: &[Vec<usize>],
    gate_schedule: &[usize],
    swaps: &[ScheduledSwap],
) -> LogicalCircuit {
    let mut routed = LogicalCircuit::new(num_physical);
    for (t, mapping) in trace.iter().enumerate() {
        for (gi, gate) in circuit.gates().iter().enumerate() {
            if gate_schedule[gi] == t {
                let physical = Gate {
                    name: gate.name.clone(),
                    params: gate.params.clone(),
                    operands: gate.operands.map(|q| mapping[q]),
                };
                routed.push(physical).expect("injective mapping onto the graph");
            }
        }
        for s in swaps.iter().filter(|s| s.step == t) {
            routed
                .push(Gate::pair("swap", s.u, s.v))
                .expect("swap on a graph edge");
        }
    }
    routed
}
