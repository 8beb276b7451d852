//! Checks a solution against the circuit and graph without looking at the
//! encoding.

use std::collections::HashSet;

use super::solution::MappingSolution;
use crate::circuit::{LogicalCircuit, Operands};
use crate::device::CouplingGraph;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValidationError {
    #[error("shape: {0}")]
    Shape(String),
    #[error("block {step}: mapping is not injective onto the graph ({detail})")]
    NotInjective { step: usize, detail: String },
    #[error("gate {gate}: operands on {u} and {v} are not adjacent in block {step}")]
    NotAdjacent {
        gate: usize,
        step: usize,
        u: usize,
        v: usize,
    },
    #[error("block {step}: next mapping does not follow from the scheduled swaps")]
    BadTransition { step: usize },
    #[error("swap ({u},{v}) at step {step} is not a coupling edge")]
    SwapOffGraph { step: usize, u: usize, v: usize },
    #[error("step {step}: swaps overlap on qubit {qubit}")]
    OverlappingSwaps { step: usize, qubit: usize },
    #[error("gate {after} is scheduled before its predecessor {before}")]
    DependencyViolated { before: usize, after: usize },
    #[error("routed circuit: {0}")]
    Routed(String),
}

pub fn validate_solution(
    circuit: &LogicalCircuit,
    graph: &CouplingGraph,
    solution: &MappingSolution,
) -> Result<(), ValidationError> {
    let n_q = circuit.num_qubits();
    let n_p = graph.num_qubits();
    let trace = &solution.mapping_trace;
    if trace.is_empty() {
        return Err(ValidationError::Shape("empty mapping trace".into()));
    }
    if solution.gate_schedule.len() != circuit.gates().len() {
        return Err(ValidationError::Shape(format!(
            "{} scheduled gates for {} circuit gates",
            solution.gate_schedule.len(),
            circuit.gates().len()
        )));
    }
    if solution.initial_mapping != trace[0] {
        return Err(ValidationError::Shape("initial mapping differs from block 0".into()));
    }

    // (a) injective per block
    for (step, mapping) in trace.iter().enumerate() {
        if mapping.len() != n_q {
            return Err(ValidationError::NotInjective {
                step,
                detail: format!("{} entries for {n_q} qubits", mapping.len()),
            });
        }
        let mut seen = HashSet::new();
        for &p in mapping {
            if p >= n_p || !seen.insert(p) {
                return Err(ValidationError::NotInjective {
                    step,
                    detail: format!("position {p}"),
                });
            }
        }
    }

    // (b) two-qubit gates on edges
    for (gi, gate) in circuit.gates().iter().enumerate() {
        let step = solution.gate_schedule[gi];
        if step >= trace.len() {
            return Err(ValidationError::Shape(format!("gate {gi} scheduled in block {step}")));
        }
        if let Operands::Pair(a, b) = gate.operands {
            let (u, v) = (trace[step][a], trace[step][b]);
            if !graph.are_adjacent(u, v) {
                return Err(ValidationError::NotAdjacent { gate: gi, step, u, v });
            }
        }
    }

    // (d) swaps on edges and disjoint per layer; none after the last block
    let mut touched: HashSet<(usize, usize)> = HashSet::new();
    for s in &solution.swap_schedule {
        if !graph.are_adjacent(s.u, s.v) {
            return Err(ValidationError::SwapOffGraph {
                step: s.step,
                u: s.u,
                v: s.v,
            });
        }
        if s.step + 1 >= trace.len() {
            return Err(ValidationError::Shape(format!("swap after the last block at {}", s.step)));
        }
        for q in [s.u, s.v] {
            if !touched.insert((s.step, q)) {
                return Err(ValidationError::OverlappingSwaps {
                    step: s.step,
                    qubit: q,
                });
            }
        }
    }

    // (c) transitions are exactly the scheduled transpositions
    for step in 0..trace.len() - 1 {
        let mut expected = trace[step].clone();
        for s in solution.swap_schedule.iter().filter(|s| s.step == step) {
            for p in expected.iter_mut() {
                if *p == s.u {
                    *p = s.v;
                } else if *p == s.v {
                    *p = s.u;
                }
            }
        }
        if expected != trace[step + 1] {
            return Err(ValidationError::BadTransition { step });
        }
    }

    // (e) dependency order along each qubit's gate sequence
    for (before, after) in circuit.build_dependencies().edges {
        if solution.gate_schedule[before] > solution.gate_schedule[after] {
            return Err(ValidationError::DependencyViolated { before, after });
        }
    }

    replay_routed(circuit, graph, solution)
}

/// Replays the routed circuit from the initial mapping: every non-swap gate
/// must be the next ready circuit gate on the logical qubits it lands on,
/// two-qubit operations must sit on edges, and the replay must consume the
/// whole circuit and end in the final mapping.
pub fn replay_routed(
    circuit: &LogicalCircuit,
    graph: &CouplingGraph,
    solution: &MappingSolution,
) -> Result<(), ValidationError> {
    let routed = &solution.routed_circuit;
    let n_p = graph.num_qubits();
    if routed.num_qubits() != n_p {
        return Err(ValidationError::Routed(format!(
            "{} wires for a {n_p}-qubit graph",
            routed.num_qubits()
        )));
    }
    let mut occupant: Vec<Option<usize>> = vec![None; n_p];
    for (q, &p) in solution.initial_mapping.iter().enumerate() {
        occupant[p] = Some(q);
    }
    // per logical qubit, the circuit gates touching it in program order
    let mut queues: Vec<Vec<usize>> = vec![Vec::new(); circuit.num_qubits()];
    for (gi, gate) in circuit.gates().iter().enumerate() {
        for q in gate.operands.qubits() {
            queues[q].push(gi);
        }
    }
    let mut heads = vec![0usize; circuit.num_qubits()];
    let mut swaps = 0;

    for (ri, gate) in routed.gates().iter().enumerate() {
        if let Some((u, v)) = gate.pair_operands() {
            if !graph.are_adjacent(u, v) {
                return Err(ValidationError::Routed(format!(
                    "gate {ri} acts on non-adjacent {u},{v}"
                )));
            }
        }
        if gate.is_swap() {
            let (u, v) = gate.pair_operands().expect("pair");
            occupant.swap(u, v);
            swaps += 1;
            continue;
        }
        let logical: Vec<usize> = gate
            .operands
            .qubits()
            .map(|p| {
                occupant[p].ok_or_else(|| {
                    ValidationError::Routed(format!("gate {ri} acts on empty qubit {p}"))
                })
            })
            .collect::<Result<_, _>>()?;
        let next = queues[logical[0]].get(heads[logical[0]]).copied();
        let gi = next.ok_or_else(|| {
            ValidationError::Routed(format!("gate {ri} has no remaining circuit gate"))
        })?;
        let original = &circuit.gates()[gi];
        let expected: Vec<usize> = original.operands.qubits().collect();
        if expected != logical || original.name != gate.name || original.params != gate.params {
            return Err(ValidationError::Routed(format!(
                "gate {ri} does not match circuit gate {gi}"
            )));
        }
        for &q in &logical {
            if queues[q].get(heads[q]) != Some(&gi) {
                return Err(ValidationError::Routed(format!(
                    "gate {ri} runs circuit gate {gi} out of order"
                )));
            }
            heads[q] += 1;
        }
    }
    if heads.iter().zip(&queues).any(|(&h, q)| h != q.len()) {
        return Err(ValidationError::Routed("circuit gates left unexecuted".into()));
    }
    if swaps != solution.swap_schedule.len() {
        return Err(ValidationError::Routed(format!(
            "{swaps} swaps routed, {} scheduled",
            solution.swap_schedule.len()
        )));
    }
    for (q, &p) in solution.final_mapping().iter().enumerate() {
        if occupant[p] != Some(q) {
            return Err(ValidationError::Routed(format!(
                "logical {q} does not end on {p}"
            )));
        }
    }
    Ok(())
}
