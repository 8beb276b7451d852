//! Pruning ratios and first-order size estimates for two SAT encodings: a
//! plan-based one (`qs-v2`) and the transition-based one implemented here
//! (`tbolsq2`). Every big-O is evaluated with constant 1.

use serde::{Deserialize, Serialize};

use crate::circuit::LogicalCircuit;
use crate::device::CouplingGraph;
use crate::solver::encode::two_qubit_dependencies;

/// Best/worst region-size bounds for `n_q` qubits, clamped to the device,
/// and the device-to-region ratios built from their averages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PruningRatios {
    pub n_p_best: f64,
    pub n_p_worst: f64,
    pub n_e_best: f64,
    pub n_e_worst: f64,
    pub n_p_avg: f64,
    pub n_e_avg: f64,
    pub r_aq: f64,
    pub r_ae: f64,
}

impl PruningRatios {
    pub fn compute(n_p: usize, n_e: usize, d_max: usize, n_q: usize) -> Self {
        let (n_p, n_e, d, q) = (n_p as f64, n_e as f64, d_max as f64, n_q as f64);
        let n_p_best = (q + 1.0).min(n_p);
        let n_p_worst = (q * d + 1.0).min(n_p);
        let n_e_best = (q * d / 2.0 + 1.0).min(n_e);
        let n_e_worst = (d / 2.0 * (q * d + 1.0)).min(n_e);
        let n_p_avg = (n_p_best + n_p_worst) / 2.0;
        let n_e_avg = (n_e_best + n_e_worst) / 2.0;
        let ratio = |total: f64, avg: f64| if avg > 0.0 { total / avg } else { 1.0 };
        PruningRatios {
            n_p_best,
            n_p_worst,
            n_e_best,
            n_e_worst,
            n_p_avg,
            n_e_avg,
            r_aq: ratio(n_p, n_p_avg),
            r_ae: ratio(n_e, n_e_avg),
        }
    }

    /// Both ratios 1: no pruning.
    pub fn identity() -> Self {
        PruningRatios {
            n_p_best: 0.0,
            n_p_worst: 0.0,
            n_e_best: 0.0,
            n_e_worst: 0.0,
            n_p_avg: 0.0,
            n_e_avg: 0.0,
            r_aq: 1.0,
            r_ae: 1.0,
        }
    }
}

pub fn pruning_ratios(graph: &CouplingGraph, n_q: usize) -> PruningRatios {
    PruningRatios::compute(graph.num_qubits(), graph.num_edges(), graph.max_degree(), n_q)
}

/// Symbols the estimates are written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityInputs {
    pub n_p: usize,
    pub n_e: usize,
    pub n_q: usize,
    /// Two-qubit gates.
    pub n_g: usize,
    /// Edges of the logical interaction graph.
    pub n_el: usize,
    /// Edges of the gate dependency chain.
    pub b: usize,
    pub t: usize,
    pub s: usize,
    pub d_max: usize,
    pub d_min: usize,
}

impl ComplexityInputs {
    pub fn new(circuit: &LogicalCircuit, graph: &CouplingGraph, t: usize, s: usize) -> Self {
        ComplexityInputs {
            n_p: graph.num_qubits(),
            n_e: graph.num_edges(),
            n_q: circuit.num_qubits(),
            n_g: circuit.two_qubit_count(),
            n_el: circuit.interaction_edges().len(),
            b: two_qubit_dependencies(circuit, &circuit.two_qubit_indices()).len(),
            t,
            s,
            d_max: graph.max_degree(),
            d_min: graph.min_degree(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimates {
    pub qs_v2_vars: f64,
    pub qs_v2_clauses: f64,
    pub tbolsq2_vars: f64,
    pub tbolsq2_constraints: f64,
}

impl Estimates {
    fn terms(&self) -> [f64; 4] {
        [self.qs_v2_vars, self.qs_v2_clauses, self.tbolsq2_vars, self.tbolsq2_constraints]
    }

    /// True if every estimate is at most the matching one in `other`.
    pub fn dominated_by(&self, other: &Estimates) -> bool {
        self.terms().iter().zip(other.terms()).all(|(a, b)| *a <= b)
    }
}

fn estimates(i: &ComplexityInputs, r_aq: f64, r_ae: f64) -> Estimates {
    let f = |x: usize| x as f64;
    let (t, n_p, n_e, n_q, n_g, n_el) = (f(i.t), f(i.n_p), f(i.n_e), f(i.n_q), f(i.n_g), f(i.n_el));
    Estimates {
        qs_v2_vars: t * (n_q * n_p / r_aq + n_el + n_g),
        qs_v2_clauses: t * (n_q * n_p / r_aq + n_q * n_e / r_ae + n_el * n_p * n_p / (r_aq * r_aq) + n_g),
        tbolsq2_vars: t * (n_q + n_e / r_ae) + n_g,
        tbolsq2_constraints: t * (n_q * n_q + (n_g + f(i.d_max) + n_q) * n_e / r_ae + n_q * n_p / r_aq)
            + f(i.b),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub inputs: ComplexityInputs,
    pub ratios: PruningRatios,
    pub baseline: Estimates,
    pub regional: Estimates,
}

pub fn complexity_estimates(inputs: &ComplexityInputs, ratios: &PruningRatios) -> ComplexityReport {
    ComplexityReport {
        inputs: *inputs,
        ratios: *ratios,
        baseline: estimates(inputs, 1.0, 1.0),
        regional: estimates(inputs, ratios.r_aq, ratios.r_ae),
    }
}
