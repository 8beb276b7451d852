//! Quality and complexity metrics for layouts.

mod estimate;
mod sim;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use estimate::{
    complexity_estimates, pruning_ratios, ComplexityInputs, ComplexityReport, Estimates,
    PruningRatios,
};
pub use sim::{
    compact_routed, ideal_distribution, simulate, statevector, CompactCircuit, NoiseModel,
    SimError, MAX_SIM_QUBITS,
};

use crate::circuit::LogicalCircuit;
use crate::device::CouplingGraph;

/// Probabilities over bitstrings, written with qubit 0 rightmost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub probabilities: BTreeMap<String, f64>,
    /// Samples behind the estimate; 0 for exact distributions.
    pub shots: usize,
}

impl OutcomeDistribution {
    pub fn from_counts(counts: &BTreeMap<String, usize>) -> Self {
        let shots: usize = counts.values().sum();
        OutcomeDistribution {
            probabilities: counts
                .iter()
                .map(|(k, &c)| (k.clone(), c as f64 / shots as f64))
                .collect(),
            shots,
        }
    }

    pub fn exact(probabilities: BTreeMap<String, f64>) -> Self {
        OutcomeDistribution {
            probabilities,
            shots: 0,
        }
    }

    pub fn get(&self, outcome: &str) -> f64 {
        self.probabilities.get(outcome).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probabilities.values().sum()
    }
}

/// `(1 - 0.5 * sum (sqrt(p) - sqrt(q))^2)^2` over the union of supports.
///
/// For normalized inputs the inner term equals `sum sqrt(p_i q_i)`; squaring
/// that sum as `sum w_i + 2 sum_{i<j} sqrt(w_i w_j)` with `w_i = p_i q_i`
/// keeps closed-form cases such as a single shared outcome exact.
pub fn hellinger_fidelity(p: &OutcomeDistribution, q: &OutcomeDistribution) -> f64 {
    let overlap: Vec<f64> = p
        .probabilities
        .iter()
        .map(|(k, &pv)| pv * q.get(k))
        .filter(|&w| w > 0.0)
        .collect();
    let mut cross = 0.0;
    for (i, &a) in overlap.iter().enumerate() {
        for &b in &overlap[i + 1..] {
            cross += (a * b).sqrt();
        }
    }
    (overlap.iter().sum::<f64>() + 2.0 * cross).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FidelityError {
    #[error("gate {index} acts on ({u},{v}), which is not a coupling edge")]
    OffEdge { index: usize, u: usize, v: usize },
}

/// Product of `1 - e` over two-qubit gates, a swap counting as three gates.
pub fn analytic_fidelity(routed: &LogicalCircuit, graph: &CouplingGraph) -> Result<f64, FidelityError> {
    let mut fidelity = 1.0;
    for (index, gate) in routed.gates().iter().enumerate() {
        if let Some((u, v)) = gate.pair_operands() {
            let e = graph
                .edge_between(u, v)
                .ok_or(FidelityError::OffEdge { index, u, v })?;
            let uses = if gate.is_swap() { 3 } else { 1 };
            fidelity *= (1.0 - e.error).powi(uses);
        }
    }
    Ok(fidelity)
}
