//! Logical circuits: gate lists over a single qubit register.
//!
//! Only operand structure matters for layout synthesis; gate names and
//! parameters ride along so that circuits can be re-emitted and simulated.

mod expr;
mod qasm;

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use qasm::{load_qasm, parse_qasm, parse_qasm_with, ParseOptions, QasmError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Operands {
    Single(usize),
    Pair(usize, usize),
}

impl Operands {
    pub fn contains(&self, q: usize) -> bool {
        match *self {
            Operands::Single(a) => a == q,
            Operands::Pair(a, b) => a == q || b == q,
        }
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> {
        let (a, b) = match *self {
            Operands::Single(a) => (a, None),
            Operands::Pair(a, b) => (a, Some(b)),
        };
        std::iter::once(a).chain(b)
    }

    pub fn map(&self, f: impl Fn(usize) -> usize) -> Operands {
        match *self {
            Operands::Single(a) => Operands::Single(f(a)),
            Operands::Pair(a, b) => Operands::Pair(f(a), f(b)),
        }
    }
}

/// One gate. Its program-order index is its position in
/// [`LogicalCircuit::gates`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<f64>,
    pub operands: Operands,
}

impl Gate {
    pub fn single(name: impl Into<String>, q: usize) -> Self {
        Gate {
            name: name.into(),
            params: Vec::new(),
            operands: Operands::Single(q),
        }
    }

    pub fn pair(name: impl Into<String>, a: usize, b: usize) -> Self {
        Gate {
            name: name.into(),
            params: Vec::new(),
            operands: Operands::Pair(a, b),
        }
    }

    pub fn cx(a: usize, b: usize) -> Self {
        Gate::pair("cx", a, b)
    }

    pub fn with_params(mut self, params: Vec<f64>) -> Self {
        self.params = params;
        self
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self.operands, Operands::Pair(..))
    }

    pub fn is_swap(&self) -> bool {
        self.name == "swap" && self.is_two_qubit()
    }

    pub fn pair_operands(&self) -> Option<(usize, usize)> {
        match self.operands {
            Operands::Pair(a, b) => Some((a, b)),
            Operands::Single(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseWarning {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CircuitError {
    #[error("gate {index}: operand {qubit} out of range for {num_qubits} qubits")]
    OperandOutOfRange {
        index: usize,
        qubit: usize,
        num_qubits: usize,
    },
    #[error("gate {index}: two-qubit gate needs distinct operands, got {qubit} twice")]
    RepeatedOperand { index: usize, qubit: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogicalCircuit {
    num_qubits: usize,
    gates: Vec<Gate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    warnings: Vec<ParseWarning>,
}

/// Dependency DAG: `(i, j)` when gate `i` is the gate immediately preceding
/// gate `j` on some shared qubit. Edges are distinct and sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    pub num_gates: usize,
    pub edges: Vec<(usize, usize)>,
}

impl DependencyGraph {
    /// Number of dependency-chain edges.
    pub fn chain_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut preds = vec![Vec::new(); self.num_gates];
        for &(i, j) in &self.edges {
            preds[j].push(i);
        }
        preds
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitMetrics {
    pub num_qubits: usize,
    pub gate_count: usize,
    /// Layers of the ASAP schedule over all gates.
    pub depth: usize,
    pub two_qubit_count: usize,
    /// Distinct unordered operand pairs over two-qubit gates.
    pub logical_interaction_edges: usize,
}

impl LogicalCircuit {
    pub fn new(num_qubits: usize) -> Self {
        LogicalCircuit {
            num_qubits,
            gates: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn from_gates(num_qubits: usize, gates: Vec<Gate>) -> Result<Self, CircuitError> {
        let mut c = LogicalCircuit::new(num_qubits);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    /// Shorthand for a circuit made only of `cx` gates.
    pub fn from_pairs(num_qubits: usize, pairs: &[(usize, usize)]) -> Result<Self, CircuitError> {
        LogicalCircuit::from_gates(num_qubits, pairs.iter().map(|&(a, b)| Gate::cx(a, b)).collect())
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        let index = self.gates.len();
        for q in gate.operands.qubits() {
            if q >= self.num_qubits {
                return Err(CircuitError::OperandOutOfRange {
                    index,
                    qubit: q,
                    num_qubits: self.num_qubits,
                });
            }
        }
        if let Operands::Pair(a, b) = gate.operands {
            if a == b {
                return Err(CircuitError::RepeatedOperand { index, qubit: a });
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub(crate) fn push_warning(&mut self, line: usize, message: String) {
        self.warnings.push(ParseWarning { line, message });
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn warnings(&self) -> &[ParseWarning] {
        &self.warnings
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Program-order indices of the two-qubit gates.
    pub fn two_qubit_indices(&self) -> Vec<usize> {
        (0..self.gates.len())
            .filter(|&i| self.gates[i].is_two_qubit())
            .collect()
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    /// Distinct unordered operand pairs, sorted.
    pub fn interaction_edges(&self) -> Vec<(usize, usize)> {
        let set: BTreeSet<(usize, usize)> = self
            .gates
            .iter()
            .filter_map(Gate::pair_operands)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        set.into_iter().collect()
    }

    pub fn build_dependencies(&self) -> DependencyGraph {
        let mut last_on = vec![None::<usize>; self.num_qubits];
        let mut edges = BTreeSet::new();
        for (j, gate) in self.gates.iter().enumerate() {
            for q in gate.operands.qubits() {
                if let Some(i) = last_on[q].replace(j) {
                    edges.insert((i, j));
                }
            }
        }
        DependencyGraph {
            num_gates: self.gates.len(),
            edges: edges.into_iter().collect(),
        }
    }

    /// ASAP layer (1-based) of every gate.
    pub fn gate_layers(&self) -> Vec<usize> {
        let mut qubit_layer = vec![0usize; self.num_qubits];
        self.gates
            .iter()
            .map(|g| {
                let layer = g.operands.qubits().map(|q| qubit_layer[q]).max().unwrap_or(0) + 1;
                for q in g.operands.qubits() {
                    qubit_layer[q] = layer;
                }
                layer
            })
            .collect()
    }

    pub fn depth(&self) -> usize {
        self.gate_layers().into_iter().max().unwrap_or(0)
    }

    pub fn metrics(&self) -> CircuitMetrics {
        CircuitMetrics {
            num_qubits: self.num_qubits,
            gate_count: self.gates.len(),
            depth: self.depth(),
            two_qubit_count: self.two_qubit_count(),
            logical_interaction_edges: self.interaction_edges().len(),
        }
    }

    /// Same gates with every operand passed through `f`, on `num_qubits` wires.
    pub fn relabeled(
        &self,
        num_qubits: usize,
        f: impl Fn(usize) -> usize,
    ) -> Result<LogicalCircuit, CircuitError> {
        let gates = self
            .gates
            .iter()
            .map(|g| Gate {
                name: g.name.clone(),
                params: g.params.clone(),
                operands: g.operands.map(&f),
            })
            .collect();
        LogicalCircuit::from_gates(num_qubits, gates)
    }

    /// OpenQASM 2.0 text. Parameters are written in shortest round-trip form.
    pub fn to_qasm(&self) -> String {
        let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
        let _ = writeln!(out, "qreg q[{}];", self.num_qubits);
        for g in &self.gates {
            out.push_str(&g.name);
            if !g.params.is_empty() {
                let params: Vec<String> = g.params.iter().map(|p| format!("{p:?}")).collect();
                let _ = write!(out, "({})", params.join(","));
            }
            match g.operands {
                Operands::Single(a) => {
                    let _ = writeln!(out, " q[{a}];");
                }
                Operands::Pair(a, b) => {
                    let _ = writeln!(out, " q[{a}],q[{b}];");
                }
            }
        }
        out
    }
}
