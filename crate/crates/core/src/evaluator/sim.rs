//! Statevector simulation with a stochastic two-qubit Pauli channel.
//!
//! After every two-qubit gate on an edge with error `e`, one of the 15
//! non-identity two-qubit Paulis is applied with probability `e`, chosen
//! uniformly. Swaps run as three `cx` gates, each with its own draw.
//! Shot `i` draws from its own ChaCha streams derived from `(seed, i)`, so
//! results do not depend on how shots are batched.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::OutcomeDistribution;
use crate::circuit::{Gate, LogicalCircuit, Operands};
use crate::device::CouplingGraph;
use crate::solver::MappingSolution;

pub const MAX_SIM_QUBITS: usize = 12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("{qubits} qubits exceed the simulator cap of {cap}")]
    TooManyQubits { qubits: usize, cap: usize },
    #[error("gate {index}: cannot simulate `{name}` with {params} parameter(s)")]
    UnsupportedGate {
        index: usize,
        name: String,
        params: usize,
    },
    #[error("gate {index}: ({u},{v}) has no error rate in the noise model")]
    OffEdge { index: usize, u: usize, v: usize },
    #[error("measured wire {0} out of range")]
    BadMeasure(usize),
}

/// Error rate per unordered qubit pair.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NoiseModel {
    errors: HashMap<(usize, usize), f64>,
}

impl NoiseModel {
    pub fn from_graph(graph: &CouplingGraph) -> Self {
        NoiseModel {
            errors: graph.edges().iter().map(|e| ((e.u, e.v), e.error)).collect(),
        }
    }

    pub fn set(&mut self, a: usize, b: usize, error: f64) {
        self.errors.insert((a.min(b), a.max(b)), error);
    }

    pub fn error(&self, a: usize, b: usize) -> Option<f64> {
        self.errors.get(&(a.min(b), a.max(b))).copied()
    }
}

type Matrix = [[Complex64; 2]; 2];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn u3(theta: f64, phi: f64, lambda: f64) -> Matrix {
    let (s, co) = (theta / 2.0).sin_cos();
    [
        [c(co, 0.0), -Complex64::from_polar(s, lambda)],
        [Complex64::from_polar(s, phi), Complex64::from_polar(co, phi + lambda)],
    ]
}

fn diag(a: Complex64, b: Complex64) -> Matrix {
    [[a, c(0.0, 0.0)], [c(0.0, 0.0), b]]
}

fn single_matrix(name: &str, p: &[f64]) -> Option<Matrix> {
    let zero = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Some(match (name, p) {
        ("id", []) => diag(one, one),
        ("x", []) => [[zero, one], [one, zero]],
        ("y", []) => [[zero, c(0.0, -1.0)], [c(0.0, 1.0), zero]],
        ("z", []) => diag(one, -one),
        ("h", []) => [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]],
        ("s", []) => diag(one, c(0.0, 1.0)),
        ("sdg", []) => diag(one, c(0.0, -1.0)),
        ("t", []) => diag(one, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)),
        ("tdg", []) => diag(one, Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)),
        ("sx", []) => [[c(0.5, 0.5), c(0.5, -0.5)], [c(0.5, -0.5), c(0.5, 0.5)]],
        ("sxdg", []) => [[c(0.5, -0.5), c(0.5, 0.5)], [c(0.5, 0.5), c(0.5, -0.5)]],
        ("rx", [t]) => {
            let (s, co) = (t / 2.0).sin_cos();
            [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]
        }
        ("ry", [t]) => {
            let (s, co) = (t / 2.0).sin_cos();
            [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
        }
        ("rz", [t]) => diag(Complex64::from_polar(1.0, -t / 2.0), Complex64::from_polar(1.0, t / 2.0)),
        ("p" | "u1", [l]) => diag(one, Complex64::from_polar(1.0, *l)),
        ("u2", [phi, l]) => u3(std::f64::consts::FRAC_PI_2, *phi, *l),
        ("u3" | "u", [t, phi, l]) => u3(*t, *phi, *l),
        _ => return None,
    })
}

#[derive(Debug, Clone)]
enum Kind {
    Single(Matrix),
    Controlled(Matrix),
    Swap,
    Rzz(f64),
    Rxx(f64),
}

#[derive(Debug, Clone)]
struct Op {
    kind: Kind,
    a: usize,
    b: usize,
    /// Noise slot and its error probability.
    noise: Option<(usize, f64)>,
}

fn compile(circuit: &LogicalCircuit, noise: Option<&NoiseModel>) -> Result<(Vec<Op>, Vec<f64>), SimError> {
    let mut ops = Vec::new();
    let mut slots = Vec::new();
    let cx = single_matrix("x", &[]).expect("x");
    for (index, gate) in circuit.gates().iter().enumerate() {
        let unsupported = || SimError::UnsupportedGate {
            index,
            name: gate.name.clone(),
            params: gate.params.len(),
        };
        match gate.operands {
            Operands::Single(q) => {
                let m = single_matrix(&gate.name, &gate.params).ok_or_else(unsupported)?;
                ops.push(Op {
                    kind: Kind::Single(m),
                    a: q,
                    b: q,
                    noise: None,
                });
            }
            Operands::Pair(a, b) => {
                let p = gate.params.as_slice();
                let kinds: Vec<(Kind, usize, usize)> = match (gate.name.as_str(), p) {
                    ("swap", []) if noise.is_some() => {
                        vec![(Kind::Controlled(cx), a, b), (Kind::Controlled(cx), b, a), (Kind::Controlled(cx), a, b)]
                    }
                    ("swap", []) => vec![(Kind::Swap, a, b)],
                    ("cx", []) => vec![(Kind::Controlled(cx), a, b)],
                    ("cy", []) => vec![(Kind::Controlled(single_matrix("y", &[]).expect("y")), a, b)],
                    ("cz", []) => vec![(Kind::Controlled(single_matrix("z", &[]).expect("z")), a, b)],
                    ("ch", []) => vec![(Kind::Controlled(single_matrix("h", &[]).expect("h")), a, b)],
                    ("cp" | "cu1", [l]) => vec![(Kind::Controlled(single_matrix("p", &[*l]).expect("p")), a, b)],
                    ("crx", [t]) => vec![(Kind::Controlled(single_matrix("rx", &[*t]).expect("rx")), a, b)],
                    ("cry", [t]) => vec![(Kind::Controlled(single_matrix("ry", &[*t]).expect("ry")), a, b)],
                    ("crz", [t]) => vec![(Kind::Controlled(single_matrix("rz", &[*t]).expect("rz")), a, b)],
                    ("cu3", [t, phi, l]) => vec![(Kind::Controlled(u3(*t, *phi, *l)), a, b)],
                    ("rzz", [t]) => vec![(Kind::Rzz(*t), a, b)],
                    ("rxx", [t]) => vec![(Kind::Rxx(*t), a, b)],
                    _ => return Err(unsupported()),
                };
                let error = match noise {
                    Some(model) => Some(model.error(a, b).ok_or(SimError::OffEdge { index, u: a, v: b })?),
                    None => None,
                };
                for (kind, x, y) in kinds {
                    let slot = error.map(|e| {
                        slots.push(e);
                        (slots.len() - 1, e)
                    });
                    ops.push(Op {
                        kind,
                        a: x,
                        b: y,
                        noise: slot,
                    });
                }
            }
        }
    }
    Ok((ops, slots))
}

fn apply_single(state: &mut [Complex64], q: usize, m: &Matrix) {
    let bit = 1usize << q;
    for i in 0..state.len() {
        if i & bit == 0 {
            let (x, y) = (state[i], state[i | bit]);
            state[i] = m[0][0] * x + m[0][1] * y;
            state[i | bit] = m[1][0] * x + m[1][1] * y;
        }
    }
}

fn apply_controlled(state: &mut [Complex64], control: usize, target: usize, m: &Matrix) {
    let (cb, tb) = (1usize << control, 1usize << target);
    for i in 0..state.len() {
        if i & cb != 0 && i & tb == 0 {
            let (x, y) = (state[i], state[i | tb]);
            state[i] = m[0][0] * x + m[0][1] * y;
            state[i | tb] = m[1][0] * x + m[1][1] * y;
        }
    }
}

fn apply_rzz(state: &mut [Complex64], a: usize, b: usize, theta: f64) {
    let even = Complex64::from_polar(1.0, -theta / 2.0);
    let odd = Complex64::from_polar(1.0, theta / 2.0);
    for (i, amp) in state.iter_mut().enumerate() {
        let parity = (i >> a ^ i >> b) & 1;
        *amp *= if parity == 0 { even } else { odd };
    }
}

fn apply(state: &mut [Complex64], op: &Op) {
    match &op.kind {
        Kind::Single(m) => apply_single(state, op.a, m),
        Kind::Controlled(m) => apply_controlled(state, op.a, op.b, m),
        Kind::Swap => {
            let (ab, bb) = (1usize << op.a, 1usize << op.b);
            for i in 0..state.len() {
                if i & ab != 0 && i & bb == 0 {
                    state.swap(i, i ^ ab ^ bb);
                }
            }
        }
        Kind::Rzz(t) => apply_rzz(state, op.a, op.b, *t),
        Kind::Rxx(t) => {
            let h = single_matrix("h", &[]).expect("h");
            apply_single(state, op.a, &h);
            apply_single(state, op.b, &h);
            apply_rzz(state, op.a, op.b, *t);
            apply_single(state, op.a, &h);
            apply_single(state, op.b, &h);
        }
    }
}

fn apply_pauli(state: &mut [Complex64], q: usize, which: u8) {
    if which != 0 {
        let name = ["id", "x", "y", "z"][which as usize];
        apply_single(state, q, &single_matrix(name, &[]).expect("pauli"));
    }
}

fn evolve(num_qubits: usize, ops: &[Op], errors: &[(usize, u8)]) -> Vec<Complex64> {
    let mut state = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
    state[0] = Complex64::new(1.0, 0.0);
    let mut next_error = errors.iter().peekable();
    for op in ops {
        apply(&mut state, op);
        if let Some((slot, _)) = op.noise {
            while let Some(&&(s, pauli)) = next_error.peek() {
                if s != slot {
                    break;
                }
                // pauli in 1..16: high pair of bits on `a`, low pair on `b`
                apply_pauli(&mut state, op.a, pauli >> 2);
                apply_pauli(&mut state, op.b, pauli & 3);
                next_error.next();
            }
        }
    }
    state
}

fn check_size(circuit: &LogicalCircuit) -> Result<(), SimError> {
    if circuit.num_qubits() > MAX_SIM_QUBITS {
        return Err(SimError::TooManyQubits {
            qubits: circuit.num_qubits(),
            cap: MAX_SIM_QUBITS,
        });
    }
    Ok(())
}

/// Final noiseless state, qubit 0 as the least significant index bit.
pub fn statevector(circuit: &LogicalCircuit) -> Result<Vec<Complex64>, SimError> {
    check_size(circuit)?;
    let (ops, _) = compile(circuit, None)?;
    Ok(evolve(circuit.num_qubits(), &ops, &[]))
}

fn measured(num_qubits: usize, measure: Option<&[usize]>) -> Result<Vec<usize>, SimError> {
    match measure {
        None => Ok((0..num_qubits).collect()),
        Some(wires) => {
            if let Some(&w) = wires.iter().find(|&&w| w >= num_qubits) {
                return Err(SimError::BadMeasure(w));
            }
            Ok(wires.to_vec())
        }
    }
}

/// Probability of each outcome index over the measured wires.
fn marginal(state: &[Complex64], wires: &[usize]) -> Vec<f64> {
    let mut probs = vec![0.0; 1 << wires.len()];
    for (i, amp) in state.iter().enumerate() {
        let mut k = 0;
        for (bit, &w) in wires.iter().enumerate() {
            k |= (i >> w & 1) << bit;
        }
        probs[k] += amp.norm_sqr();
    }
    probs
}

fn bitstring(k: usize, width: usize) -> String {
    (0..width).rev().map(|b| if k >> b & 1 == 1 { '1' } else { '0' }).collect()
}

fn cumulative(probs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    probs
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect()
}

fn draw(cdf: &[f64], u: f64) -> usize {
    let total = *cdf.last().expect("non-empty");
    let target = u * total;
    cdf.partition_point(|&c| c <= target).min(cdf.len() - 1)
}

/// Exact noiseless outcome distribution over `measure` (all wires if
/// `None`); bit `i` of each outcome is wire `measure[i]`.
pub fn ideal_distribution(
    circuit: &LogicalCircuit,
    measure: Option<&[usize]>,
) -> Result<OutcomeDistribution, SimError> {
    let wires = measured(circuit.num_qubits(), measure)?;
    let state = statevector(circuit)?;
    let probabilities = marginal(&state, &wires)
        .into_iter()
        .enumerate()
        .filter(|&(_, p)| p > 1e-14)
        .map(|(k, p)| (bitstring(k, wires.len()), p))
        .collect();
    Ok(OutcomeDistribution::exact(probabilities))
}

fn shot_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Samples `shots` outcomes. Without noise every shot comes from the ideal
/// state; the outcome draw of shot `i` uses the same stream with or without
/// noise, so error-free shots agree between noisy and noiseless runs.
pub fn simulate(
    circuit: &LogicalCircuit,
    noise: Option<&NoiseModel>,
    measure: Option<&[usize]>,
    shots: usize,
    seed: u64,
) -> Result<OutcomeDistribution, SimError> {
    check_size(circuit)?;
    let wires = measured(circuit.num_qubits(), measure)?;
    let (ops, slots) = compile(circuit, noise)?;
    let n = circuit.num_qubits();
    let ideal = cumulative(&marginal(&evolve(n, &ops, &[]), &wires));
    let mut cache: HashMap<Vec<(usize, u8)>, Vec<f64>> = HashMap::new();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();

    for shot in 0..shots as u64 {
        let mut noise_rng = shot_rng(seed, 2 * shot + 1);
        let mut errors = Vec::new();
        for (slot, &e) in slots.iter().enumerate() {
            if e > 0.0 && noise_rng.gen_bool(e.min(1.0)) {
                errors.push((slot, noise_rng.gen_range(1u8..16)));
            }
        }
        let u: f64 = shot_rng(seed, 2 * shot).gen();
        let k = if errors.is_empty() {
            draw(&ideal, u)
        } else {
            let cdf = cache
                .entry(errors.clone())
                .or_insert_with(|| cumulative(&marginal(&evolve(n, &ops, &errors), &wires)));
            draw(cdf, u)
        };
        *counts.entry(bitstring(k, wires.len())).or_default() += 1;
    }
    if shots == 0 {
        return Ok(OutcomeDistribution::exact(BTreeMap::new()));
    }
    Ok(OutcomeDistribution::from_counts(&counts))
}

/// A routed circuit cut down to the wires it touches.
#[derive(Debug, Clone)]
pub struct CompactCircuit {
    pub circuit: LogicalCircuit,
    pub noise: NoiseModel,
    /// Compact wire holding each logical qubit at the end, in logical order.
    pub measure: Vec<usize>,
    /// Device qubit behind each compact wire.
    pub wires: Vec<usize>,
}

pub fn compact_routed(solution: &MappingSolution, device: &CouplingGraph) -> CompactCircuit {
    let mut wires: Vec<usize> = solution.used_physical();
    for g in solution.routed_circuit.gates() {
        wires.extend(g.operands.qubits());
    }
    wires.sort_unstable();
    wires.dedup();
    let mut local = vec![usize::MAX; device.num_qubits().max(solution.num_physical)];
    for (i, &w) in wires.iter().enumerate() {
        local[w] = i;
    }
    let gates: Vec<Gate> = solution
        .routed_circuit
        .gates()
        .iter()
        .map(|g| Gate {
            name: g.name.clone(),
            params: g.params.clone(),
            operands: g.operands.map(|p| local[p]),
        })
        .collect();
    let circuit = LogicalCircuit::from_gates(wires.len(), gates).expect("relabelled onto touched wires");
    let mut noise = NoiseModel::default();
    for (i, &a) in wires.iter().enumerate() {
        for (j, &b) in wires.iter().enumerate().skip(i + 1) {
            if let Some(e) = device.edge_between(a, b) {
                noise.set(i, j, e.error);
            }
        }
    }
    let measure = solution.final_mapping().iter().map(|&p| local[p]).collect();
    CompactCircuit {
        circuit,
        noise,
        measure,
        wires,
    }
}
