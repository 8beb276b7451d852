//! Coupling graphs with per-edge two-qubit error rates.
//!
//! A [`CouplingGraph`] is the hardware model: dense physical qubit ids
//! `0..n`, undirected coupling edges, and the two-qubit gate error measured
//! on each edge. Graphs are immutable once built, so they can be shared
//! freely between threads.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DeviceError {
    #[error("device document parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("no qubits")]
    NoQubits,
    #[error("edges[{index}]: endpoint {qubit} does not exist on a {num_qubits}-qubit device")]
    DanglingEndpoint {
        index: usize,
        qubit: i64,
        num_qubits: usize,
    },
    #[error("edges[{index}]: self-loop on qubit {qubit}")]
    SelfLoop { index: usize, qubit: usize },
    #[error("edges[{index}]: duplicate edge ({u}, {v})")]
    DuplicateEdge { index: usize, u: usize, v: usize },
    #[error("edges[{index}]: error rate {value} outside [0, 1)")]
    InvalidErrorRate { index: usize, value: f64 },
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Physical qubit index, dense and zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PhysicalQubit(pub usize);

impl fmt::Display for PhysicalQubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

/// An undirected coupler. Endpoints are stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingEdge {
    pub u: usize,
    pub v: usize,
    /// Two-qubit gate error rate on this coupler.
    pub error: f64,
}

impl CouplingEdge {
    pub fn endpoints(&self) -> (usize, usize) {
        (self.u, self.v)
    }

    pub fn touches(&self, p: usize) -> bool {
        self.u == p || self.v == p
    }

    pub fn other(&self, p: usize) -> usize {
        if self.u == p {
            self.v
        } else {
            self.u
        }
    }
}

impl From<(usize, usize, f64)> for CouplingEdge {
    fn from((u, v, error): (usize, usize, f64)) -> Self {
        CouplingEdge { u, v, error }
    }
}

/// How generators assign error rates to edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorModel {
    Uniform(f64),
    /// Independent uniform draws from `[low, high)`, one per edge in edge order.
    Random { seed: u64, low: f64, high: f64 },
}

impl ErrorModel {
    pub fn seeded(seed: u64) -> Self {
        ErrorModel::Random {
            seed,
            low: 0.001,
            high: 0.05,
        }
    }

    fn assign(&self, pairs: Vec<(usize, usize)>) -> Vec<CouplingEdge> {
        match *self {
            ErrorModel::Uniform(error) => pairs
                .into_iter()
                .map(|(u, v)| CouplingEdge { u, v, error })
                .collect(),
            ErrorModel::Random { seed, low, high } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                pairs
                    .into_iter()
                    .map(|(u, v)| {
                        let error = if high > low { rng.gen_range(low..high) } else { low };
                        CouplingEdge { u, v, error }
                    })
                    .collect()
            }
        }
    }
}

/// Serialized form of a device: `{"name", "qubits", "edges": [{"u","v","error"}]}`.
/// Unknown fields are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceDocument {
    #[serde(default)]
    pub name: String,
    pub qubits: usize,
    #[serde(default)]
    pub edges: Vec<EdgeRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub u: i64,
    pub v: i64,
    pub error: f64,
}

#[derive(Debug, Clone)]
pub struct CouplingGraph {
    name: String,
    num_qubits: usize,
    edges: Vec<CouplingEdge>,
    /// Per qubit: `(neighbor, edge index)` sorted by neighbor.
    adjacency: Vec<Vec<(usize, usize)>>,
    edge_lookup: HashMap<(usize, usize), usize>,
    max_degree: usize,
    min_degree: usize,
}

impl CouplingGraph {
    pub fn new(
        name: impl Into<String>,
        num_qubits: usize,
        edges: impl IntoIterator<Item = impl Into<CouplingEdge>>,
    ) -> Result<Self, DeviceError> {
        if num_qubits == 0 {
            return Err(DeviceError::NoQubits);
        }
        let mut normalized = Vec::new();
        let mut edge_lookup = HashMap::new();
        let mut adjacency = vec![Vec::new(); num_qubits];
        for (index, edge) in edges.into_iter().enumerate() {
            let edge: CouplingEdge = edge.into();
            for q in [edge.u, edge.v] {
                if q >= num_qubits {
                    return Err(DeviceError::DanglingEndpoint {
                        index,
                        qubit: q as i64,
                        num_qubits,
                    });
                }
            }
            if edge.u == edge.v {
                return Err(DeviceError::SelfLoop {
                    index,
                    qubit: edge.u,
                });
            }
            if !edge.error.is_finite() || !(0.0..1.0).contains(&edge.error) {
                return Err(DeviceError::InvalidErrorRate {
                    index,
                    value: edge.error,
                });
            }
            let (u, v) = (edge.u.min(edge.v), edge.u.max(edge.v));
            if edge_lookup.insert((u, v), normalized.len()).is_some() {
                return Err(DeviceError::DuplicateEdge { index, u, v });
            }
            adjacency[u].push((v, normalized.len()));
            adjacency[v].push((u, normalized.len()));
            normalized.push(CouplingEdge {
                u,
                v,
                error: edge.error,
            });
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let max_degree = adjacency.iter().map(Vec::len).max().unwrap_or(0);
        let min_degree = adjacency.iter().map(Vec::len).min().unwrap_or(0);
        Ok(CouplingGraph {
            name: name.into(),
            num_qubits,
            edges: normalized,
            adjacency,
            edge_lookup,
            max_degree,
            min_degree,
        })
    }

    /// Builds a graph from a parsed device document.
    pub fn from_document(doc: &DeviceDocument) -> Result<Self, DeviceError> {
        if doc.qubits == 0 {
            return Err(DeviceError::NoQubits);
        }
        let mut edges = Vec::with_capacity(doc.edges.len());
        for (index, e) in doc.edges.iter().enumerate() {
            for q in [e.u, e.v] {
                if q < 0 || q as usize >= doc.qubits {
                    return Err(DeviceError::DanglingEndpoint {
                        index,
                        qubit: q,
                        num_qubits: doc.qubits,
                    });
                }
            }
            edges.push(CouplingEdge {
                u: e.u as usize,
                v: e.v as usize,
                error: e.error,
            });
        }
        CouplingGraph::new(doc.name.clone(), doc.qubits, edges)
    }

    pub fn to_document(&self) -> DeviceDocument {
        DeviceDocument {
            name: self.name.clone(),
            qubits: self.num_qubits,
            edges: self
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    u: e.u as i64,
                    v: e.v as i64,
                    error: e.error,
                })
                .collect(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[CouplingEdge] {
        &self.edges
    }

    pub fn qubits(&self) -> impl Iterator<Item = PhysicalQubit> {
        (0..self.num_qubits).map(PhysicalQubit)
    }

    pub fn neighbors(&self, p: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[p].iter().map(|&(n, _)| n)
    }

    /// `(neighbor, edge index)` pairs of `p`, sorted by neighbor.
    pub fn incident(&self, p: usize) -> &[(usize, usize)] {
        &self.adjacency[p]
    }

    pub fn degree(&self, p: usize) -> usize {
        self.adjacency[p].len()
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn min_degree(&self) -> usize {
        self.min_degree
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_lookup.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<&CouplingEdge> {
        self.edge_index(a, b).map(|i| &self.edges[i])
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.edge_index(a, b).is_some()
    }

    pub fn mean_error(&self) -> f64 {
        if self.edges.is_empty() {
            return 0.0;
        }
        self.edges.iter().map(|e| e.error).sum::<f64>() / self.edges.len() as f64
    }

    /// Hop distances from `source`; `None` for unreachable qubits.
    pub fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.num_qubits];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(p) = queue.pop_front() {
            let d = dist[p].unwrap();
            for n in self.neighbors(p) {
                if dist[n].is_none() {
                    dist[n] = Some(d + 1);
                    queue.push_back(n);
                }
            }
        }
        dist
    }

    /// Largest finite hop distance over all pairs (0 for a single qubit).
    pub fn diameter(&self) -> usize {
        (0..self.num_qubits)
            .flat_map(|s| self.distances_from(s).into_iter().flatten())
            .max()
            .unwrap_or(0)
    }

    /// Connected components as sorted qubit lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.num_qubits];
        let mut out = Vec::new();
        for start in 0..self.num_qubits {
            if seen[start] {
                continue;
            }
            let mut comp = Vec::new();
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(p) = stack.pop() {
                comp.push(p);
                for n in self.neighbors(p) {
                    if !seen[n] {
                        seen[n] = true;
                        stack.push(n);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// Indices of the edges with both endpoints in `members`.
    pub fn induced_edges(&self, members: &[usize]) -> Vec<usize> {
        let mut inside = vec![false; self.num_qubits];
        for &m in members {
            inside[m] = true;
        }
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| inside[e.u] && inside[e.v])
            .map(|(i, _)| i)
            .collect()
    }

    /// True if the subgraph induced by `members` is connected (vacuously for
    /// zero or one member).
    pub fn induces_connected(&self, members: &[usize]) -> bool {
        if members.len() <= 1 {
            return true;
        }
        let mut inside = vec![false; self.num_qubits];
        for &m in members {
            inside[m] = true;
        }
        let mut seen = vec![false; self.num_qubits];
        let mut stack = vec![members[0]];
        seen[members[0]] = true;
        let mut reached = 1;
        while let Some(p) = stack.pop() {
            for n in self.neighbors(p) {
                if inside[n] && !seen[n] {
                    seen[n] = true;
                    reached += 1;
                    stack.push(n);
                }
            }
        }
        reached == members.len()
    }
}

/// Parses a device document from JSON text.
pub fn parse_device(text: &str) -> Result<CouplingGraph, DeviceError> {
    let doc: DeviceDocument = serde_json::from_str(text).map_err(|e| DeviceError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    CouplingGraph::from_document(&doc)
}

pub fn load_device(path: impl AsRef<Path>) -> Result<CouplingGraph, DeviceError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| DeviceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_device(&text)
}

/// Rectangular grid, qubit `r * cols + c`, coupled to horizontal and vertical
/// neighbors. Edges are emitted row by row, horizontal before vertical.
pub fn generate_grid(rows: usize, cols: usize, errors: ErrorModel) -> CouplingGraph {
    assert!(rows * cols >= 1, "grid needs at least one qubit");
    let mut pairs = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let p = r * cols + c;
            if c + 1 < cols {
                pairs.push((p, p + 1));
            }
            if r + 1 < rows {
                pairs.push((p, p + cols));
            }
        }
    }
    CouplingGraph::new(format!("grid_{rows}x{cols}"), rows * cols, errors.assign(pairs))
        .expect("grid construction is valid")
}

/// Heavy-hex lattice in the row/bridge layout used by IBM devices.
///
/// There are `d + 1` rows, each a chain of `4d + 3` qubits. Consecutive rows
/// are joined through degree-2 bridge qubits attached at chain positions
/// `0, 4, 8, ...` below even rows and `2, 6, 10, ...` below odd rows, so
/// every cell is a 12-qubit heavy hexagon. `d = 1` is a single hexagon with
/// its two tails; the qubit count is `(d + 1)(5d + 3)`.
pub fn generate_heavy_hex(d: usize, errors: ErrorModel) -> CouplingGraph {
    assert!(d >= 1, "heavy-hex distance must be positive");
    let row_len = 4 * d + 3;
    let rows = d + 1;
    let mut pairs = Vec::new();
    let mut next = 0usize;
    let mut row_start = Vec::with_capacity(rows);
    for r in 0..rows {
        row_start.push(next);
        for i in 0..row_len - 1 {
            pairs.push((next + i, next + i + 1));
        }
        next += row_len;
        if r + 1 < rows {
            let offset = if r % 2 == 0 { 0 } else { 2 };
            // Bridge qubits are numbered after the row above and before the
            // row below; their lower edges are patched in once that row exists.
            let mut pending = Vec::new();
            for pos in (offset..row_len).step_by(4) {
                pairs.push((row_start[r] + pos, next));
                pending.push((next, pos));
                next += 1;
            }
            let below = next;
            for (bridge, pos) in pending {
                pairs.push((bridge, below + pos));
            }
        }
    }
    CouplingGraph::new(format!("heavy_hex_d{d}"), next, errors.assign(pairs))
        .expect("heavy-hex construction is valid")
}

/// The 5-qubit IBM QX2 coupling map.
pub fn qx2(errors: ErrorModel) -> CouplingGraph {
    let pairs = vec![(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)];
    CouplingGraph::new("ibm_qx2", 5, errors.assign(pairs)).expect("qx2 is valid")
}
