//! Outer search over the block count `T` and swap budget `S`.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::backend::{BackendError, BackendKind, SatOutcome, SolverBackend};
use super::cardinality::SequentialCounter;
use super::cnf::Family;
use super::encode::{encode, EncodeError, EncodingBounds};
use super::solution::{decode, MappingSolution, SolveStats};
use crate::circuit::LogicalCircuit;
use crate::device::CouplingGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SearchPolicy {
    /// Fewest blocks first, then fewest swaps at that block count.
    DepthThenSwaps,
    /// Fewest swaps over all block counts; among those, the fewest blocks
    /// the sweep reached them at.
    #[default]
    SwapOptimal,
}

impl fmt::Display for SearchPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchPolicy::DepthThenSwaps => "depth-then-swaps",
            SearchPolicy::SwapOptimal => "swap-optimal",
        })
    }
}

impl FromStr for SearchPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "depth-then-swaps" => Ok(SearchPolicy::DepthThenSwaps),
            "swap-optimal" => Ok(SearchPolicy::SwapOptimal),
            _ => Err(format!(
                "unknown policy `{s}` (expected `depth-then-swaps` or `swap-optimal`)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub policy: SearchPolicy,
    pub time_limit: Option<Duration>,
    pub backend: BackendKind,
    /// Overrides the default block cap.
    pub max_blocks: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            policy: SearchPolicy::default(),
            time_limit: Some(Duration::from_secs(3600)),
            backend: BackendKind::Embedded,
            max_blocks: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveOutcome {
    Solved(MappingSolution),
    /// The limit passed before any layout was found.
    Timeout(SolveStats),
    Infeasible(String),
}

impl SolveOutcome {
    pub fn solution(&self) -> Option<&MappingSolution> {
        match self {
            SolveOutcome::Solved(s) => Some(s),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SolveOutcome::Solved(_) => "solved",
            SolveOutcome::Timeout(_) => "timeout",
            SolveOutcome::Infeasible(_) => "infeasible",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error(transparent)]
    Backend(#[from] BackendError),
}

/// Largest block count the search tries. Some optimal layout routes one swap
/// per layer, so it needs at most `S* + 1` blocks, and `S*` never exceeds
/// `n_G * (diameter - 1)`: each gate can be made adjacent by walking one
/// operand along a shortest path.
pub fn block_cap(circuit: &LogicalCircuit, graph: &CouplingGraph) -> usize {
    let n_g = circuit.two_qubit_count();
    1 + n_g * graph.diameter().saturating_sub(1)
}

enum AtBlocks {
    Found(MappingSolution, bool),
    Unsat,
    Timeout,
}

struct Search<'a> {
    circuit: &'a LogicalCircuit,
    graph: &'a CouplingGraph,
    options: &'a SolveOptions,
    deadline: Option<Instant>,
    stats: SolveStats,
}

impl Search<'_> {
    fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn call(
        &mut self,
        backend: &mut dyn SolverBackend,
        assumptions: &[i32],
    ) -> Result<SatOutcome, SolveError> {
        let started = Instant::now();
        let out = backend.solve(assumptions, self.deadline)?;
        self.stats.solver_calls += 1;
        self.stats.solve_seconds += started.elapsed().as_secs_f64();
        Ok(out)
    }

    /// Fewest swaps at `blocks`, restricted to at most `ceiling` if given.
    /// The flag is false when the minimization was cut short.
    fn at_blocks(&mut self, blocks: usize, ceiling: Option<usize>) -> Result<AtBlocks, SolveError> {
        if self.expired() {
            return Ok(AtBlocks::Timeout);
        }
        let bounds = EncodingBounds { blocks, swaps: None };
        let mut encoding = match encode(self.circuit, self.graph, bounds) {
            Ok(e) => e,
            Err(EncodeError::TooManyQubits { .. }) | Err(EncodeError::InfeasibleBounds) => {
                return Ok(AtBlocks::Unsat)
            }
        };
        self.stats.encodings_built += 1;
        self.stats.encode_seconds += encoding.stats.encode_seconds;
        let mut backend = self.options.backend.create();
        backend.add_clauses(encoding.cnf.num_vars(), encoding.cnf.clauses());
        let live = encoding.directory.live_swaps();

        let count = |model: &[bool]| live.iter().filter(|&&l| model[l as usize - 1]).count();

        // optional ceiling first, then tighten one swap at a time
        let mut counter: Option<SequentialCounter> = None;
        let mut assumptions = Vec::new();
        if let Some(c) = ceiling {
            if c < live.len() {
                let added_from = encoding.cnf.num_clauses();
                let built = SequentialCounter::build(&mut encoding.cnf, Family::Swap, &live, c + 1);
                backend.add_clauses(encoding.cnf.num_vars(), &encoding.cnf.clauses()[added_from..]);
                assumptions = built.at_most(c).into_iter().collect();
                counter = Some(built);
            }
        }
        let mut best = match self.call(backend.as_mut(), &assumptions)? {
            SatOutcome::Sat(model) => model,
            SatOutcome::Unsat => return Ok(AtBlocks::Unsat),
            SatOutcome::Unknown => return Ok(AtBlocks::Timeout),
        };
        let mut swaps = count(&best);
        let mut complete = true;
        while swaps > 0 {
            if counter.as_ref().map_or(true, |c| c.capacity() < swaps) {
                let added_from = encoding.cnf.num_clauses();
                counter = Some(SequentialCounter::build(&mut encoding.cnf, Family::Swap, &live, swaps));
                backend.add_clauses(encoding.cnf.num_vars(), &encoding.cnf.clauses()[added_from..]);
            }
            let bound = counter
                .as_ref()
                .and_then(|c| c.at_most(swaps - 1))
                .expect("counter covers the current count");
            match self.call(backend.as_mut(), &[bound])? {
                SatOutcome::Sat(model) => {
                    swaps = count(&model);
                    best = model;
                }
                SatOutcome::Unsat => break,
                SatOutcome::Unknown => {
                    complete = false;
                    break;
                }
            }
        }
        encoding.refresh_stats();
        encoding.stats.swap_bound = Some(swaps);
        let mut solution = decode(self.circuit, self.graph, &encoding.directory, &best);
        solution.stats.encoding = encoding.stats;
        Ok(AtBlocks::Found(solution, complete))
    }

    fn finish(&mut self, started: Instant, mut solution: MappingSolution, complete: bool) -> SolveOutcome {
        self.stats.complete = complete;
        self.stats.timed_out = !complete;
        self.stats.total_seconds = started.elapsed().as_secs_f64();
        self.stats.encoding = solution.stats.encoding.clone();
        solution.stats = self.stats.clone();
        SolveOutcome::Solved(solution)
    }
}

pub fn solve(
    circuit: &LogicalCircuit,
    graph: &CouplingGraph,
    options: &SolveOptions,
) -> Result<SolveOutcome, SolveError> {
    let started = Instant::now();
    let n_q = circuit.num_qubits();
    let n_p = graph.num_qubits();
    if n_q > n_p {
        return Ok(SolveOutcome::Infeasible(format!(
            "{n_q} logical qubits exceed {n_p} physical qubits"
        )));
    }
    let mut search = Search {
        circuit,
        graph,
        options,
        deadline: options.time_limit.map(|d| started + d),
        stats: SolveStats {
            solve_graph_qubits: n_p,
            solve_graph_edges: graph.num_edges(),
            ..SolveStats::default()
        },
    };
    let cap = options.max_blocks.unwrap_or_else(|| block_cap(circuit, graph)).max(1);

    let mut best: Option<MappingSolution> = None;
    for blocks in 1..=cap {
        let ceiling = best.as_ref().map(|b| b.swap_count() - 1);
        match search.at_blocks(blocks, ceiling)? {
            AtBlocks::Found(solution, complete) => {
                let done = !complete
                    || options.policy == SearchPolicy::DepthThenSwaps
                    || solution.swap_count() + 1 <= blocks;
                best = Some(solution);
                if done {
                    let s = best.take().expect("just set");
                    return Ok(search.finish(started, s, complete));
                }
            }
            AtBlocks::Unsat => {}
            AtBlocks::Timeout => {
                search.stats.timed_out = true;
                search.stats.total_seconds = started.elapsed().as_secs_f64();
                return Ok(match best {
                    Some(s) => search.finish(started, s, false),
                    None => SolveOutcome::Timeout(search.stats),
                });
            }
        }
        if best.as_ref().is_some_and(|b| b.swap_count() + 1 <= blocks) {
            break;
        }
    }
    match best {
        // the sweep reached `S + 1` blocks without beating `S`
        Some(s) => Ok(search.finish(started, s, true)),
        None => Ok(SolveOutcome::Infeasible(format!(
            "no layout within {cap} blocks (bound cap reached)"
        ))),
    }
}
