//! Solving inside a fused and expanded region instead of the whole device.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::search::{solve, SolveError, SolveOptions, SolveOutcome};
use crate::circuit::LogicalCircuit;
use crate::device::CouplingGraph;
use crate::expansion::{expand, restrict_graph, MappingRegion};
use crate::region::{recursive_community_fusion, FusionConfig, RegionError, TripleSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionalOptions {
    pub fusion: FusionConfig,
    pub expand_k: usize,
    /// Retry once with one more expansion ring when the region admits no
    /// layout.
    pub retry_on_infeasible: bool,
    pub solve: SolveOptions,
}

impl Default for RegionalOptions {
    fn default() -> Self {
        RegionalOptions {
            fusion: FusionConfig::default(),
            expand_k: 1,
            retry_on_infeasible: true,
            solve: SolveOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSummary {
    pub qubits: Vec<usize>,
    pub num_edges: usize,
    pub mean_error: f64,
    pub origin_size: usize,
    pub k_applied: usize,
    pub retried: bool,
    pub device_qubits: usize,
    pub device_edges: usize,
    pub fusion_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct RegionalSolve {
    /// Solutions are translated back to device qubit ids.
    pub outcome: SolveOutcome,
    pub region: MappingRegion,
    pub summary: RegionSummary,
}

#[derive(Debug, thiserror::Error)]
pub enum RegionalError {
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

fn mean_error(graph: &CouplingGraph, region: &MappingRegion) -> f64 {
    if region.edges.is_empty() {
        return 0.0;
    }
    region.edges.iter().map(|&e| graph.edges()[e].error).sum::<f64>() / region.edges.len() as f64
}

/// Solves on `region` and maps the result back onto `device`.
pub fn solve_on_region(
    circuit: &LogicalCircuit,
    device: &CouplingGraph,
    region: &MappingRegion,
    options: &SolveOptions,
) -> Result<SolveOutcome, SolveError> {
    let restricted = restrict_graph(device, region);
    Ok(match solve(circuit, &restricted.graph, options)? {
        SolveOutcome::Solved(s) => {
            SolveOutcome::Solved(s.translated(restricted.translation(), device.num_qubits()))
        }
        other => other,
    })
}

pub fn solve_regional(
    circuit: &LogicalCircuit,
    device: &CouplingGraph,
    options: &RegionalOptions,
) -> Result<RegionalSolve, RegionalError> {
    let started = Instant::now();
    let n_q = circuit.num_qubits();
    if n_q > device.num_qubits() {
        let region = expand(device, &crate::region::RegionTriple::from_members(device, vec![]), 0);
        return Ok(RegionalSolve {
            outcome: SolveOutcome::Infeasible(format!(
                "{n_q} logical qubits exceed {} physical qubits",
                device.num_qubits()
            )),
            summary: summarize(device, &region, 0.0, false),
            region,
        });
    }
    let triples: TripleSet = recursive_community_fusion(device, &options.fusion)?;
    let fusion_seconds = started.elapsed().as_secs_f64();
    let triple = triples.best_region_for(n_q.max(1))?;

    let remaining = |limit: Option<Duration>| limit.map(|l| l.saturating_sub(started.elapsed()));
    let mut solve_options = options.solve.clone();
    solve_options.time_limit = remaining(options.solve.time_limit);

    let mut region = expand(device, triple, options.expand_k);
    let mut outcome = solve_on_region(circuit, device, &region, &solve_options)?;
    let mut retried = false;
    if matches!(outcome, SolveOutcome::Infeasible(_)) && options.retry_on_infeasible {
        let wider = expand(device, triple, options.expand_k + 1);
        if wider.qubits != region.qubits {
            retried = true;
            region = wider;
            solve_options.time_limit = remaining(options.solve.time_limit);
            outcome = solve_on_region(circuit, device, &region, &solve_options)?;
        }
    }
    Ok(RegionalSolve {
        summary: summarize(device, &region, fusion_seconds, retried),
        outcome,
        region,
    })
}

fn summarize(
    device: &CouplingGraph,
    region: &MappingRegion,
    fusion_seconds: f64,
    retried: bool,
) -> RegionSummary {
    RegionSummary {
        qubits: region.qubits.clone(),
        num_edges: region.edges.len(),
        mean_error: mean_error(device, region),
        origin_size: region.origin.size,
        k_applied: region.k_applied,
        retried,
        device_qubits: device.num_qubits(),
        device_edges: device.num_edges(),
        fusion_seconds,
    }
}
