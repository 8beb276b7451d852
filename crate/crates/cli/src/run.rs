//! Executes single instances and whole suites.

use std::fmt;
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use qmap_core::circuit::{load_qasm, LogicalCircuit};
use qmap_core::device::CouplingGraph;
use qmap_core::evaluator::{analytic_fidelity, compact_routed, hellinger_fidelity, simulate};
use qmap_core::expansion::MappingRegion;
use qmap_core::region::FusionConfig;
use qmap_core::solver::{
    solve, solve_regional, validate_solution, BackendKind, MappingSolution, RegionalOptions, SearchPolicy,
    SolveOptions, SolveOutcome, SolveStats,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::manifest::Manifest;
use crate::report::{Outcome, RegionInfo, RunRecord, SuiteReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Solve on the whole coupling graph.
    Baseline,
    /// Solve inside the fused and expanded region.
    Regional,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Baseline => "baseline",
            Mode::Regional => "regional",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FidelityMode {
    #[default]
    Analytic,
    Simulated,
    Both,
    None,
}

impl FidelityMode {
    fn analytic(self) -> bool {
        matches!(self, FidelityMode::Analytic | FidelityMode::Both)
    }

    fn simulated(self) -> bool {
        matches!(self, FidelityMode::Simulated | FidelityMode::Both)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub time_limit: Option<Duration>,
    pub policy: SearchPolicy,
    pub backend: BackendKind,
    pub omega: f64,
    pub expand_k: usize,
    pub retry: bool,
    pub fidelity: FidelityMode,
    pub shots: usize,
    pub seed: u64,
    pub jobs: usize,
    /// Drops every wall-clock field so reports are reproducible byte for byte.
    pub no_timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            time_limit: Some(Duration::from_secs(3600)),
            policy: SearchPolicy::default(),
            backend: BackendKind::Embedded,
            omega: FusionConfig::default().omega,
            expand_k: 1,
            retry: true,
            fidelity: FidelityMode::default(),
            shots: 1024,
            seed: 0,
            jobs: 1,
            no_timing: false,
        }
    }
}

impl RunOptions {
    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            policy: self.policy,
            time_limit: self.time_limit,
            backend: self.backend.clone(),
            max_blocks: None,
        }
    }

    pub fn regional_options(&self) -> RegionalOptions {
        RegionalOptions {
            fusion: FusionConfig::with_omega(self.omega),
            expand_k: self.expand_k,
            retry_on_infeasible: self.retry,
            solve: self.solve_options(),
        }
    }
}

/// A finished instance: its record plus the artifacts `map` writes out.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub record: RunRecord,
    /// Only present when the record is solved and validated.
    pub solution: Option<MappingSolution>,
    pub region: Option<MappingRegion>,
}

fn scrub_timing(stats: &mut SolveStats) {
    stats.encode_seconds = 0.0;
    stats.solve_seconds = 0.0;
    stats.total_seconds = 0.0;
    stats.encoding.encode_seconds = 0.0;
}

pub fn run_one(
    circuit: &LogicalCircuit,
    circuit_id: &str,
    device: &CouplingGraph,
    device_id: &str,
    mode: Mode,
    options: &RunOptions,
) -> RunOutput {
    let mut record = RunRecord::new(circuit_id, device_id, mode);
    let started = Instant::now();
    let (outcome, region) = match mode {
        Mode::Baseline => (solve(circuit, device, &options.solve_options()).map_err(|e| e.to_string()), None),
        Mode::Regional => match solve_regional(circuit, device, &options.regional_options()) {
            Ok(run) => {
                let mut summary = run.summary;
                if options.no_timing {
                    summary.fusion_seconds = 0.0;
                }
                record.region = Some(RegionInfo::from_summary(&summary));
                (Ok(run.outcome), Some(run.region))
            }
            Err(e) => (Err(e.to_string()), None),
        },
    };
    if !options.no_timing {
        record.wall_seconds = Some(started.elapsed().as_secs_f64());
    }

    let outcome = match outcome {
        Ok(o) => o,
        Err(message) => {
            record.outcome = Outcome::Error;
            record.message = Some(message);
            return RunOutput { record, solution: None, region };
        }
    };
    let mut solution = match outcome {
        SolveOutcome::Solved(s) => s,
        SolveOutcome::Timeout(mut stats) => {
            if options.no_timing {
                scrub_timing(&mut stats);
            }
            record.outcome = Outcome::Timeout;
            record.timed_out = true;
            record.encoding = Some(stats.encoding);
            record.solver_calls = Some(stats.solver_calls);
            return RunOutput { record, solution: None, region };
        }
        SolveOutcome::Infeasible(why) => {
            record.outcome = Outcome::Infeasible;
            record.message = Some(why);
            return RunOutput { record, solution: None, region };
        }
    };
    if options.no_timing {
        scrub_timing(&mut solution.stats);
    }

    // never report a layout the independent validator rejects
    if let Err(e) = validate_solution(circuit, device, &solution) {
        record.outcome = Outcome::Error;
        record.message = Some(format!("solution failed validation: {e}"));
        return RunOutput { record, solution: None, region };
    }

    record.outcome = Outcome::Solved;
    record.complete = Some(solution.stats.complete);
    record.timed_out = solution.stats.timed_out;
    record.depth = Some(solution.depth());
    record.swaps = Some(solution.swap_count());
    record.blocks = Some(solution.blocks());
    record.encoding = Some(solution.stats.encoding.clone());
    record.solver_calls = Some(solution.stats.solver_calls);

    if options.fidelity.analytic() {
        match analytic_fidelity(&solution.routed_circuit, device) {
            Ok(f) => record.analytic_fidelity = Some(f),
            Err(e) => record.notes.push(format!("analytic fidelity: {e}")),
        }
    }
    if options.fidelity.simulated() {
        match simulated_fidelity(&solution, device, options.shots, options.seed) {
            Ok(f) => record.simulated_fidelity = Some(f),
            Err(e) => record.notes.push(format!("simulated fidelity: {e}")),
        }
    }
    RunOutput {
        record,
        solution: Some(solution),
        region,
    }
}

/// Hellinger fidelity between noisy and noiseless sampling of the routed
/// circuit at the same seed.
pub fn simulated_fidelity(solution: &MappingSolution, device: &CouplingGraph, shots: usize, seed: u64) -> Result<f64> {
    let compact = compact_routed(solution, device);
    let ideal = simulate(&compact.circuit, None, Some(&compact.measure), shots, seed)?;
    let noisy = simulate(&compact.circuit, Some(&compact.noise), Some(&compact.measure), shots, seed)?;
    Ok(hellinger_fidelity(&noisy, &ideal))
}

/// Every circuit on every device in every mode, in manifest order. Load and
/// run failures become error records; only a broken worker pool is fatal.
pub fn run_suite(manifest: &Manifest, options: &RunOptions) -> Result<SuiteReport> {
    let circuits: Vec<(String, Result<LogicalCircuit, String>)> = manifest
        .circuits
        .iter()
        .map(|c| {
            let path = manifest.base_dir.join(&c.path);
            let loaded = load_qasm(&path).map_err(|e| format!("loading circuit {}: {e}", path.display()));
            (c.id.clone(), loaded)
        })
        .collect();
    let devices: Vec<(String, Result<CouplingGraph, String>)> = manifest
        .devices
        .iter()
        .map(|d| (d.id.clone(), d.source.load(&manifest.base_dir).map_err(|e| format!("{e:#}"))))
        .collect();

    let mut tasks = Vec::new();
    for c in &circuits {
        for d in &devices {
            for &mode in &manifest.modes {
                tasks.push((c, d, mode));
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs.max(1))
        .build()
        .context("building worker pool")?;
    let records: Vec<RunRecord> = pool.install(|| {
        tasks
            .par_iter()
            .map(|((c_id, circuit), (d_id, device), mode)| match (circuit, device) {
                (Ok(c), Ok(d)) => run_one(c, c_id, d, d_id, *mode, options).record,
                (Err(e), _) | (_, Err(e)) => RunRecord::error(c_id, d_id, *mode, e.clone()),
            })
            .collect()
    });
    Ok(SuiteReport::new(records, options.time_limit.map(|d| d.as_secs_f64())))
}
