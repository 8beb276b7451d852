//! Run records, paired comparisons and the plain-text table.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use qmap_core::solver::{EncodingStats, RegionSummary};
use serde::{Deserialize, Serialize};

use crate::run::Mode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Solved,
    Timeout,
    Infeasible,
    /// The run could not be carried out or its layout failed validation.
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionInfo {
    pub qubits: Vec<usize>,
    pub num_edges: usize,
    pub mean_error: f64,
    pub origin_size: usize,
    pub k_applied: usize,
    pub retried: bool,
    pub fusion_seconds: f64,
}

impl RegionInfo {
    pub fn from_summary(s: &RegionSummary) -> Self {
        RegionInfo {
            qubits: s.qubits.clone(),
            num_edges: s.num_edges,
            mean_error: s.mean_error,
            origin_size: s.origin_size,
            k_applied: s.k_applied,
            retried: s.retried,
            fusion_seconds: s.fusion_seconds,
        }
    }
}

/// One circuit on one device in one mode. Solution fields are only set for
/// solved records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub circuit: String,
    pub device: String,
    pub mode: Mode,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_seconds: Option<f64>,
    /// The search proved the layout optimal for its policy.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub complete: Option<bool>,
    pub timed_out: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub swaps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub blocks: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub analytic_fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub simulated_fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub encoding: Option<EncodingStats>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub solver_calls: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub region: Option<RegionInfo>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub message: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl RunRecord {
    pub fn new(circuit: &str, device: &str, mode: Mode) -> Self {
        RunRecord {
            circuit: circuit.to_string(),
            device: device.to_string(),
            mode,
            outcome: Outcome::Error,
            wall_seconds: None,
            complete: None,
            timed_out: false,
            depth: None,
            swaps: None,
            blocks: None,
            analytic_fidelity: None,
            simulated_fidelity: None,
            encoding: None,
            solver_calls: None,
            region: None,
            message: None,
            notes: Vec::new(),
        }
    }

    pub fn error(circuit: &str, device: &str, mode: Mode, message: String) -> Self {
        RunRecord {
            message: Some(message),
            ..RunRecord::new(circuit, device, mode)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FidelitySource {
    Simulated,
    Analytic,
}

/// Baseline against regional for one (circuit, device) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub circuit: String,
    pub device: String,
    /// Baseline time over regional time, the baseline capped at the limit.
    pub acceleration_ratio: Option<f64>,
    /// The baseline hit the limit, so the true ratio is at least this.
    pub lower_bound: bool,
    pub fidelity_source: Option<FidelitySource>,
    pub baseline_fidelity: Option<f64>,
    pub regional_fidelity: Option<f64>,
    pub fidelity_percent: Option<f64>,
    /// Regional minus baseline.
    pub swap_delta: Option<i64>,
    pub depth_delta: Option<i64>,
}

/// Averages over the paired comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub pairs: usize,
    pub mean_acceleration: Option<f64>,
    /// At least one averaged ratio is itself a lower bound.
    pub acceleration_lower_bound: bool,
    pub mean_fidelity_percent: Option<f64>,
    pub mean_swap_delta: Option<f64>,
    pub mean_depth_delta: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub time_limit_seconds: Option<f64>,
    pub records: Vec<RunRecord>,
    pub comparisons: Vec<Comparison>,
    pub summary: ModeSummary,
}

impl SuiteReport {
    pub fn new(records: Vec<RunRecord>, time_limit_seconds: Option<f64>) -> Self {
        let mut report = SuiteReport {
            time_limit_seconds,
            records,
            comparisons: Vec::new(),
            summary: summarize(&[], Vec::new()),
        };
        let (comparisons, warnings) = pair_records(&report.records, time_limit_seconds);
        report.summary = summarize(&comparisons, warnings);
        report.comparisons = comparisons;
        report
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }
}

pub fn acceleration(baseline: &RunRecord, regional: &RunRecord, limit: Option<f64>) -> (Option<f64>, bool) {
    let lower_bound = baseline.outcome == Outcome::Timeout || baseline.timed_out;
    let usable = |r: &RunRecord| matches!(r.outcome, Outcome::Solved | Outcome::Timeout);
    if !usable(baseline) || regional.outcome != Outcome::Solved {
        return (None, false);
    }
    let (Some(b), Some(r)) = (baseline.wall_seconds, regional.wall_seconds) else {
        return (None, false);
    };
    let b = limit.map_or(b, |l| b.min(l));
    if r <= 0.0 {
        return (None, false);
    }
    (Some(b / r), lower_bound)
}

/// `(new - old) / old * 100`.
pub fn percent_change(old: f64, new: f64) -> Option<f64> {
    (old > 0.0).then(|| (new - old) / old * 100.0)
}

fn fidelities(baseline: &RunRecord, regional: &RunRecord) -> Option<(FidelitySource, f64, f64)> {
    if let (Some(b), Some(r)) = (baseline.simulated_fidelity, regional.simulated_fidelity) {
        return Some((FidelitySource::Simulated, b, r));
    }
    if let (Some(b), Some(r)) = (baseline.analytic_fidelity, regional.analytic_fidelity) {
        return Some((FidelitySource::Analytic, b, r));
    }
    None
}

fn delta(b: Option<usize>, r: Option<usize>) -> Option<i64> {
    Some(r? as i64 - b? as i64)
}

pub fn compare(baseline: &RunRecord, regional: &RunRecord, limit: Option<f64>) -> Comparison {
    let (acceleration_ratio, lower_bound) = acceleration(baseline, regional, limit);
    let fid = fidelities(baseline, regional);
    Comparison {
        circuit: baseline.circuit.clone(),
        device: baseline.device.clone(),
        acceleration_ratio,
        lower_bound,
        fidelity_source: fid.map(|f| f.0),
        baseline_fidelity: fid.map(|f| f.1),
        regional_fidelity: fid.map(|f| f.2),
        fidelity_percent: fid.and_then(|(_, b, r)| percent_change(b, r)),
        swap_delta: delta(baseline.swaps, regional.swaps),
        depth_delta: delta(baseline.depth, regional.depth),
    }
}

/// Pairs records by (circuit, device) in order of first appearance.
fn pair_records(records: &[RunRecord], limit: Option<f64>) -> (Vec<Comparison>, Vec<String>) {
    let mut order: Vec<(&str, &str)> = Vec::new();
    let mut slots: BTreeMap<(&str, &str), [Vec<&RunRecord>; 2]> = BTreeMap::new();
    for r in records {
        let key = (r.circuit.as_str(), r.device.as_str());
        let entry = slots.entry(key).or_insert_with(|| {
            order.push(key);
            [Vec::new(), Vec::new()]
        });
        entry[(r.mode == Mode::Regional) as usize].push(r);
    }
    let mut comparisons = Vec::new();
    let mut warnings = Vec::new();
    for key in order {
        let [baseline, regional] = &slots[&key];
        match (baseline.first(), regional.first()) {
            (Some(b), Some(r)) => {
                if baseline.len() > 1 || regional.len() > 1 {
                    warnings.push(format!("{} on {}: duplicate records, pairing the first of each mode", key.0, key.1));
                }
                comparisons.push(compare(b, r, limit));
            }
            (Some(_), None) => warnings.push(format!("{} on {}: no regional record, skipped", key.0, key.1)),
            (None, _) => warnings.push(format!("{} on {}: no baseline record, skipped", key.0, key.1)),
        }
    }
    (comparisons, warnings)
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn summarize(comparisons: &[Comparison], warnings: Vec<String>) -> ModeSummary {
    ModeSummary {
        pairs: comparisons.len(),
        mean_acceleration: mean(comparisons.iter().filter_map(|c| c.acceleration_ratio)),
        acceleration_lower_bound: comparisons.iter().any(|c| c.acceleration_ratio.is_some() && c.lower_bound),
        mean_fidelity_percent: mean(comparisons.iter().filter_map(|c| c.fidelity_percent)),
        mean_swap_delta: mean(comparisons.iter().filter_map(|c| c.swap_delta.map(|d| d as f64))),
        mean_depth_delta: mean(comparisons.iter().filter_map(|c| c.depth_delta.map(|d| d as f64))),
        warnings,
    }
}

/// Recomputes the pairing and averages from the report's records.
pub fn compare_modes(report: &SuiteReport) -> ModeSummary {
    let (comparisons, warnings) = pair_records(&report.records, report.time_limit_seconds);
    summarize(&comparisons, warnings)
}

fn time_cell(r: Option<&RunRecord>) -> String {
    match r {
        None => "-".into(),
        Some(r) => match (r.outcome, r.wall_seconds) {
            (Outcome::Timeout, _) => "TO".into(),
            (Outcome::Infeasible, _) => "infeas".into(),
            (Outcome::Error, _) => "error".into(),
            (Outcome::Solved, Some(t)) => format!("{t:.2}"),
            (Outcome::Solved, None) => "ok".into(),
        },
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "-".into(), |v| v.to_string())
}

fn ratio_cell(ratio: Option<f64>, lower_bound: bool) -> String {
    match ratio {
        Some(x) if lower_bound => format!(">{x:.2}"),
        Some(x) => format!("{x:.2}"),
        None => "-".into(),
    }
}

/// One row per pair: times, Acc-Ratio, swaps, depth and fidelity side by
/// side, with an Average row at the bottom.
pub fn render_table(report: &SuiteReport) -> String {
    let find = |c: &Comparison, mode: Mode| {
        report
            .records
            .iter()
            .find(|r| r.circuit == c.circuit && r.device == c.device && r.mode == mode)
    };
    let header = [
        "circuit", "device", "t_base", "t_reg", "Acc-Ratio", "swaps", "depth", "F_base", "F_reg", "Percent",
    ];
    let mut rows: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
    for c in &report.comparisons {
        let (b, r) = (find(c, Mode::Baseline), find(c, Mode::Regional));
        let pair = |f: fn(&RunRecord) -> Option<usize>| {
            format!("{}/{}", opt(b.and_then(f)), opt(r.and_then(f)))
        };
        rows.push(vec![
            c.circuit.clone(),
            c.device.clone(),
            time_cell(b),
            time_cell(r),
            ratio_cell(c.acceleration_ratio, c.lower_bound),
            pair(|x| x.swaps),
            pair(|x| x.depth),
            opt(c.baseline_fidelity.map(|f| format!("{f:.4}"))),
            opt(c.regional_fidelity.map(|f| format!("{f:.4}"))),
            opt(c.fidelity_percent.map(|p| format!("{p:+.2}%"))),
        ]);
    }
    let s = &report.summary;
    let signed = |v: Option<f64>| opt(v.map(|x| format!("{x:+.2}")));
    rows.push(vec![
        "Average".into(),
        String::new(),
        String::new(),
        String::new(),
        ratio_cell(s.mean_acceleration, s.acceleration_lower_bound),
        signed(s.mean_swap_delta),
        signed(s.mean_depth_delta),
        String::new(),
        String::new(),
        opt(s.mean_fidelity_percent.map(|p| format!("{p:+.2}%"))),
    ]);

    let widths: Vec<usize> = (0..header.len())
        .map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (n, row) in rows.iter().enumerate() {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (cell, w))| if i < 2 { format!("{cell:<w$}") } else { format!("{cell:>w$}") })
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        if n == 0 || n + 2 == rows.len() {
            let _ = writeln!(out, "{}", "-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
        }
    }
    for w in &s.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}
