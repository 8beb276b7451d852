//! Runs baseline and regional layout synthesis over circuit/device suites
//! and compares the two modes.

pub mod manifest;
pub mod report;
pub mod run;

pub use manifest::{load_manifest, CircuitEntry, DeviceEntry, DeviceSource, Manifest};
pub use report::{
    acceleration, compare, compare_modes, percent_change, render_table, Comparison, FidelitySource, ModeSummary,
    Outcome, RegionInfo, RunRecord, SuiteReport,
};
pub use run::{run_one, run_suite, simulated_fidelity, FidelityMode, Mode, RunOptions, RunOutput};
