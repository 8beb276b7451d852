//! Suite manifests and device sources.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use qmap_core::device::{generate_grid, generate_heavy_hex, load_device, qx2, CouplingGraph, ErrorModel};
use serde::{Deserialize, Serialize};

use crate::run::Mode;

/// A device file or a generated topology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeviceSource {
    File { path: PathBuf },
    Generated {
        /// `grid:RxC`, `heavy-hex:D` or `qx2`.
        generate: String,
        /// Seed for random edge errors; uniform `error` when absent.
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default = "default_error")]
        error: f64,
    },
}

fn default_error() -> f64 {
    0.01
}

impl DeviceSource {
    pub fn generated(spec: &str, seed: Option<u64>) -> Self {
        DeviceSource::Generated {
            generate: spec.to_string(),
            seed,
            error: default_error(),
        }
    }

    /// `base` resolves relative file paths.
    pub fn load(&self, base: &Path) -> Result<CouplingGraph> {
        match self {
            DeviceSource::File { path } => {
                let path = base.join(path);
                load_device(&path).with_context(|| format!("loading device {}", path.display()))
            }
            DeviceSource::Generated { generate, seed, error } => {
                let errors = match seed {
                    Some(s) => ErrorModel::seeded(*s),
                    None => ErrorModel::Uniform(*error),
                };
                generate_device(generate, errors)
            }
        }
    }
}

impl fmt::Display for DeviceSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeviceSource::File { path } => write!(f, "{}", path.display()),
            DeviceSource::Generated { generate, .. } => f.write_str(generate),
        }
    }
}

fn generate_device(spec: &str, errors: ErrorModel) -> Result<CouplingGraph> {
    let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
    Ok(match kind {
        "qx2" => qx2(errors),
        "grid" => {
            let (r, c) = arg
                .split_once('x')
                .with_context(|| format!("grid size must look like RxC, got `{arg}`"))?;
            let (rows, cols) = (usize::from_str(r)?, usize::from_str(c)?);
            if rows * cols == 0 {
                bail!("grid needs at least one qubit");
            }
            generate_grid(rows, cols, errors)
        }
        "heavy-hex" => {
            let d = usize::from_str(arg).with_context(|| format!("bad heavy-hex distance `{arg}`"))?;
            if d == 0 {
                bail!("heavy-hex distance must be positive");
            }
            generate_heavy_hex(d, errors)
        }
        _ => bail!("unknown generator `{spec}` (expected grid:RxC, heavy-hex:D or qx2)"),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitEntry {
    pub id: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceEntry {
    pub id: String,
    #[serde(flatten)]
    pub source: DeviceSource,
}

/// Every circuit runs on every device in every mode.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default)]
    pub circuits: Vec<CircuitEntry>,
    #[serde(default)]
    pub devices: Vec<DeviceEntry>,
    #[serde(default = "default_modes")]
    pub modes: Vec<Mode>,
    /// Directory relative paths resolve against; set when loading.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_modes() -> Vec<Mode> {
    vec![Mode::Baseline, Mode::Regional]
}

pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
    let mut manifest: Manifest =
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))?;
    manifest.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(manifest)
}
