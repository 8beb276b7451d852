use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use qmap_core::circuit::{load_qasm, LogicalCircuit};
use qmap_core::device::CouplingGraph;
use qmap_core::evaluator::{
    compact_routed, complexity_estimates, hellinger_fidelity, pruning_ratios, simulate, ComplexityInputs,
    ComplexityReport, Estimates, PruningRatios,
};
use qmap_core::expansion::{restrict_graph, select_and_expand, MappingRegion};
use qmap_core::region::{recursive_community_fusion, FusionConfig};
use qmap_core::solver::{encode, BackendKind, EncodingBounds, MappingSolution, SearchPolicy};
use qmap_cli::{load_manifest, render_table, run_one, run_suite, DeviceSource, FidelityMode, Mode, RunOptions, RunRecord};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "qmap", version, about = "Region-restricted qubit layout synthesis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one circuit on one device.
    Map(MapArgs),
    /// Dump the fused region triples of a device.
    Regions(RegionsArgs),
    /// Run a manifest of circuits and devices in both modes.
    Bench(BenchArgs),
    /// Variable and constraint estimates, with and without region pruning.
    Estimate(EstimateArgs),
    /// Map a circuit, then score it by noisy simulation.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct DeviceArgs {
    /// Device document (JSON).
    #[arg(long, conflicts_with = "generate")]
    device: Option<PathBuf>,
    /// Generated topology: grid:RxC, heavy-hex:D or qx2.
    #[arg(long)]
    generate: Option<String>,
    /// Seeds random edge errors for generated devices.
    #[arg(long)]
    error_seed: Option<u64>,
    /// Uniform edge error for generated devices without --error-seed.
    #[arg(long, default_value_t = 0.01)]
    error: f64,
}

impl DeviceArgs {
    fn load(&self) -> Result<(String, CouplingGraph)> {
        let source = match (&self.device, &self.generate) {
            (Some(path), _) => DeviceSource::File { path: path.clone() },
            (None, Some(spec)) => DeviceSource::Generated {
                generate: spec.clone(),
                seed: self.error_seed,
                error: self.error,
            },
            (None, None) => bail!("pass --device <path> or --generate <spec>"),
        };
        let graph = source.load(Path::new(""))?;
        Ok((source.to_string(), graph))
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Seconds per solve; 0 disables the limit.
    #[arg(long, default_value_t = 3600.0)]
    time_limit: f64,
    #[arg(long, default_value_t = SearchPolicy::default())]
    policy: SearchPolicy,
    /// `embedded` or `dimacs:<command>`.
    #[arg(long, default_value_t = BackendKind::Embedded)]
    backend: BackendKind,
    /// Weight of gate fidelity against modularity during fusion.
    #[arg(long, default_value_t = FusionConfig::default().omega)]
    omega: f64,
    /// Expansion rings grown around the selected region.
    #[arg(long, default_value_t = 1)]
    expand_k: usize,
    /// Do not retry an infeasible region with one more ring.
    #[arg(long)]
    no_retry: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, value_enum, default_value_t = FidelityMode::Analytic)]
    fidelity: FidelityMode,
    #[arg(long, default_value_t = 1024)]
    shots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn run_options(solve: &SolveArgs, eval: &EvalArgs, jobs: usize, no_timing: bool) -> Result<RunOptions> {
    if !(solve.time_limit.is_finite() && solve.time_limit >= 0.0) {
        bail!("--time-limit must be a non-negative number of seconds");
    }
    Ok(RunOptions {
        time_limit: (solve.time_limit > 0.0).then(|| Duration::from_secs_f64(solve.time_limit)),
        policy: solve.policy,
        backend: solve.backend.clone(),
        omega: solve.omega,
        expand_k: solve.expand_k,
        retry: !solve.no_retry,
        fidelity: eval.fidelity,
        shots: eval.shots,
        seed: eval.seed,
        jobs,
        no_timing,
    })
}

#[derive(Args)]
struct MapArgs {
    /// OpenQASM 2.0 circuit.
    #[arg(long)]
    circuit: PathBuf,
    #[command(flatten)]
    device: DeviceArgs,
    #[arg(long, value_enum, default_value_t = Mode::Regional)]
    mode: Mode,
    #[command(flatten)]
    solve: SolveArgs,
    #[command(flatten)]
    eval: EvalArgs,
    /// Solution document; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Writes the CNF at the reported block count and swap bound.
    #[arg(long)]
    emit_cnf: Option<PathBuf>,
    /// Writes the expanded mapping region (regional mode).
    #[arg(long)]
    dump_region: Option<PathBuf>,
    /// Writes the fused triple set.
    #[arg(long)]
    dump_triples: Option<PathBuf>,
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct RegionsArgs {
    #[command(flatten)]
    device: DeviceArgs,
    #[arg(long, default_value_t = FusionConfig::default().omega)]
    omega: f64,
    /// Also select and expand the region for this many logical qubits.
    #[arg(long)]
    n_q: Option<usize>,
    #[arg(long, default_value_t = 1)]
    expand_k: usize,
    /// Triple set document; stdout when absent.
    #[arg(long, alias = "dump-triples")]
    output: Option<PathBuf>,
    #[arg(long)]
    dump_region: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Suite manifest (JSON).
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    solve: SolveArgs,
    #[command(flatten)]
    eval: EvalArgs,
    /// Report document; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Plain-text table; stderr when absent.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Leave wall-clock fields out so reruns are byte-identical.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    circuit: PathBuf,
    #[command(flatten)]
    device: DeviceArgs,
    /// Block count `T`; defaults to the circuit depth.
    #[arg(long)]
    blocks: Option<usize>,
    /// Swap budget `S`.
    #[arg(long, default_value_t = 0)]
    swaps: usize,
    #[arg(long, default_value_t = FusionConfig::default().omega)]
    omega: f64,
    #[arg(long, default_value_t = 1)]
    expand_k: usize,
    /// Also build both encodings and report their true sizes.
    #[arg(long)]
    encode: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    circuit: PathBuf,
    #[command(flatten)]
    device: DeviceArgs,
    #[arg(long, value_enum, default_value_t = Mode::Regional)]
    mode: Mode,
    #[command(flatten)]
    solve: SolveArgs,
    #[arg(long, default_value_t = 1024)]
    shots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_circuit(path: &Path) -> Result<LogicalCircuit> {
    let c = load_qasm(path).with_context(|| format!("loading circuit {}", path.display()))?;
    for w in c.warnings() {
        eprintln!("warning: {}:{}: {}", path.display(), w.line, w.message);
    }
    Ok(c)
}

fn file_id(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

#[derive(Serialize)]
struct MapDocument<'a> {
    record: &'a RunRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    solution: Option<&'a MappingSolution>,
}

fn write_cnf(
    path: &Path,
    circuit: &LogicalCircuit,
    device: &CouplingGraph,
    region: Option<&MappingRegion>,
    solution: Option<&MappingSolution>,
) -> Result<()> {
    let restricted;
    let graph = match region {
        Some(r) => {
            restricted = restrict_graph(device, r);
            &restricted.graph
        }
        None => device,
    };
    // without a layout, the one-block instance with a free swap count
    let bounds = match solution {
        Some(s) => EncodingBounds {
            blocks: s.blocks(),
            swaps: Some(s.swap_count()),
        },
        None => EncodingBounds { blocks: 1, swaps: None },
    };
    let encoding = encode(circuit, graph, bounds)?;
    encoding.cnf.write_dimacs(path).with_context(|| format!("writing {}", path.display()))
}

fn map(args: MapArgs) -> Result<()> {
    let circuit = load_circuit(&args.circuit)?;
    let (device_id, device) = args.device.load()?;
    let options = run_options(&args.solve, &args.eval, 1, args.no_timing)?;
    if let Some(path) = &args.dump_triples {
        let triples = recursive_community_fusion(&device, &FusionConfig::with_omega(options.omega))?;
        emit(Some(path), &to_json(&triples)?)?;
    }
    let out = run_one(&circuit, &file_id(&args.circuit), &device, &device_id, args.mode, &options);
    if let Some(path) = &args.dump_region {
        match &out.region {
            Some(r) => emit(Some(path), &to_json(r)?)?,
            None => eprintln!("warning: no region to dump in {} mode", args.mode),
        }
    }
    if let Some(path) = &args.emit_cnf {
        write_cnf(path, &circuit, &device, out.region.as_ref(), out.solution.as_ref())?;
    }
    let doc = MapDocument {
        record: &out.record,
        solution: out.solution.as_ref(),
    };
    emit(args.output.as_deref(), &to_json(&doc)?)
}

#[derive(Serialize)]
struct RegionsDocument {
    device: String,
    num_qubits: usize,
    num_edges: usize,
    omega: f64,
    triples: qmap_core::region::TripleSet,
    #[serde(skip_serializing_if = "Option::is_none")]
    selected: Option<MappingRegion>,
}

fn regions(args: RegionsArgs) -> Result<()> {
    let (device_id, device) = args.device.load()?;
    let triples = recursive_community_fusion(&device, &FusionConfig::with_omega(args.omega))?;
    let selected = match args.n_q {
        Some(n_q) => Some(select_and_expand(&device, &triples, n_q, args.expand_k)?),
        None => None,
    };
    if let (Some(path), Some(r)) = (&args.dump_region, &selected) {
        emit(Some(path), &to_json(r)?)?;
    }
    let doc = RegionsDocument {
        device: device_id,
        num_qubits: device.num_qubits(),
        num_edges: device.num_edges(),
        omega: args.omega,
        triples,
        selected,
    };
    emit(args.output.as_deref(), &to_json(&doc)?)
}

fn bench(args: BenchArgs) -> Result<()> {
    let manifest = load_manifest(&args.manifest)?;
    let options = run_options(&args.solve, &args.eval, args.jobs, args.no_timing)?;
    let report = run_suite(&manifest, &options)?;
    let table = render_table(&report);
    match &args.table {
        Some(p) => std::fs::write(p, &table).with_context(|| format!("writing {}", p.display()))?,
        None => eprint!("{table}"),
    }
    emit(args.output.as_deref(), &report.to_json())
}

#[derive(Serialize)]
struct MeasuredRegion {
    qubits: usize,
    edges: usize,
    r_aq: f64,
    r_ae: f64,
    regional: Estimates,
}

#[derive(Serialize)]
struct EncodedSizes {
    full_vars: usize,
    full_clauses: usize,
    region_vars: usize,
    region_clauses: usize,
}

#[derive(Serialize)]
struct EstimateDocument {
    #[serde(flatten)]
    report: ComplexityReport,
    measured: MeasuredRegion,
    #[serde(skip_serializing_if = "Option::is_none")]
    encoded: Option<EncodedSizes>,
}

fn estimate(args: EstimateArgs) -> Result<()> {
    let circuit = load_circuit(&args.circuit)?;
    let (_, device) = args.device.load()?;
    let t = args.blocks.unwrap_or_else(|| circuit.depth()).max(1);
    let inputs = ComplexityInputs::new(&circuit, &device, t, args.swaps);
    let report = complexity_estimates(&inputs, &pruning_ratios(&device, circuit.num_qubits()));

    let triples = recursive_community_fusion(&device, &FusionConfig::with_omega(args.omega))?;
    let region = select_and_expand(&device, &triples, circuit.num_qubits().max(1), args.expand_k)?;
    let measured_ratios = PruningRatios {
        r_aq: device.num_qubits() as f64 / region.num_qubits() as f64,
        r_ae: if region.num_edges() > 0 {
            device.num_edges() as f64 / region.num_edges() as f64
        } else {
            1.0
        },
        ..report.ratios
    };
    let measured = MeasuredRegion {
        qubits: region.num_qubits(),
        edges: region.num_edges(),
        r_aq: measured_ratios.r_aq,
        r_ae: measured_ratios.r_ae,
        regional: complexity_estimates(&inputs, &measured_ratios).regional,
    };
    let encoded = if args.encode {
        let bounds = EncodingBounds {
            blocks: t,
            swaps: Some(args.swaps),
        };
        let full = encode(&circuit, &device, bounds)?;
        let restricted = encode(&circuit, &restrict_graph(&device, &region).graph, bounds)?;
        Some(EncodedSizes {
            full_vars: full.stats.n_var,
            full_clauses: full.stats.n_clause,
            region_vars: restricted.stats.n_var,
            region_clauses: restricted.stats.n_clause,
        })
    } else {
        None
    };
    let doc = EstimateDocument { report, measured, encoded };
    emit(args.output.as_deref(), &to_json(&doc)?)
}

#[derive(Serialize)]
struct SimulateDocument {
    record: RunRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    ideal: Option<qmap_core::evaluator::OutcomeDistribution>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noisy: Option<qmap_core::evaluator::OutcomeDistribution>,
}

fn simulate_cmd(args: SimulateArgs) -> Result<()> {
    let circuit = load_circuit(&args.circuit)?;
    let (device_id, device) = args.device.load()?;
    let eval = EvalArgs {
        fidelity: FidelityMode::Analytic,
        shots: args.shots,
        seed: args.seed,
    };
    let options = run_options(&args.solve, &eval, 1, false)?;
    let out = run_one(&circuit, &file_id(&args.circuit), &device, &device_id, args.mode, &options);
    let mut doc = SimulateDocument {
        record: out.record,
        ideal: None,
        noisy: None,
    };
    if let Some(s) = &out.solution {
        let compact = compact_routed(s, &device);
        let sampled = simulate(&compact.circuit, None, Some(&compact.measure), args.shots, args.seed)
            .and_then(|ideal| {
                simulate(&compact.circuit, Some(&compact.noise), Some(&compact.measure), args.shots, args.seed)
                    .map(|noisy| (ideal, noisy))
            });
        match sampled {
            Ok((ideal, noisy)) => {
                doc.record.simulated_fidelity = Some(hellinger_fidelity(&noisy, &ideal));
                doc.ideal = Some(ideal);
                doc.noisy = Some(noisy);
            }
            Err(e) => doc.record.notes.push(format!("simulated fidelity: {e}")),
        }
    }
    emit(args.output.as_deref(), &to_json(&doc)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Map(a) => map(a),
        Command::Regions(a) => regions(a),
        Command::Bench(a) => bench(a),
        Command::Estimate(a) => estimate(a),
        Command::Simulate(a) => simulate_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
