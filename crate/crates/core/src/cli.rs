//! Command-line front end. Exit codes: 0 success, 1 configuration error,
//! 2 runtime failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::builder::ResetStrategy;
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::experiments::{
    run_ccnot_survey, run_cnot_chain_sweep, run_qft_perfect_phases, run_qpe_phase_sweep, run_t1,
    run_t2_echo, run_t2_ramsey, CoherenceRun, Device, ExperimentConfig, PlacementSelector,
    ResultTable, DEFAULT_SEED, DEFAULT_SHOTS,
};
use crate::noise::DeviceCalibration;
use crate::report::{write_run, OutputFormat, RunManifest};
use crate::topology::{
    enumerate_linear_triples, enumerate_six_rings, enumerate_stars, validate_circuit,
    CouplingGraph, GeometryKind, Orientations,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "nisq-lab",
    version,
    about = "Simulate small quantum algorithms on a connectivity-limited noisy device"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Excited-state survival after a delay, fitted to an exponential.
    T1(CoherenceArgs),
    /// H, delay, H; fitted to a damped cosine.
    T2Ramsey(CoherenceArgs),
    /// H, delay/2, X, delay/2, H; fitted to a decay toward one half.
    T2Echo(CoherenceArgs),
    /// CNOT chains of every length along each path orientation.
    CnotChain(ChainArgs),
    /// Toffoli on every placement of each geometry.
    CcnotSurvey(SurveyArgs),
    /// Inverse QFT on the eight perfect phases.
    QftPerfect(PhaseArgs),
    /// Phase estimation across a phase grid.
    QpeSweep(PhaseArgs),
    /// Count linear triples, stars and six-rings of a coupling map.
    Enumerate(TopologyArgs),
    /// Check that every two-qubit gate of a circuit sits on a coupled pair.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct TopologyArgs {
    /// Coupling map JSON; defaults to the shipped 20-qubit map.
    #[arg(long, value_name = "FILE")]
    pub topology: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub topology: TopologyArgs,
    /// Calibration JSON; defaults to the shipped calibration.
    #[arg(long, value_name = "FILE")]
    pub calibration: Option<PathBuf>,
    /// Chain orientation paths JSON; defaults to the shipped orientations.
    #[arg(long, value_name = "FILE")]
    pub orientations: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SHOTS)]
    pub shots: u64,
    #[arg(long, env = "NISQ_LAB_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_name = "DIR", default_value = "results")]
    pub out: PathBuf,
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    pub format: OutputFormat,
    /// Also write an SVG plot per table.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CoherenceArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Device qubit to probe.
    #[arg(long, default_value_t = 0)]
    pub qubit: usize,
    /// Delays in μs, comma separated and ascending.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct ChainArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Reset strategies: none, x-reset, cnot-reset.
    #[arg(long = "strategy", value_delimiter = ',', value_parser = parse_strategy)]
    pub strategies: Option<Vec<ResetStrategy>>,
    /// Orientation ids to run; all by default.
    #[arg(long = "orientation", value_delimiter = ',')]
    pub orientation_ids: Option<Vec<usize>>,
    /// Longest chain in CNOTs.
    #[arg(long)]
    pub max_length: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SurveyArgs {
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PhaseArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Geometries: linear3, star4, ring6-3chain.
    #[arg(long = "geometry", value_delimiter = ',', value_parser = parse_geometry)]
    pub geometries: Option<Vec<GeometryKind>>,
    /// Use the k best placements from a Toffoli survey run first.
    #[arg(long, conflicts_with = "all_placements")]
    pub top_k: Option<usize>,
    /// Use every placement of each geometry.
    #[arg(long)]
    pub all_placements: bool,
    /// Phases in radians, comma separated and ascending.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub topology: TopologyArgs,
    /// Circuit JSON whose wires are device qubits (or mapped by `physical`).
    #[arg(long, value_name = "FILE")]
    pub circuit: PathBuf,
}

fn parse_format(s: &str) -> std::result::Result<OutputFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_strategy(s: &str) -> std::result::Result<ResetStrategy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_geometry(s: &str) -> std::result::Result<GeometryKind, String> {
    match s {
        "linear3" | "linear3-cct" => Ok(GeometryKind::Linear3Cct),
        "star4" => Ok(GeometryKind::Star4),
        "ring6-3chain" => Ok(GeometryKind::Ring6ThreeChain),
        _ => Err(format!(
            "unknown geometry {s:?}; use linear3, star4 or ring6-3chain"
        )),
    }
}

/// An error tagged with the exit code it maps to.
struct Failure {
    code: i32,
    message: String,
}

fn config(e: Error) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message: e.to_string(),
    }
}

fn runtime(e: Error) -> Failure {
    Failure {
        code: if e.is_config_error() && !matches!(e, Error::Io { .. }) {
            EXIT_CONFIG
        } else {
            EXIT_RUNTIME
        },
        message: e.to_string(),
    }
}

fn load_graph(args: &TopologyArgs) -> Result<CouplingGraph> {
    match &args.topology {
        Some(p) => CouplingGraph::load(p),
        None => Ok(CouplingGraph::poughkeepsie()),
    }
}

fn load_device(args: &RunArgs) -> Result<Device> {
    let graph = load_graph(&args.topology)?;
    let calibration = match &args.calibration {
        Some(p) => DeviceCalibration::load(p)?,
        None => DeviceCalibration::default_device(),
    };
    let orientations = match &args.orientations {
        Some(p) => Orientations::load(p)?,
        None => Orientations::shipped(),
    };
    Device::new(graph, calibration, orientations)
}

fn base_config(args: &RunArgs) -> ExperimentConfig {
    ExperimentConfig {
        shots: args.shots,
        seed: args.seed,
        ..Default::default()
    }
}

/// Parses `argv` (program name first) and runs it, writing human-readable
/// output to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{rendered}");
                EXIT_CONFIG
            } else {
                let _ = write!(out, "{rendered}");
                EXIT_OK
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    match command {
        Command::T1(a) => coherence("t1", a, run_t1, out),
        Command::T2Ramsey(a) => coherence("t2-ramsey", a, run_t2_ramsey, out),
        Command::T2Echo(a) => coherence("t2-echo", a, run_t2_echo, out),
        Command::CnotChain(a) => {
            let device = load_device(&a.run).map_err(config)?;
            let cfg = ExperimentConfig {
                strategies: a.strategies.clone().unwrap_or_else(|| ResetStrategy::ALL.to_vec()),
                orientations: a.orientation_ids.clone(),
                max_length: a.max_length,
                ..base_config(&a.run)
            };
            cfg.validate().map_err(config)?;
            let sweep = run_cnot_chain_sweep(&device, &cfg).map_err(runtime)?;
            finish("cnot-chain", &a.run, &device, &sweep.tables(), out)
        }
        Command::CcnotSurvey(a) => {
            let device = load_device(&a.run).map_err(config)?;
            let cfg = base_config(&a.run);
            cfg.validate().map_err(config)?;
            let survey = run_ccnot_survey(&device, &cfg).map_err(runtime)?;
            let tables: Vec<&ResultTable> = survey.tables.iter().collect();
            finish("ccnot-survey", &a.run, &device, &tables, out)
        }
        Command::QftPerfect(a) => phase("qft-perfect", a, out),
        Command::QpeSweep(a) => phase("qpe-sweep", a, out),
        Command::Enumerate(a) => {
            let g = load_graph(&a).map_err(config)?;
            let _ = writeln!(
                out,
                "triples: {}, stars: {}, six_rings: {}",
                enumerate_linear_triples(&g).len(),
                enumerate_stars(&g).len(),
                enumerate_six_rings(&g).len()
            );
            Ok(())
        }
        Command::Validate(a) => {
            let g = load_graph(&a.topology).map_err(config)?;
            let text = std::fs::read_to_string(&a.circuit)
                .map_err(|e| config(Error::io(&a.circuit, e)))?;
            let circuit: Circuit = serde_json::from_str(&text).map_err(|e| config(e.into()))?;
            let violations = validate_circuit(&g, &circuit);
            if violations.is_empty() {
                let _ = writeln!(out, "ok: {} ops on coupled pairs", circuit.ops().len());
                return Ok(());
            }
            for v in &violations {
                let _ = writeln!(
                    out,
                    "violation: op {} ({}) on uncoupled qubits {:?}",
                    v.index, v.op, v.qubits
                );
            }
            Err(Failure {
                code: EXIT_RUNTIME,
                message: format!("{} gate(s) off the coupling map", violations.len()),
            })
        }
    }
}

fn coherence(
    name: &str,
    a: CoherenceArgs,
    f: fn(&Device, &ExperimentConfig) -> Result<CoherenceRun>,
    out: &mut dyn Write,
) -> std::result::Result<(), Failure> {
    let device = load_device(&a.run).map_err(config)?;
    let cfg = ExperimentConfig {
        qubit: a.qubit,
        grid: a.grid.clone(),
        ..base_config(&a.run)
    };
    cfg.validate().map_err(config)?;
    let result = f(&device, &cfg).map_err(runtime)?;
    if result.grid_too_narrow {
        let _ = writeln!(out, "warning: grid spans less than twice the configured time constant");
    }
    let params: Vec<String> = result
        .fit
        .params
        .iter()
        .map(|(k, v)| match v {
            Some(v) => format!("{k}={v:.6}"),
            None => format!("{k}=inf"),
        })
        .collect();
    let _ = writeln!(
        out,
        "fit {:?}: {} ({:?})",
        result.fit.model,
        params.join(" "),
        result.fit.status
    );
    finish(name, &a.run, &device, &[&result.table], out)
}

fn phase(name: &str, a: PhaseArgs, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    let device = load_device(&a.run).map_err(config)?;
    let placements = if a.all_placements {
        PlacementSelector::All
    } else {
        PlacementSelector::TopK(a.top_k.unwrap_or(if name == "qpe-sweep" { 1 } else { 3 }))
    };
    let cfg = ExperimentConfig {
        geometries: a.geometries.clone(),
        grid: a.grid.clone(),
        placements,
        ..base_config(&a.run)
    };
    cfg.validate().map_err(config)?;
    let result = if name == "qpe-sweep" {
        run_qpe_phase_sweep(&device, &cfg)
    } else {
        run_qft_perfect_phases(&device, &cfg)
    }
    .map_err(runtime)?;
    let mut tables = result.tables();
    if let Some(s) = &result.survey {
        tables.extend(&s.tables);
    }
    finish(name, &a.run, &device, &tables, out)
}

fn finish(
    name: &str,
    args: &RunArgs,
    device: &Device,
    tables: &[&ResultTable],
    out: &mut dyn Write,
) -> std::result::Result<(), Failure> {
    let mut manifest = RunManifest {
        subcommand: name.to_string(),
        config_path: args.calibration.as_ref().map(|p| p.display().to_string()),
        topology_path: args.topology.topology.as_ref().map(|p| p.display().to_string()),
        output_dir: args.out.display().to_string(),
        seed: args.seed,
        shots: args.shots,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        calibration_hash: device.calibration.hash_hex(),
        files: Vec::new(),
    };
    let written = write_run(&mut manifest, tables, args.format, args.plot).map_err(runtime)?;
    for p in written {
        let _ = writeln!(out, "wrote {}", p.display());
    }
    Ok(())
}
