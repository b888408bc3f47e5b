//! Command-line front end for the telecloning simulator.
//!
//! Exit codes: 0 on success, 2 on configuration errors, 3 on I/O errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use telecloning_core::error::HarnessError;
use telecloning_core::export::{export_circuit_text, Dialect};
use telecloning_core::harness::{
    build_sampled_calibration, cost_table, emit_cost_table, emit_postselect, emit_results,
    postselect_analysis, run_sweep, ExperimentConfig, GridSpec, ModeChoice, OutputFormat,
};
use telecloning_core::noise::NoiseModel;
use telecloning_core::telecloning::{
    build_full_circuit, build_protocol_circuit, CircuitFamily, Connectivity, ExecMode,
    MessageSpec, TelecloningSpec, TomoBasis,
};

#[derive(Parser)]
#[command(
    name = "telecloning",
    about = "Simulate and analyze 1-to-M quantum telecloning circuits",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep a Bloch-sphere grid of message states and report clone fidelities.
    Sweep(SweepArgs),
    /// Per-variant post-selection statistics over the polar angle.
    Postselect(PostselectArgs),
    /// CNOT cost table for every circuit family and execution mode.
    Cost(CostArgs),
    /// Print a single circuit as text.
    ExportCircuit(ExportArgs),
    /// Build and save a measurement calibration matrix.
    Calibrate(CalibrateArgs),
}

#[derive(Args)]
struct CommonRunArgs {
    /// Circuit family: pcc, apcc, pccc, aapccc, or ancilla:M.
    #[arg(long, default_value = "pcc")]
    circuit: String,
    /// Assumed hardware connectivity for cost accounting: linear or full.
    #[arg(long, default_value = "full")]
    connectivity: String,
    /// Shots per circuit; 0 runs the exact (infinite-shot) analysis.
    #[arg(long, default_value_t = 0)]
    shots: u64,
    /// JSON file with depolarizing strengths and readout confusion.
    #[arg(long)]
    noise: Option<PathBuf>,
    /// Apply measurement-error mitigation (sampled runs only).
    #[arg(long)]
    mitigate: bool,
    /// Master seed; all randomness derives from it deterministically.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Output format: csv or json.
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonRunArgs,
    /// Teleportation strategy: feedforward, deferred, or postselect.
    #[arg(long, default_value = "deferred")]
    mode: String,
    /// Grid size as NyxNz, e.g. 17x17.
    #[arg(long, default_value = "17x17")]
    grid: String,
    /// Pin the azimuthal angle to a fixed value (radians).
    #[arg(long)]
    theta_z: Option<f64>,
}

#[derive(Args)]
struct PostselectArgs {
    #[command(flatten)]
    common: CommonRunArgs,
    /// Number of polar-angle grid points over [0, pi].
    #[arg(long, default_value_t = 17)]
    grid: usize,
    /// Azimuthal angle (radians); defaults to pi/2.
    #[arg(long)]
    theta_z: Option<f64>,
}

#[derive(Args)]
struct CostArgs {
    /// Assumed hardware connectivity: linear or full.
    #[arg(long, default_value = "full")]
    connectivity: String,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long, default_value = "pcc")]
    circuit: String,
    /// feedforward, deferred, or a postselect variant like postselect:00.
    #[arg(long, default_value = "deferred")]
    mode: String,
    #[arg(long, default_value_t = 0.0)]
    theta_y: f64,
    #[arg(long, default_value_t = 0.0)]
    theta_z: f64,
    /// Tomography basis (x, y, or z); omit to export the bare protocol.
    #[arg(long)]
    basis: Option<String>,
    /// qasm or annotated.
    #[arg(long, default_value = "annotated")]
    dialect: String,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Circuit family whose measured register is calibrated.
    #[arg(long, default_value = "pcc")]
    circuit: String,
    #[arg(long)]
    noise: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    shots: u64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Output JSON file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

fn parse_family(s: &str) -> Result<CircuitFamily, HarnessError> {
    s.parse::<CircuitFamily>().map_err(|e| config_err(e.to_string()))
}

fn parse_connectivity(s: &str) -> Result<Connectivity, HarnessError> {
    s.parse::<Connectivity>().map_err(|e| config_err(e.to_string()))
}

fn parse_format(s: &str) -> Result<OutputFormat, HarnessError> {
    OutputFormat::parse(s).ok_or_else(|| config_err(format!("unknown format `{s}` (csv|json)")))
}

fn parse_grid(s: &str) -> Result<GridSpec, HarnessError> {
    let bad = || config_err(format!("bad grid `{s}`; expected NyxNz like 17x17"));
    let (ny, nz) = s.split_once('x').ok_or_else(bad)?;
    let n_theta_y = ny.parse().map_err(|_| bad())?;
    let n_theta_z = nz.parse().map_err(|_| bad())?;
    if n_theta_y == 0 || n_theta_z == 0 {
        return Err(bad());
    }
    Ok(GridSpec { n_theta_y, n_theta_z })
}

fn load_noise(path: &Option<PathBuf>) -> Result<Option<NoiseModel>, HarnessError> {
    match path {
        None => Ok(None),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            let model =
                NoiseModel::from_json(&text).map_err(|e| config_err(e.to_string()))?;
            Ok(Some(model))
        }
    }
}

fn build_config(
    common: &CommonRunArgs,
    mode: ModeChoice,
    grid: GridSpec,
    fixed_theta_z: Option<f64>,
) -> Result<ExperimentConfig, HarnessError> {
    let config = ExperimentConfig {
        family: parse_family(&common.circuit)?,
        mode,
        connectivity: parse_connectivity(&common.connectivity)?,
        grid,
        fixed_theta_z,
        shots: common.shots,
        noise: load_noise(&common.noise)?,
        mitigate: common.mitigate,
        seed: common.seed,
    };
    config.validate()?;
    Ok(config)
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), HarnessError> {
    let mode = ModeChoice::parse(&args.mode)
        .ok_or_else(|| config_err(format!("unknown mode `{}`", args.mode)))?;
    let grid = parse_grid(&args.grid)?;
    let config = build_config(&args.common, mode, grid, args.theta_z)?;
    let format = parse_format(&args.common.format)?;
    let records = run_sweep(&config)?;
    let paths = emit_results(&records, &config, &args.common.out, format)?;
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn cmd_postselect(args: &PostselectArgs) -> Result<(), HarnessError> {
    let grid = GridSpec { n_theta_y: args.grid, n_theta_z: 1 };
    let config = build_config(&args.common, ModeChoice::Postselect, grid, args.theta_z)?;
    let format = parse_format(&args.common.format)?;
    let records = postselect_analysis(&config)?;
    let paths = emit_postselect(&records, &config, &args.common.out, format)?;
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn cmd_cost(args: &CostArgs) -> Result<(), HarnessError> {
    let connectivity = parse_connectivity(&args.connectivity)?;
    let format = parse_format(&args.format)?;
    let rows = cost_table(connectivity)?;
    let path = emit_cost_table(&rows, &args.out, format)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn parse_mode(s: &str) -> Result<ExecMode, HarnessError> {
    if let Some(variant) = s.strip_prefix("postselect:") {
        let outcome = telecloning_core::telecloning::BellOutcome::from_label(variant)
            .ok_or_else(|| config_err(format!("bad postselect variant `{variant}`")))?;
        return Ok(ExecMode::Postselect(outcome));
    }
    match s {
        "feedforward" => Ok(ExecMode::Feedforward),
        "deferred" => Ok(ExecMode::Deferred),
        "postselect" => Ok(ExecMode::Postselect(
            telecloning_core::telecloning::BellOutcome { message: false, port: false },
        )),
        other => Err(config_err(format!("unknown mode `{other}`"))),
    }
}

fn cmd_export(args: &ExportArgs) -> Result<(), HarnessError> {
    let family = parse_family(&args.circuit)?;
    let mode = parse_mode(&args.mode)?;
    let dialect = Dialect::parse(&args.dialect)
        .ok_or_else(|| config_err(format!("unknown dialect `{}`", args.dialect)))?;
    let spec = TelecloningSpec::new(family, mode, Connectivity::Full);
    let msg = MessageSpec::new(args.theta_y, args.theta_z);
    let circuit = match &args.basis {
        Some(b) => {
            let basis = TomoBasis::parse(b)
                .ok_or_else(|| config_err(format!("unknown basis `{b}` (x|y|z)")))?;
            build_full_circuit(&spec, &msg, basis)?
        }
        None => build_protocol_circuit(&spec, &msg)?,
    };
    let text = export_circuit_text(&circuit, dialect)?;
    match &args.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_calibrate(args: &CalibrateArgs) -> Result<(), HarnessError> {
    if args.shots == 0 {
        return Err(config_err("calibration needs at least one shot"));
    }
    let family = parse_family(&args.circuit)?;
    let noise = load_noise(&args.noise)?;
    let cal = build_sampled_calibration(family, noise.as_ref(), args.shots, args.seed)?;
    let m = cal.matrix();
    let rows: Vec<Vec<f64>> =
        (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect()).collect();
    let doc = serde_json::json!({
        "m_bits": cal.m_bits(),
        "shots": args.shots,
        "seed": args.seed,
        "matrix": rows,
    });
    let text = serde_json::to_string_pretty(&doc)?;
    match &args.out {
        Some(path) => std::fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep(args) => cmd_sweep(args),
        Command::Postselect(args) => cmd_postselect(args),
        Command::Cost(args) => cmd_cost(args),
        Command::ExportCircuit(args) => cmd_export(args),
        Command::Calibrate(args) => cmd_calibrate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                HarnessError::Io(_) | HarnessError::Csv(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
