//! Configuration-driven front end for the Λ-atom fluorescence library.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical error,
//! 4 validation failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lambda_fluor::cli;
use lambda_fluor::config::RunConfig;
use lambda_fluor::error::Error;

#[derive(Parser)]
#[command(
    name = "lambda-fluor",
    about = "Resonance fluorescence of a laser-driven three-level Λ atom with \
             vacuum-induced interference",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Steady state: populations, coherences, intensities, dark flag.
    Steady(JobArgs),
    /// Incoherent fluorescence spectrum as CSV.
    Spectrum(JobArgs),
    /// Narrow central feature: measured and predicted amplitude/width.
    Peak(JobArgs),
    /// Sweep one parameter; CSV of steady-state observables per point.
    Sweep(SweepArgs),
    /// Run the built-in acceptance and invariant suite.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct JobArgs {
    /// Flat `key = value` configuration file.
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Write output here instead of stdout (overrides output.path).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Override grid.span.
    #[arg(long, value_name = "X")]
    span: Option<f64>,
    /// Override grid.points.
    #[arg(long, value_name = "N")]
    points: Option<usize>,
    /// Densify the grid around the laser frequency.
    #[arg(long)]
    refine_center: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    job: JobArgs,
    /// Parameter to vary: gamma1, gamma2, omega1, omega2, detuning,
    /// splitting, or p.
    #[arg(long, value_name = "KEY")]
    vary: String,
    #[arg(long, value_name = "A")]
    from: f64,
    #[arg(long, value_name = "B")]
    to: f64,
    #[arg(long, value_name = "N")]
    steps: usize,
}

#[derive(Args)]
struct ValidateArgs {
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

fn load_config(args: &JobArgs) -> Result<RunConfig, Error> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", args.config.display())))?;
    let mut config = RunConfig::parse(&text)?;
    if let Some(span) = args.span {
        if !span.is_finite() || span <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "--span must be finite and > 0, got {span}"
            )));
        }
        config.grid.span = span;
    }
    if let Some(points) = args.points {
        if points < 3 {
            return Err(Error::InvalidConfig(format!(
                "--points must be at least 3, got {points}"
            )));
        }
        config.grid.points = points;
    }
    if args.refine_center {
        config.grid.refine_center = true;
    }
    Ok(config)
}

fn emit(
    output: String,
    cli_out: &Option<PathBuf>,
    config_out: Option<&PathBuf>,
) -> Result<(), Error> {
    use std::io::Write;
    match cli_out.as_ref().or(config_out) {
        Some(path) => std::fs::write(path, output).map_err(Error::from),
        None => match std::io::stdout().write_all(output.as_bytes()) {
            // a closed pipe downstream (e.g. | head) is not our error
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            other => other.map_err(Error::from),
        },
    }
}

fn cap_threads_from_env() {
    if let Ok(value) = std::env::var("LAMBDA_FLUOR_THREADS") {
        match value.parse::<usize>() {
            Ok(n) if n >= 1 => {
                // ignored if a pool already exists; fine for one-shot runs
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            _ => eprintln!("warning: ignoring LAMBDA_FLUOR_THREADS = {value:?}"),
        }
    }
}

fn run() -> Result<bool, Error> {
    let cli = Cli::parse();
    cap_threads_from_env();
    match &cli.command {
        Command::Steady(args) => {
            let config = load_config(args)?;
            let output = cli::run_steady(&config)?;
            emit(output, &args.out, config.output.path.as_ref())?;
        }
        Command::Spectrum(args) => {
            let config = load_config(args)?;
            let output = cli::run_spectrum(&config)?;
            emit(output, &args.out, config.output.path.as_ref())?;
        }
        Command::Peak(args) => {
            let config = load_config(args)?;
            let output = cli::run_peak(&config)?;
            emit(output, &args.out, config.output.path.as_ref())?;
        }
        Command::Sweep(args) => {
            let config = load_config(&args.job)?;
            let output = cli::run_sweep(&config, &args.vary, args.from, args.to, args.steps)?;
            emit(output, &args.job.out, config.output.path.as_ref())?;
        }
        Command::Validate(args) => {
            let (output, all_passed) = cli::run_validate();
            emit(output, &args.out, None)?;
            return Ok(all_passed);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(4),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
