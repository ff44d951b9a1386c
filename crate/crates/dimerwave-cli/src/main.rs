//! Command-line front end: five subcommands over one TOML configuration.
//!
//! Exit codes are a stable contract: 0 on success, 2 for configuration or
//! usage problems, 3 for numerical failures.

mod commands;
mod config;
mod csvout;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::OutContext;
use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or environment; exit code 2.
    Config(String),
    /// The computation itself failed; exit code 3.
    Numeric(String),
}

impl From<dimerwave::Error> for CliError {
    fn from(e: dimerwave::Error) -> Self {
        match e {
            dimerwave::Error::InvalidInput { .. } => CliError::Config(e.to_string()),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "dimerwave", version, about = "Acoustic bubble-dimer computations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pair capacitance constants by series and boundary-integral routes.
    Capacitance(RunArgs),
    /// Hybridized resonance pair over a contrast sweep, three methods.
    Resonances(RunArgs),
    /// Effective-medium parameters over a frequency sweep.
    Dispersion(RunArgs),
    /// Multi-dimer solve against the homogenized field on probe points.
    FoldyCompare(RunArgs),
    /// Point-approximation error against the full solver on a far ring.
    Scatter(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Emit SVG plots where supported.
    #[arg(long)]
    svg: bool,
    /// Output directory (defaults to the config's output.dir, then ".").
    #[arg(long)]
    out: Option<PathBuf>,
    /// Ensemble seed override.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, run): (&RunArgs, fn(&RunConfig, &OutContext) -> Result<(), CliError>) =
        match &cli.command {
            Command::Capacitance(a) => (a, commands::capacitance::run),
            Command::Resonances(a) => (a, commands::resonances::run),
            Command::Dispersion(a) => (a, commands::dispersion::run),
            Command::FoldyCompare(a) => (a, commands::foldy_compare::run),
            Command::Scatter(a) => (a, commands::scatter::run),
        };
    match prepare(args).and_then(|(config, out)| run(&config, &out)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Numeric(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(3)
        }
    }
}

fn prepare(args: &RunArgs) -> Result<(RunConfig, OutContext), CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| {
        CliError::Config(format!("cannot read config {}: {e}", args.config.display()))
    })?;
    let mut config = RunConfig::from_str(&text)?;
    if let Some(seed) = args.seed {
        match config.ensemble.as_mut() {
            Some(ensemble) => ensemble.seed = Some(seed),
            None => eprintln!("note: --seed has no effect without an [ensemble] section"),
        }
    }
    let dir = args
        .out
        .clone()
        .or_else(|| config.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Config(format!("cannot create output dir {}: {e}", dir.display())))?;
    let svg = args.svg || config.output.svg;
    Ok((config, OutContext { dir, svg }))
}
