//! Command-line front end: parse a TOML experiment configuration, run one
//! named experiment, write reproducible result files.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime error.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::parse_config;
use run::{run_experiment, CommandKind, RunError};

/// Default output directory when neither --out nor the config gives one.
const OUT_ENV_VAR: &str = "BIPHOTON_OUT";

#[derive(Parser)]
#[command(
    name = "biphoton",
    about = "Spectral-phase shaping of entangled photon pairs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Path to the TOML configuration; omit to run the default profile.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides the config and the environment).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override the counting seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the shaped relative-time amplitude G(t) and its width.
    Wavefunction,
    /// Scan the coincidence rate against the signal-idler delay.
    DelayScan,
    /// Delay scan with a pi phase step applied mid-signal-band.
    PiStep,
    /// Mach-Zehnder retardation scan: coincidence and IR traces.
    MzScan,
    /// Classify the detector as a coincidence counter.
    Regime,
    /// Flux bound, power, photon density and rate decomposition.
    Info,
}

impl From<&Command> for CommandKind {
    fn from(c: &Command) -> Self {
        match c {
            Command::Wavefunction => CommandKind::Wavefunction,
            Command::DelayScan => CommandKind::DelayScan,
            Command::PiStep => CommandKind::PiStep,
            Command::MzScan => CommandKind::MzScan,
            Command::Regime => CommandKind::Regime,
            Command::Info => CommandKind::Info,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ RunError::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e @ RunError::Runtime(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

fn execute(cli: &Cli) -> Result<(), RunError> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| {
            RunError::Config(config::ConfigError::Unreadable(format!("{path:?}: {e}")))
        })?,
        None => String::new(),
    };
    let config = parse_config(&text).map_err(RunError::Config)?;

    let out_dir = cli
        .out
        .clone()
        .or_else(|| config.output_dir.as_ref().map(PathBuf::from))
        .or_else(|| std::env::var_os(OUT_ENV_VAR).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));

    let outcome = run_experiment(&config, CommandKind::from(&cli.command), &out_dir, cli.seed)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&outcome.summary)
            .map_err(|e| RunError::Runtime(format!("serializing summary: {e}")))?
    );
    for file in &outcome.files {
        eprintln!("wrote {}", file.display());
    }
    Ok(())
}
