//! `faultlens`: the detection pipeline as a sequence of file-based stages.
//!
//! Exit codes: 0 success, 2 configuration error, 3 missing or stale
//! prerequisite, 4 data error. `FAULTLENS_LOG` sets the log filter
//! (default `info`).

mod artifact;
mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{parse_override, RunConfig};
use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "faultlens",
    version,
    about = "Autoencoder fault detection and localization for sensor data"
)]
struct Cli {
    /// Run configuration (TOML, or JSON with a .json extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `paths.out_dir`.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Sets any configuration field, e.g. `--set detect.c=2.5`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE", value_parser = parse_override)]
    overrides: Vec<(String, String)>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the plant and write records, metadata, thresholds and lookup table.
    Simulate,
    /// Resample, impute, select signals and split into train and test parts.
    Preprocess,
    /// Train the autoencoder and fit the threshold on the training part.
    Train,
    /// Flag anomalous windows of the test part and rank their signals.
    Detect,
    /// Map flagged signals to components and failure types.
    Localize,
    /// Cross-validate over ten segments of the preprocessed data.
    Evaluate,
    /// Sweep the threshold multiplier on the test part.
    Roc,
    /// Print the effective configuration as TOML.
    Config,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut overrides = cli.overrides;
    if let Some(seed) = cli.seed {
        overrides.push(("seed".into(), seed.to_string()));
    }
    if let Some(dir) = cli.out_dir {
        let quoted = serde_json::to_string(&dir.display().to_string())?;
        overrides.push(("paths.out_dir".into(), quoted));
    }
    let cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;
    match cli.command {
        Command::Simulate => commands::simulate_cmd(&cfg),
        Command::Preprocess => commands::preprocess_cmd(&cfg),
        Command::Train => commands::train_cmd(&cfg),
        Command::Detect => commands::detect_cmd(&cfg),
        Command::Localize => commands::localize_cmd(&cfg),
        Command::Evaluate => commands::evaluate_cmd(&cfg),
        Command::Roc => commands::roc_cmd(&cfg),
        Command::Config => {
            let text = toml::to_string(&cfg).map_err(|e| CliError::Config(e.to_string()))?;
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FAULTLENS_LOG", "info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
