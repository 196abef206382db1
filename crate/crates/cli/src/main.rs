mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

#[derive(Parser)]
#[command(
    name = "demand",
    version,
    about = "Hourly bikeshare demand: ingest, tune, train and explain"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the hourly feature matrix from trip, weather and holiday files.
    Ingest(Common),
    /// Descriptive statistics of a matrix.
    Describe(Common),
    /// Cross-validated grid search over boosting hyperparameters.
    Tune(Common),
    /// Train on an 80/20 split and report test metrics.
    Train(Common),
    /// SHAP summary, dependence and force exports for a trained model.
    Explain(Common),
}

#[derive(Args)]
struct Common {
    /// Run configuration (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config entry, e.g. `--set train.eta=0.05`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut config = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::empty(std::env::current_dir().unwrap_or_default()),
    };
    for pair in &common.overrides {
        config.set(pair)?;
    }
    if let Some(seed) = common.seed {
        config.set(&format!("seed={seed}"))?;
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<()> {
    let (common, action): (&Common, fn(&RunConfig) -> Result<()>) = match &cli.command {
        Command::Ingest(c) => (c, commands::ingest),
        Command::Describe(c) => (c, commands::describe),
        Command::Tune(c) => (c, commands::tune),
        Command::Train(c) => (c, commands::train),
        Command::Explain(c) => (c, commands::explain),
    };
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(CliError::config("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    }
    let config = load_config(common)?;
    action(&config)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
