//! `slotmab`: simulate, verify and measure regret of multi-slot bandit auctions.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::ExperimentConfig;

#[derive(Debug, Parser)]
#[command(name = "slotmab", version, about = "Multi-slot pay-per-click bandit auctions: simulation, verification, regret")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment configuration; built-in defaults fill every missing key.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides every seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; defaults to `output.path` or standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Leaves out the generation-time header line.
    #[arg(long, global = true)]
    no_timestamp: bool,
    /// Worker threads for parallel trials and instances.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Runs one auction and writes its per-round trace and payments.
    Simulate,
    /// Runs every verifier check; exits with status 1 if a claimed property fails.
    Verify,
    /// Monte Carlo regret sweep over the configured horizons.
    RegretSweep,
    /// Regret sweep of the explore-exploit rule at four agents and two slots, on log scale.
    ReproduceFig1,
}

fn execute(cli: &Cli) -> Result<commands::Output> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::parse(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.override_seed(seed);
    }
    let timestamp = (cfg.output.timestamp && !cli.no_timestamp)
        .then(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()));
    let command = || match cli.command {
        Command::Simulate => commands::simulate(&cfg, timestamp),
        Command::Verify => commands::verify(&cfg, timestamp),
        Command::RegretSweep => commands::regret_sweep(&cfg, timestamp),
        Command::ReproduceFig1 => commands::reproduce_fig1(&cfg, timestamp),
    };
    let output = match cli.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("--jobs")?
            .install(command)?,
        None => command()?,
    };
    match cli.out.clone().or_else(|| cfg.output.path.clone().map(PathBuf::from)) {
        Some(path) => std::fs::write(&path, &output.text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{}", output.text),
    }
    Ok(output)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(output) if output.failed => ExitCode::from(1),
        Ok(_) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
