//! `nlqw`: batch runner for nonlinear quantum walk experiments.
//!
//! Exit codes: 0 all configured checks passed, 1 a check failed or a series did not
//! converge, 2 invalid configuration or usage, 3 runtime failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "nlqw", version, about = "Nonlinear discrete-time quantum walk experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON experiment configuration
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out` in the config)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a config field, e.g. `--set coin.g=-0.6`; repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one initial state and write the recorded series and snapshots
    Simulate(Common),
    /// Sup norms at t = 10^4 for the eight table cells
    Table1(Common),
    /// Log-log fit of the sup-norm decay
    Decay(Common),
    /// Compare X_t / t with the weak-limit density
    WeakLimit(Common),
    /// Scattering series for the asymptotic profile
    Scatter(Common),
    /// Recover the first derivatives of the nonlinearity from probes of the wave operator
    Recover(Common),
    /// Print the configuration JSON schema
    Schema,
}

enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("NLQW_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Config(anyhow::anyhow!("NLQW_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Runtime(e.into()))
}

fn run(cli: Cli) -> Result<bool, Failure> {
    configure_threads()?;
    let (common, cmd): (Common, fn(&config::ExperimentConfig) -> commands::Outcome) = match cli.command {
        Command::Schema => {
            print!("{}", config::SCHEMA);
            return Ok(true);
        }
        Command::Simulate(c) => (c, commands::simulate),
        Command::Table1(c) => (c, commands::table1),
        Command::Decay(c) => (c, commands::decay),
        Command::WeakLimit(c) => (c, commands::weak_limit),
        Command::Scatter(c) => (c, commands::scatter),
        Command::Recover(c) => (c, commands::recover),
    };
    let cfg = config::load(common.config.as_deref(), &common.sets, common.out.as_deref()).map_err(Failure::Config)?;
    match cmd(&cfg) {
        commands::Outcome::Done(pass) => Ok(pass),
        commands::Outcome::BadInput(e) => Err(Failure::Config(e)),
        commands::Outcome::Failed(e) => Err(Failure::Runtime(e)),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
