//! `tep` command-line entry point.
//!
//! Usage: `tep <simulate|evolve|threshold|scaling|urn|gamma|compare>
//! --config <file> [--jobs N] [--seed S] [--out DIR]`.
//! Exit codes: 0 ok, 2 config error, 3 runtime error. Set `TEP_LOG` for the
//! log level.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use tep_cli::config::Mode;
use tep_cli::{RunError, Runner};

#[derive(Parser)]
#[command(name = "tep", about = "TEP/BP decoding experiments over the BEC")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Experiment configuration (JSON or TOML).
    #[arg(long)]
    config: PathBuf,
    /// Worker threads (defaults to the available cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory override.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo decoding trials over an (n, eps) grid.
    Simulate(CommonArgs),
    /// Expected-evolution trajectories with simulated overlays.
    Evolve(CommonArgs),
    /// Peeling threshold and critical point of the ensemble.
    Threshold(CommonArgs),
    /// Full scaling-law parameter pipeline.
    Scaling(CommonArgs),
    /// Urn-model diagnostic for average left-degree growth.
    Urn(CommonArgs),
    /// Two-stage gamma procedure across sizes.
    Gamma(CommonArgs),
    /// Predicted vs simulated error-rate table.
    Compare(CommonArgs),
}

impl Command {
    fn mode(&self) -> Mode {
        match self {
            Command::Simulate(_) => Mode::Simulate,
            Command::Evolve(_) => Mode::Evolve,
            Command::Threshold(_) => Mode::Threshold,
            Command::Scaling(_) => Mode::Scaling,
            Command::Urn(_) => Mode::Urn,
            Command::Gamma(_) => Mode::Gamma,
            Command::Compare(_) => Mode::Compare,
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Simulate(a)
            | Command::Evolve(a)
            | Command::Threshold(a)
            | Command::Scaling(a)
            | Command::Urn(a)
            | Command::Gamma(a)
            | Command::Compare(a) => a,
        }
    }
}

fn run() -> Result<(), RunError> {
    let cli = Cli::parse();
    let args = cli.command.args();
    if let Some(jobs) = args.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .ok();
    }
    let mut runner = Runner::new(&args.config, args.out.clone())?;
    if runner.cfg.mode != cli.command.mode() {
        return Err(RunError::Config(tep_cli::config::ConfigError::Invalid(
            format!(
                "config mode {:?} does not match the subcommand",
                runner.cfg.mode
            ),
        )));
    }
    if let Some(seed) = args.seed {
        runner.cfg.seed = seed;
    }
    runner.run()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("TEP_LOG")).init();
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
