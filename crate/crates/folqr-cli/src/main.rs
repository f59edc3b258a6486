//! `folqr` command line: tune fractional-order PID controllers, simulate and
//! compare closed loops, and run the built-in validation suite.
//!
//! Exit codes: 0 success, 1 validation-suite failure, 2 configuration error,
//! 3 runtime or tuning failure.

mod commands;
mod config;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
    ValidationFailed,
}

#[derive(Parser)]
#[command(
    name = "folqr",
    version,
    about = "LQR-weighted tuning of fractional-order PID controllers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for an optimal controller with the genetic algorithm.
    Tune {
        /// Path to the TOML run configuration.
        #[arg(long)]
        config: PathBuf,
        /// Override the GA seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Sweep this many consecutive seeds and keep the best result.
        #[arg(long, default_value_t = 1)]
        seeds: u32,
        /// Override the output directory from the config.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Skip SVG plot artifacts.
        #[arg(long)]
        no_plots: bool,
    },
    /// Simulate the closed loop for an explicitly configured controller.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        no_plots: bool,
    },
    /// Run the built-in fixture validation suite.
    Validate,
    /// Simulate two controllers (or tuning modes) under identical settings.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// Seed for any tuning runs the comparison needs.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        no_plots: bool,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Tune {
            config,
            seed,
            seeds,
            output,
            no_plots,
        } => {
            let cfg = config::load(&config)?;
            commands::cmd_tune(&cfg, seed, seeds, output, !no_plots)
        }
        Command::Simulate {
            config,
            output,
            no_plots,
        } => {
            let cfg = config::load(&config)?;
            commands::cmd_simulate(&cfg, output, !no_plots)
        }
        Command::Validate => commands::cmd_validate(),
        Command::Compare {
            config,
            seed,
            output,
            no_plots,
        } => {
            let cfg = config::load(&config)?;
            commands::cmd_compare(&cfg, seed, output, !no_plots)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::ValidationFailed) => {
            eprintln!("error: validation suite failed");
            ExitCode::from(1)
        }
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
