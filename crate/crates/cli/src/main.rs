//! `axivort`: experiment harness over the axivort library.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "axivort", version, about = "Hill's vortex and vortex-pair experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Kernel property suite and reference values.
    KernelCheck(Common),
    /// Single Hill vortex travelling under its own velocity.
    SingleHill(Common),
    /// Odd-symmetric pair, exact or perturbed.
    Pair(Common),
    /// Constrained energy maximization on a grid.
    Maximize(Common),
    /// Interaction energy of exact pairs against separation.
    Einter(Common),
}

#[derive(Args, Clone, Debug)]
pub struct Common {
    /// JSON config; defaults are used for anything it leaves out.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Smaller resolution and shorter runs, same output files.
    #[arg(long)]
    quick: bool,
    /// Seed for particle jitter and sampled checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = match &cli.command {
        Command::KernelCheck(c) => ("kernel-check", c),
        Command::SingleHill(c) => ("single-hill", c),
        Command::Pair(c) => ("pair", c),
        Command::Maximize(c) => ("maximize", c),
        Command::Einter(c) => ("einter", c),
    };
    if let Some(p) = &common.config {
        if !p.is_file() {
            eprintln!("error: config file {} does not exist", p.display());
            return ExitCode::from(2);
        }
    }
    match commands::dispatch(name, common) {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
