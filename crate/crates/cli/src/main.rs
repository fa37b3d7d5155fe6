//! `critwin`: scaling functions, Wright's constants and critical-window
//! percolation experiments from the command line.
//!
//! Exit status is 0 on success, 1 when a computation or verification fails and
//! 2 on usage errors.

mod commands;
mod output;
mod range;
mod verify;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand};

use commands::Failure;

#[derive(Debug, Parser)]
#[command(name = "critwin", version, about, propagate_version = true)]
struct Cli {
    /// Worker threads. Results do not depend on this value.
    #[arg(long, global = true, env = "CRITWIN_THREADS", value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Wright's constants w_0..w_L as CSV.
    Wright(commands::WrightArgs),
    /// Moments f_k(λ) on a grid as CSV.
    Fk(commands::FkArgs),
    /// Rigorous series value of f_k(0) with its error bound.
    Fk0(commands::Fk0Args),
    /// log f and its first two derivatives on a grid as CSV.
    Profile(commands::ProfileArgs),
    /// Maximiser of d/dλ log f as JSON.
    Maximize(commands::MaximizeArgs),
    /// Monte Carlo estimators for G(n, p) in the critical window as JSON.
    Simulate(commands::SimulateArgs),
    /// Susceptibility of bond percolation on the n-cycle as CSV.
    Cycle(commands::CycleArgs),
    /// Self-checks against exact oracles, printed as a table.
    Verify(verify::VerifyArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads.into()).build_global() {
            eprintln!("critwin: could not start {threads} worker threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    let outcome = match &cli.command {
        Command::Wright(a) => commands::wright(a),
        Command::Fk(a) => commands::fk(a),
        Command::Fk0(a) => commands::fk0(a),
        Command::Profile(a) => commands::profile(a),
        Command::Maximize(a) => commands::maximize(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Cycle(a) => commands::cycle(a),
        Command::Verify(a) => {
            return if verify::run(a) { ExitCode::SUCCESS } else { ExitCode::FAILURE };
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(message)) => Cli::command().error(ErrorKind::ValueValidation, message).exit(),
        Err(Failure::Compute(e)) => {
            eprintln!("critwin: {e}");
            ExitCode::FAILURE
        }
    }
}
