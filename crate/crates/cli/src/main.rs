//! `hardybench`: verify, sweep and probe the Hardy-type inequalities from
//! the command line.
//!
//! Exit status: 0 when every asserted inequality holds, 1 when one is
//! violated or a computation fails (reports are still written), 2 for
//! configuration errors (nothing is written).

mod config;
mod run;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Command, Flags, RunConfig};

#[derive(Parser)]
#[command(name = "hardybench", version, about = "Numerical checks of Hardy, critical Hardy and Rellich stability inequalities on homogeneous groups")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Evaluate one inequality for one profile
    Verify(Flags),
    /// Evaluate a parameter grid or the shipped corpus
    Sweep(Flags),
    /// Search a profile family for the sharp or the stability constant
    Sharpness(Flags),
    /// Tabulate the closed-form constants
    Constants(Flags),
    /// Run the invariant suite
    Selftest(Flags),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match cli.command {
        Sub::Verify(f) => (Command::Verify, f),
        Sub::Sweep(f) => (Command::Sweep, f),
        Sub::Sharpness(f) => (Command::Sharpness, f),
        Sub::Constants(f) => (Command::Constants, f),
        Sub::Selftest(f) => (Command::Selftest, f),
    };
    let config = match RunConfig::resolve(command, &flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    match run::run(&config) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(run::exit_code(&e))
        }
    }
}
