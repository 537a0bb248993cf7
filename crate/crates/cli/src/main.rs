//! `projreg` command-line interface.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CliError, Common};
use projreg::{Parameter, VerifyCounts};

#[derive(Parser)]
#[command(name = "projreg", version, about = "Projective regularization of Kepler and Manev dynamics")]
struct Cli {
    /// Run configuration (TOML, or JSON by extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; overrides `outputs.csv` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Random seed for `verify`.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Evolution parameter: t, s or tau.
    #[arg(long, global = true)]
    param: Option<Parameter>,
    /// Suppress the JSON summary and informational messages.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the transformed equations of motion.
    Propagate,
    /// Sample the closed-form solution of the unperturbed problem.
    ClosedForm,
    /// Run the randomized self-checks.
    Verify {
        /// Random phase-space points per pointwise check.
        #[arg(long, default_value_t = VerifyCounts::default().points)]
        points: usize,
        /// Random orbits per trajectory check.
        #[arg(long, default_value_t = VerifyCounts::default().orbits)]
        orbits: usize,
        /// Augmented dimension.
        #[arg(long, default_value_t = 4)]
        dimension: usize,
    },
    /// Compare fixed-step RK4 in tau against direct Cartesian integration.
    Compare,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = Common { config: cli.config, out: cli.out, param: cli.param, quiet: cli.quiet };
    let result = match cli.command {
        Command::Propagate => commands::propagate(&common),
        Command::ClosedForm => commands::closed_form(&common),
        Command::Verify { points, orbits, dimension } => {
            commands::verify(&common, cli.seed, VerifyCounts { points, orbits }, dimension)
        }
        Command::Compare => commands::compare(&common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report_error(&e);
            ExitCode::from(e.code())
        }
    }
}

fn report_error(e: &CliError) {
    eprintln!("error: {}", e.message());
}
