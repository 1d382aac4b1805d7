//! `tsampling`: batch analysis, duals and reconstruction for sampling
//! problems stored as JSON.
//!
//! Exit codes: 0 when the verdict is positive, 1 when the problem is not
//! recoverable or a check fails, 2 on usage or schema errors.

mod commands;
mod output;
mod problem;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use commands::Options;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] tsampling::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Csv(_) => 2,
            CliError::Core(_) | CliError::Io(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "tsampling", version, about = "Generalized sampling and reconstruction in T-invariant subspaces")]
struct Cli {
    /// Problem file (JSON).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Output CSV path; commands writing several vectors use it as a stem.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    /// Grid size on the torus.
    #[arg(long, global = true)]
    grid: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank or frame constants and a recoverability verdict.
    Analyze,
    /// Reconstruction vectors or coefficient sequences.
    Dual {
        /// JSON matrix U selecting a member of the left-inverse family.
        #[arg(long)]
        u_matrix: Option<PathBuf>,
    },
    /// Rebuild a vector from its samples.
    Reconstruct {
        /// Samples as CSV; the shift model takes one file per sampler.
        #[arg(long, required = true)]
        samples: Vec<PathBuf>,
        /// Ground truth to compare against.
        #[arg(long)]
        truth: Vec<PathBuf>,
    },
    /// B-spline samples at nK and nK+1 with their exact Bezout duals.
    SplineDemo {
        #[arg(long = "K", default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 4)]
        p: usize,
    },
    /// Polyphase certification of a filter bank.
    PrCheck,
    /// Sampling on a finite abelian group.
    LcaDemo,
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let opts = Options {
        input: cli.input,
        out: cli.out,
        tol: cli.tol,
        grid: cli.grid,
    };
    if !(opts.tol > 0.0) {
        return Err(CliError::Usage("--tol must be positive".into()));
    }
    if opts.grid == Some(0) {
        return Err(CliError::Usage("--grid must be positive".into()));
    }
    match cli.command {
        Command::Analyze => commands::analyze(&opts),
        Command::Dual { u_matrix } => commands::dual(&opts, u_matrix.as_deref()),
        Command::Reconstruct { samples, truth } => commands::reconstruct_cmd(&opts, &samples, &truth),
        Command::SplineDemo { k, p } => commands::spline_demo(k, p, &opts),
        Command::PrCheck => commands::pr_check(&opts),
        Command::LcaDemo => commands::lca_demo(&opts),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
