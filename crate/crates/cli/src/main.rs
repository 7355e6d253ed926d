//! `integrable`: command-line front end for `integrable-core`.
//!
//! Exit codes: 0 success, 1 computation failed or a check did not pass,
//! 2 usage error, 3 rapidity off the curve, 4 singular Boltzmann weight,
//! 5 enumeration needs finite exclusion bounds.

mod chiral_cmd;
mod output;
mod painleve_cmd;
mod quasi_cmd;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chiral_cmd::ChiralCommand;
use painleve_cmd::PainleveArgs;
use quasi_cmd::QuasiCommand;

#[derive(Debug, Parser)]
#[command(name = "integrable", version, about = "Painlevé III, chiral Potts and quasiparticle tools")]
struct Cli {
    /// Worker threads for parallel kernels (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for η and optionally the scaling functions G±; CSV or JSON.
    Painleve(PainleveArgs),
    /// Chiral Potts weights, transfer matrices and order parameter; JSON.
    #[command(subcommand)]
    ChiralPotts(ChiralCommand),
    /// Quasiparticle windows, states and counting polynomials; JSON.
    #[command(subcommand)]
    Quasi(QuasiCommand),
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failed(String),
    CheckFailed(String),
    OffCurve(String),
    Singular(String),
    NeedsFinite(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) | CliError::CheckFailed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::OffCurve(_) => 3,
            CliError::Singular(_) => 4,
            CliError::NeedsFinite(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m)
            | CliError::Failed(m)
            | CliError::CheckFailed(m)
            | CliError::OffCurve(m)
            | CliError::Singular(m)
            | CliError::NeedsFinite(m) => m,
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Painleve(args) => painleve_cmd::run(args),
        Command::ChiralPotts(cmd) => chiral_cmd::run(cmd),
        Command::Quasi(cmd) => quasi_cmd::run(cmd),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
