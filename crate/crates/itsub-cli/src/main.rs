//! `itsub`: density grids, moment tables, simulation runs and self-checks for
//! the inverse tempered stable subordinator.
//!
//! Exit codes: 0 success, 1 self-check failure, 2 usage error, 3 numerical failure.

mod commands;
mod grid;
mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use grid::GridSpec;
use itsub::TemperedStableParams;
use table::Format;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0} self-check(s) failed")]
    ChecksFailed(usize),
    #[error("output: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::ChecksFailed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "itsub", version, about = "Inverse tempered stable subordinator numerics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Density h_λ(x,t) on an x-grid: `x,h,err,method`.
    Density(commands::DensityArgs),
    /// Moments E[E_λ(t)^q] and their asymptotic forms on a t-grid.
    Moments(commands::MomentsArgs),
    /// First-passage samples E_λ(t) from simulated subordinator paths.
    Simulate(commands::SimulateArgs),
    /// Finite-difference residual of the PDE satisfied by the density at β = 1/m.
    PdeCheck(commands::PdeArgs),
    /// Run the registered invariant checks.
    Selfcheck(commands::SelfcheckArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Stability index β in (0,1).
    #[arg(long)]
    pub beta: f64,
    /// Tempering λ ≥ 0; 0 is the inverse stable case.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
}

impl ModelArgs {
    pub fn params(&self) -> Result<TemperedStableParams, CliError> {
        TemperedStableParams::new(self.beta, self.lambda).map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; `stdout` or absent writes to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl OutputArgs {
    pub fn open(&self) -> Result<Box<dyn Write>, CliError> {
        match &self.out {
            Some(p) if p.as_os_str() != "stdout" && p.as_os_str() != "-" => {
                let f = File::create(p).map_err(|e| CliError::Usage(format!("cannot open {}: {e}", p.display())))?;
                Ok(Box::new(BufWriter::new(f)))
            }
            _ => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        }
    }
}

/// Parses a `--t`/`--x` value, reporting a usage error on failure.
pub fn single(grid: &GridSpec, flag: &str) -> Result<f64, CliError> {
    match grid {
        GridSpec::Single(v) => Ok(*v),
        _ => Err(CliError::Usage(format!("--{flag} takes a single value here"))),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Density(a) => commands::density(&a),
        Command::Moments(a) => commands::moments(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::PdeCheck(a) => commands::pde_check(&a),
        Command::Selfcheck(a) => commands::selfcheck(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("itsub: {e}");
            ExitCode::from(e.code())
        }
    }
}
