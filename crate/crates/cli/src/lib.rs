//! Command-line front end for `impulsive-core`.
//!
//! [`run`] parses arguments, executes one subcommand and returns the process
//! exit code:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success, certificate PASS |
//! | 2 | usage or configuration error |
//! | 3 | certificate FAIL |
//! | 4 | solver non-convergence |
//! | 5 | an inequality or bound is violated beyond tolerance |

pub mod campaign;
pub mod commands;
pub mod config;
pub mod csv_io;
pub mod perturb;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use commands::Cli;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CERTIFICATE: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;
pub const EXIT_VIOLATION: i32 = 5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error("usage: {0}")]
    Usage(String),
    #[error("solver failed: {0}")]
    Solver(impulsive_core::Error),
    #[error(transparent)]
    Core(impulsive_core::Error),
    #[error(transparent)]
    Csv(#[from] csv_io::CsvError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<impulsive_core::Error> for CliError {
    fn from(e: impulsive_core::Error) -> Self {
        match e {
            impulsive_core::Error::NonConvergence { .. } | impulsive_core::Error::Divergence { .. } => {
                CliError::Solver(e)
            }
            other => CliError::Core(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solver(_) => EXIT_SOLVER,
            _ => EXIT_USAGE,
        }
    }
}

/// Runs the CLI with `argv` (program name first), writing reports to `out`
/// and diagnostics to `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    match commands::execute(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if let CliError::Core(impulsive_core::Error::InvalidProblem(vs)) = &e {
                for v in vs {
                    let _ = writeln!(err, "  - {v}");
                }
            }
            e.exit_code()
        }
    }
}
