//! `pgl` command line: `solve`, `sweep`, `audit`, `spectrum` and `report`.
//!
//! Exit status 0 on success, 1 when a solve, audit or stability check fails,
//! 2 on invalid usage. Artifacts go to `--out`, or to `$PGL_OUT_DIR`, or to
//! the working directory.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use config::{Format, RunArgs, RunConfig, SolverChoice, OUT_ENV};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "pgl", version, about = "Radial p-Ginzburg-Landau vortex profiles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for each p; write the profile CSV and a JSON report.
    Solve(RunArgs),
    /// Solve across a list of p and tabulate large-p rates in rates.csv.
    Sweep(RunArgs),
    /// Solve and print every invariant check.
    Audit(RunArgs),
    /// Second-variation spectra for modes n = 1..8 and a stability verdict.
    Spectrum(RunArgs),
    /// Solve and add tail constants, gradient bound and coefficient signs.
    Report(RunArgs),
}

pub fn run(command: Command) -> Result<(), CliError> {
    let (name, args, nodes) = match &command {
        Command::Solve(a) => ("solve", a, crate::DEFAULT_NODES),
        Command::Sweep(a) => ("sweep", a, crate::DEFAULT_NODES),
        Command::Audit(a) => ("audit", a, crate::DEFAULT_NODES),
        Command::Spectrum(a) => ("spectrum", a, 2000),
        Command::Report(a) => ("report", a, crate::DEFAULT_NODES),
    };
    let cfg = RunConfig::from_args(name, args, nodes)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.workers {
        pool = pool.num_threads(w);
    }
    let pool = pool.build().map_err(|e| CliError::Usage(e.to_string()))?;
    pool.install(|| match command {
        Command::Solve(_) => commands::solve(&cfg),
        Command::Sweep(_) => commands::sweep(&cfg),
        Command::Audit(_) => commands::audit_cmd(&cfg),
        Command::Spectrum(_) => commands::spectrum_cmd(&cfg),
        Command::Report(_) => commands::report(&cfg),
    })
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
