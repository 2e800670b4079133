//! `logns` — experiments on the logarithmic Schrödinger equation over
//! waveguide domains, driven by plain-text configs.
//!
//! Exit codes: 0 success, 1 validation/usage error, 2 non-convergence or
//! non-finite output, 3 property-suite failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod manifest;

#[derive(Debug)]
pub enum CliError {
    /// Bad config, bad flags, unreadable inputs (exit 1).
    Validation(String),
    /// A solver failed to converge or produced non-finite output (exit 2).
    NonConvergence(String),
    /// A verification suite found a violated property (exit 3).
    SuiteFailure(String),
}

impl CliError {
    pub fn validation(msg: String) -> Self {
        CliError::Validation(msg)
    }

    pub fn io(e: std::io::Error) -> Self {
        CliError::Validation(format!("i/o error: {e}"))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::NonConvergence(_) => 2,
            CliError::SuiteFailure(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::NonConvergence(m) => write!(f, "non-convergence: {m}"),
            CliError::SuiteFailure(m) => write!(f, "suite failure: {m}"),
        }
    }
}

impl From<logns::Error> for CliError {
    fn from(e: logns::Error) -> Self {
        match e {
            logns::Error::NotConverged(m) => CliError::NonConvergence(m),
            logns::Error::NonFinite(m) => CliError::NonConvergence(format!("non-finite: {m}")),
            other => CliError::Validation(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "logns",
    about = "Ground states, anisotropy scans, test-function bounds, and split-step evolution for the logarithmic Schrödinger equation on R^d x T^n",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Run configuration file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the `out` config key and `LOGNS_OUT`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed override (otherwise the `seed` config key, default 0).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one mass-constrained ground state.
    Groundstate(CommonArgs),
    /// Sweep the anisotropy weight and classify the regime.
    MuScan(CommonArgs),
    /// Integrate the time-dependent equation; optional perturbation.
    Evolve(CommonArgs),
    /// Tabulate the tent and box-eigenfunction energy bounds.
    Bounds(CommonArgs),
    /// Run a property suite.
    Verify {
        /// Suite name: split, scaling, subadditivity, brezis-lieb, gn,
        /// log-pair, tent, gausson, or all.
        #[arg(long)]
        suite: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print exact Gausson reference values.
    Oracle(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Groundstate(args) => {
            commands::groundstate::run(&args.config, args.out.as_deref(), args.seed)
        }
        Command::MuScan(args) => {
            commands::mu_scan::run(&args.config, args.out.as_deref(), args.seed)
        }
        Command::Evolve(args) => {
            commands::evolve_cmd::run(&args.config, args.out.as_deref(), args.seed)
        }
        Command::Bounds(args) => commands::bounds_cmd::run(&args.config, args.out.as_deref()),
        Command::Verify { suite, config, out } => {
            commands::verify::run(suite.as_deref(), config.as_deref(), out.as_deref())
        }
        Command::Oracle(args) => commands::oracle_cmd::run(&args.config, args.out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("logns: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
