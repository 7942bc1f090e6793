//! `magflow`: simulate, verify and construct integrable magnetic geodesic flows.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{build_rational, hodograph, list, simulate, verify};
use crate::config::RunConfig;
use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(
    name = "magflow",
    version,
    about = "Integrable magnetic geodesic flows on 2-surfaces"
)]
struct Cli {
    /// JSON run configuration (see docs/config-schema.json).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random sample.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Pass threshold for residual and drift checks.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the example catalog.
    List(list::Args),
    /// Integrate one orbit and write it as CSV.
    Simulate(simulate::Args),
    /// Run the verification suite and write a JSON report.
    Verify(verify::Args),
    /// Solve the quadratic-integral hodograph system on a grid.
    Hodograph(hodograph::Args),
    /// Build and check a rational-integral bundle.
    BuildRational(build_rational::Args),
}

/// Settings shared by every command after merging flags over the config file.
pub struct Globals {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub tol: f64,
    pub config: RunConfig,
}

fn run(cli: Cli) -> CliResult<()> {
    let config = RunConfig::load(cli.config.as_deref())?;
    let tol = cli.tol.or(config.tol).unwrap_or(1e-6);
    if !(tol > 0.0) {
        return Err(error::CliError::Config(format!(
            "tol must be positive, got {tol}"
        )));
    }
    let globals = Globals {
        seed: cli.seed.or(config.seed).unwrap_or(0),
        out_dir: cli
            .out_dir
            .or_else(|| config.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from("magflow-out")),
        tol,
        config,
    };
    match cli.command {
        Command::List(a) => list::run(&globals, a),
        Command::Simulate(a) => simulate::run(&globals, a),
        Command::Verify(a) => verify::run(&globals, a),
        Command::Hodograph(a) => hodograph::run(&globals, a),
        Command::BuildRational(a) => build_rational::run(&globals, a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("magflow: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
