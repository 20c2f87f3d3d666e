//! `nematic`: batch front end for the Landau-de Gennes colloid solvers.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 nonconvergence,
//! 4 I/O error, 1 any other failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nematic_core::NematicError;

use crate::commands::StudyKind;
use crate::config::RunConfig;
use crate::output::{Format, Sink};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    NotConverged(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::NotConverged(_) => 3,
            CliError::Io(_) => 4,
            CliError::Compute(_) => 1,
        }
    }
}

impl From<NematicError> for CliError {
    fn from(e: NematicError) -> Self {
        match e {
            NematicError::Io { .. } => CliError::Io(e.to_string()),
            NematicError::NotConverged { .. } | NematicError::Divergence { .. } => {
                CliError::NotConverged(e.to_string())
            }
            other => CliError::Compute(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "nematic",
    version,
    about = "Nematic colloid solvers: Saturn ring, tensor relaxation, harmonic maps"
)]
struct Cli {
    /// TOML file overriding the preset, key by key.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (default: `output.dir` of the config).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Write only this kind of file (default: both).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true, default_value = "default", value_name = "NAME")]
    preset: String,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Saturn-ring radius table. Values of w come from the arguments or `ring.w_values`.
    Ring {
        /// Anchoring ratios; `inf` for strong anchoring.
        #[arg(allow_hyphen_values = true)]
        w: Vec<String>,
    },
    /// Closed-form small-particle field on the grid.
    Q0Field,
    /// Axisymmetric Landau-de Gennes relaxation.
    LdgSolve,
    /// Axisymmetric harmonic-map solve with defect census.
    HarmonicSolve,
    /// Decay profile, convergence rate or eigenvalue exchange.
    Study {
        #[arg(value_enum)]
        kind: StudyKind,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let text = match &cli.config {
        Some(path) => Some(std::fs::read_to_string(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                CliError::Config(format!("{}: {e}", path.display()))
            } else {
                output::io_error(path, e)
            }
        })?),
        None => None,
    };
    let cfg = RunConfig::load(&cli.preset, text.as_deref())?;
    let dir = cli.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    let sink = Sink::new(dir, cli.format);
    match cli.cmd {
        Cmd::Ring { w } => {
            let explicit = cli.out.is_some().then_some(&sink);
            commands::ring(&cfg, w, explicit)
        }
        Cmd::Q0Field => commands::q0_field(&cfg, &sink),
        Cmd::LdgSolve => commands::ldg_solve(&cfg, &sink),
        Cmd::HarmonicSolve => commands::harmonic_solve(&cfg, &sink),
        Cmd::Study { kind } => commands::study(kind, &cfg, &sink),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nematic: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
