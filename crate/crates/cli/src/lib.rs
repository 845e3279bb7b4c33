//! Library side of the `satfront` command: configuration, subcommands and
//! artifact emission.

// `!(x > 0.0)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod artifacts;
pub mod commands;
pub mod config;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use commands::{cmd_compare, cmd_converge, cmd_simulate, cmd_speed, cmd_wave, Outcome};
pub use config::{ConfigError, RunConfig};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_FAILURE: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Science(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(ConfigError::Read { .. }) => EXIT_IO,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io { .. } => EXIT_IO,
            CliError::Science(_) => EXIT_FAILURE,
        }
    }

    pub(crate) fn io(path: &Path, e: impl ToString) -> Self {
        CliError::Io { path: path.display().to_string(), message: e.to_string() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Simulate,
    Wave,
    Speed,
    Converge,
    Compare,
}

#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: Subcommand,
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
}

/// Loads the config, runs the subcommand and maps the result to an exit code.
/// Messages go to stderr, the one-line outcome to stdout.
pub fn execute(inv: &Invocation) -> i32 {
    match try_execute(inv) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            println!("{}: {}", if outcome.passed { "PASS" } else { "FAIL" }, outcome.message);
            if outcome.passed {
                EXIT_PASS
            } else {
                EXIT_FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn try_execute(inv: &Invocation) -> Result<Outcome, CliError> {
    let mut config = RunConfig::load(&inv.config)?;
    if inv.seed.is_some() {
        config.seed = inv.seed;
    }
    config.validate_common()?;
    if let Some(n) = inv.threads {
        if n == 0 {
            return Err(ConfigError::Invalid { key: "--threads".into(), reason: "must be at least 1".into() }.into());
        }
        // A global pool can be installed once per process; later calls keep the first.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let out = inv
        .out
        .clone()
        .or_else(|| config.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    match inv.command {
        Subcommand::Simulate => cmd_simulate(&config, &out),
        Subcommand::Wave => cmd_wave(&config, &out),
        Subcommand::Speed => cmd_speed(&config, &out),
        Subcommand::Converge => cmd_converge(&config, &out),
        Subcommand::Compare => cmd_compare(&config, &out),
    }
}
