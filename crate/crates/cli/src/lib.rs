//! `bildsim`: one subcommand per experiment, configured by JSON files.
//!
//! Each run writes its CSV/JSON results, a plotting script and finally a
//! `manifest.json` into the output directory. Files are written to a
//! temporary name and renamed into place.

pub mod commands;
pub mod config;
pub mod determinism;
pub mod output;
pub mod plot;

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Clone, Parser)]
#[command(name = "bildsim", version, about = "Causal/observational two-level model benches")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "bildsim-out")]
    pub out: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Fix the friction to 1 so the diffusion coefficient is the temperature.
    #[arg(long, global = true)]
    pub paper_units: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Exact and Monte Carlo average of a quadratic variable.
    PcsftAverage,
    /// Exact and Monte Carlo correlation of two quadratic variables.
    PcsftCorrelation,
    /// Quantum CHSH value, grid maximum and angle sweep.
    ChshQuantum,
    /// Hidden-variable outcome stream and its correlations.
    ChshHv,
    /// Underdamped (phase-space) Langevin ensemble.
    BrownianCtm,
    /// Overdamped (configuration-space) Langevin ensemble.
    BrownianOm,
    /// Forward, backward and osmotic velocity profiles.
    VelocityField,
    /// Run the acceptance criteria.
    Acceptance {
        /// Comma-separated criterion numbers; all when omitted.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::PcsftAverage => "pcsft-average",
            Command::PcsftCorrelation => "pcsft-correlation",
            Command::ChshQuantum => "chsh-quantum",
            Command::ChshHv => "chsh-hv",
            Command::BrownianCtm => "brownian-ctm",
            Command::BrownianOm => "brownian-om",
            Command::VelocityField => "velocity-field",
            Command::Acceptance { .. } => "acceptance",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Config,
    Numerical,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Config, message: message.into() }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Numerical, message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Config => 2,
            ErrorKind::Numerical => 3,
        }
    }

    /// One line of JSON for stderr.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": { "kind": self.kind, "exit_code": self.exit_code(), "message": self.message }
        })
        .to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<bildsim_core::Error> for CliError {
    fn from(e: bildsim_core::Error) -> Self {
        if e.is_input_error() { CliError::config(e.to_string()) } else { CliError::numerical(e.to_string()) }
    }
}

/// Options shared by all subcommands once parsed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub paper_units: bool,
}

/// Runs a parsed command line on a thread pool of the requested size.
pub fn run(cli: &Cli) -> Result<Vec<String>, CliError> {
    let threads = cli.threads.unwrap_or(0);
    if cli.threads == Some(0) {
        return Err(CliError::config("--threads must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(cli))
}

fn dispatch(cli: &Cli) -> Result<Vec<String>, CliError> {
    let opts = RunOptions { seed: cli.seed, paper_units: cli.paper_units };
    if let Command::Acceptance { only } = &cli.command {
        return commands::acceptance(only, &cli.out);
    }
    let path = cli.config.as_deref().ok_or_else(|| CliError::config(format!("{} needs --config <path>", cli.command.name())))?;
    let text = read_config(path)?;
    run_text(&cli.command, &text, &opts, &cli.out)
}

fn read_config(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::config(format!("config {}: {e}", path.display())))
}

/// Runs one experiment from configuration text and writes its outputs.
/// Returns the written file names, manifest last.
pub fn run_text(command: &Command, text: &str, opts: &RunOptions, out: &Path) -> Result<Vec<String>, CliError> {
    let start = std::time::Instant::now();
    let result = commands::execute(command, text, opts)?;
    output::write_run(out, command.name(), result, start)
}
