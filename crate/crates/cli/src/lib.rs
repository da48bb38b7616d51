//! `triage` command-line pipeline: ingest analyzer reports, split, featurize,
//! train, evaluate, triage new reports, validate warnings by fuzzing and
//! rank features.
//!
//! Exit codes: 0 success, 2 usage error, 3 invalid input (schema, digest,
//! missing file), 4 internal failure.

mod commands;
mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{BackendKind, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Input(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "triage", version, about = "Reinforcement-learning triage of memory-safety warnings")]
pub struct Cli {
    /// Flat TOML configuration file; flags take precedence over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Maximum worker threads (0 = all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub backend: Option<BackendKind>,
    /// Directory for outputs whose path is not given explicitly.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct DatasetArgs {
    /// Warning store written by `ingest`.
    #[arg(long)]
    pub warnings: Option<PathBuf>,
    /// Split file written by `split`.
    #[arg(long)]
    pub splits: Option<PathBuf>,
    /// Feature sidecar written by `featurize`.
    #[arg(long)]
    pub features: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse analyzer reports, cluster warnings and attach labels.
    Ingest {
        #[arg(long = "report")]
        reports: Vec<PathBuf>,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assign labeled warnings to stratified train/val/test splits.
    Split {
        #[arg(long)]
        warnings: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract feature vectors for every warning.
    Featurize {
        #[arg(long)]
        warnings: Option<PathBuf>,
        /// Package metadata, one JSON object per line.
        #[arg(long)]
        metadata: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a policy with PPO and write a checkpoint.
    Train {
        #[command(flatten)]
        data: DatasetArgs,
        /// Recorded fuzz outcomes (with `--backend recorded`).
        #[arg(long)]
        recorded: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-epoch training log.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Evaluate a checkpoint on one split.
    Evaluate {
        #[command(flatten)]
        data: DatasetArgs,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        recorded: Option<PathBuf>,
        #[arg(long, default_value = "test")]
        split: String,
        /// Classify without fuzzing.
        #[arg(long)]
        no_fuzz: bool,
        /// Report file (flat key=value).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        verdicts: Option<PathBuf>,
    },
    /// Triage the warnings of a new report with a trained checkpoint.
    Triage {
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        metadata: Option<PathBuf>,
        #[arg(long)]
        recorded: Option<PathBuf>,
        #[arg(long)]
        templates: Option<PathBuf>,
        #[arg(long)]
        no_fuzz: bool,
        /// Verdicts file, one JSON object per warning.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the fuzz backend on explicit warning ids.
    FuzzValidate {
        #[arg(long)]
        warnings: Option<PathBuf>,
        /// Warning ids (16 hex digits), comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        ids: Vec<String>,
        #[arg(long)]
        recorded: Option<PathBuf>,
        #[arg(long)]
        templates: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank features by permutation importance (F1 drop).
    Importance {
        #[command(flatten)]
        data: DatasetArgs,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, default_value = "test")]
        split: String,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute the metrics report from a verdicts file and labels.
    Report {
        #[arg(long)]
        verdicts: Option<PathBuf>,
        #[arg(long)]
        warnings: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run_cli<I, T>(args: I, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(stdout, "{e}") } else { write!(stderr, "{e}") };
            return code;
        }
    };
    match commands::run(cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "triage: {e}");
            e.exit_code()
        }
    }
}
