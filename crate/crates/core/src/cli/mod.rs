//! Command-line driver: `generate`, `train` and `eval`.
//!
//! Every command writes its artifacts plus a [`RunManifest`] into `--out`.
//! Errors map to exit codes through [`Error::exit_code`]: 2 for bad input,
//! 3 for divergence, 4 for a checkpoint version mismatch.

mod commands;
mod manifest;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use commands::{
    cmd_eval, cmd_generate, cmd_train, load_train_config, CHECKPOINT_FILE, DEFAULT_SCORES_FILE, EVAL_FILE, GRID_FILE,
    ROC_FILE, TRACE_FILE,
};
pub use manifest::{FileDigest, RunClock, RunManifest, MANIFEST_FILE, MANIFEST_SCHEMA};

use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "chainrisk", version, about = "Two-stage GCN engine for SME credit risk")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Stage {
    /// Supply-chain mining over node pairs.
    Sc,
    /// Default prediction over SME nodes.
    Dp,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic SME economy with ground truth.
    Generate(GenerateArgs),
    /// Train one stage and write a checkpoint.
    Train(TrainArgs),
    /// Evaluate a checkpoint against a dataset.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, clap::Args)]
pub struct GenerateArgs {
    /// Generator config (TOML). Keys left out take the preset's values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Preset used when no config file is given.
    #[arg(long, default_value = crate::synthgen::PAPER_CALIBRATED)]
    pub preset: String,
    /// Overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the config's SME count.
    #[arg(long)]
    pub num_smes: Option<usize>,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, clap::Args)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub stage: Stage,
    /// Dataset directory in the graph text formats.
    #[arg(long)]
    pub data: PathBuf,
    /// Training config (TOML); defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Search the configured hyperparameter grid instead of training one cell.
    #[arg(long)]
    pub grid: bool,
    /// Retention threshold for mined edges.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Mined edges from a stage-one run (`dp` only).
    #[arg(long, conflicts_with = "no_enrich")]
    pub mined: Option<PathBuf>,
    /// Train `dp` on the observed graph alone.
    #[arg(long)]
    pub no_enrich: bool,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, clap::Args)]
pub struct EvalArgs {
    /// Checkpoint written by `train`.
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Dataset directory the checkpoint was trained on.
    #[arg(long)]
    pub data: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
}

/// Runs one parsed command and returns its manifest.
pub fn run(cli: &Cli) -> Result<RunManifest> {
    match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
    }
}
