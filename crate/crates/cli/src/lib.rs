//! Command-line front end for `lintseq`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

pub use commands::run;
pub use config::RunConfig;

/// Exit status for a run that finished but skipped or failed on some inputs.
pub const EXIT_PARTIAL: i32 = 2;
pub const EXIT_FATAL: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "lintseq", version, about = "Linter-guided synthetic edit sequences for code corpora")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample edit sequences for every program in a corpus.
    Generate(GenerateArgs),
    /// Apply the edits in each record and write the resulting programs.
    Resolve(ResolveArgs),
    /// Summarize a file of edit-sequence records.
    Stats(StatsArgs),
    /// Unbiased pass@k from sample counts.
    Passk(PasskArgs),
    /// Inference FLOPs for a decoder-only model.
    Flops(FlopsArgs),
    /// Fraction of programs with linter errors.
    Lintcheck(LintcheckArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct LinterArgs {
    /// `builtin` or `external`.
    #[arg(long)]
    pub linter: Option<String>,
    /// External linter command; `{file}` is replaced by the path to check.
    #[arg(long)]
    pub linter_cmd: Option<String>,
    /// Regex with named captures `line`, `code` and `message`.
    #[arg(long)]
    pub linter_pattern: Option<String>,
    #[arg(long)]
    pub linter_timeout_ms: Option<u64>,
    /// Count warnings as well as errors.
    #[arg(long)]
    pub include_warnings: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GenerateArgs {
    /// JSON config file; flags take precedence over its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output JSON-lines file, or `-` for stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// `lintseq` or `randseq`.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(short = 's', long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub linter: LinterArgs,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub separator: Option<String>,
    #[arg(long)]
    pub dedup: bool,
    #[arg(long)]
    pub unique_sequences: bool,
    #[arg(long)]
    pub max_attempts: Option<u64>,
    #[arg(long)]
    pub skip_dirty: bool,
    #[arg(long)]
    pub max_lines: Option<usize>,
    /// Exit with status 2 when more than this fraction of inputs is skipped.
    #[arg(long)]
    pub max_skip_fraction: Option<f64>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ResolveArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "-")]
    pub output: PathBuf,
    #[arg(long)]
    pub separator: Option<String>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PasskArgs {
    /// Samples per problem.
    pub n: Option<u64>,
    /// Correct samples.
    pub c: Option<u64>,
    /// One or more k values.
    pub k: Vec<u64>,
    /// JSON-lines file of `{"n": .., "c": ..}` problems; reports the mean.
    #[arg(long)]
    pub problems: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct FlopsArgs {
    /// Non-embedding parameters.
    #[arg(long)]
    pub params: u64,
    #[arg(long)]
    pub layers: u64,
    /// Context length in tokens.
    #[arg(long)]
    pub context: u64,
    /// Tokens generated per sample.
    #[arg(long, conflicts_with = "chars")]
    pub tokens: Option<u64>,
    /// Characters generated per sample, converted with `--chars-per-token`.
    #[arg(long)]
    pub chars: Option<u64>,
    #[arg(long, default_value_t = 4.0)]
    pub chars_per_token: f64,
    #[arg(long, default_value_t = 1)]
    pub samples: u64,
    #[arg(long, default_value_t = 1)]
    pub problems: u64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct LintcheckArgs {
    /// JSON-lines file whose records carry a `program` field.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub linter: LinterArgs,
    #[arg(long)]
    pub json: bool,
}
