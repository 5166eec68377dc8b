use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lintseq_core::lint::{LinterKind, LinterSpec};
use lintseq_core::pipeline::GenerateConfig;
use lintseq_core::sampler::{Mode, SampleOptions};
use lintseq_core::DEFAULT_SEPARATOR;
use serde::Deserialize;

use crate::{GenerateArgs, LinterArgs};

/// Keys accepted in a `--config` file. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    input: Option<PathBuf>,
    output: Option<PathBuf>,
    mode: Option<String>,
    samples: Option<usize>,
    seed: Option<u64>,
    linter: Option<String>,
    linter_cmd: Option<String>,
    linter_pattern: Option<String>,
    linter_timeout_ms: Option<u64>,
    include_warnings: Option<bool>,
    workers: Option<usize>,
    separator: Option<String>,
    dedup: Option<bool>,
    unique_sequences: Option<bool>,
    max_attempts: Option<u64>,
    skip_dirty: Option<bool>,
    max_lines: Option<usize>,
    max_skip_fraction: Option<f64>,
}

fn read_config(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: PathBuf,
    pub output: PathBuf,
    pub linter: LinterSpec,
    pub generate: GenerateConfig,
    pub max_skip_fraction: f64,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

pub(crate) fn linter_spec(
    args: &LinterArgs,
    kind: Option<&str>,
    cmd: Option<String>,
    pattern: Option<String>,
    timeout_ms: Option<u64>,
    include_warnings: bool,
) -> Result<LinterSpec> {
    let kind = match args.linter.as_deref().or(kind).unwrap_or("builtin") {
        "builtin" => LinterKind::Builtin,
        "external" => LinterKind::External,
        other => bail!("unknown linter {other:?} (expected builtin or external)"),
    };
    let mut spec = LinterSpec {
        kind,
        command_template: args.linter_cmd.clone().or(cmd),
        finding_pattern: args.linter_pattern.clone().or(pattern),
        include_warnings: args.include_warnings || include_warnings,
        ..LinterSpec::default()
    };
    if let Some(ms) = args.linter_timeout_ms.or(timeout_ms) {
        spec.timeout_ms = ms;
    }
    if kind == LinterKind::External && spec.finding_pattern.is_none() {
        spec.finding_pattern = Some(lintseq_core::lint::DEFAULT_FINDING_PATTERN.to_string());
    }
    Ok(spec)
}

impl RunConfig {
    /// Flags override the config file, which overrides defaults.
    pub fn from_args(args: &GenerateArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => read_config(path)?,
            None => FileConfig::default(),
        };
        let Some(input) = args.input.clone().or(file.input) else { bail!("--input is required") };
        let Some(output) = args.output.clone().or(file.output) else { bail!("--output is required") };
        let mode: Mode = match args.mode.as_deref().or(file.mode.as_deref()) {
            Some(m) => m.parse().map_err(anyhow::Error::msg)?,
            None => Mode::default(),
        };
        let defaults = SampleOptions::default();
        let sample = SampleOptions {
            samples: args.samples.or(file.samples).unwrap_or(defaults.samples),
            mode,
            global_seed: args.seed.or(file.seed).unwrap_or(defaults.global_seed),
            unique_sequences: args.unique_sequences || file.unique_sequences.unwrap_or(false),
            max_attempts: args.max_attempts.or(file.max_attempts).unwrap_or(defaults.max_attempts),
            skip_dirty_sources: args.skip_dirty || file.skip_dirty.unwrap_or(false),
            max_lines: args.max_lines.or(file.max_lines).unwrap_or(defaults.max_lines),
        };
        let generate = GenerateConfig {
            sample,
            workers: args.workers.or(file.workers).unwrap_or_else(default_workers),
            separator: args.separator.clone().or(file.separator).unwrap_or_else(|| DEFAULT_SEPARATOR.to_string()),
            dedup: args.dedup || file.dedup.unwrap_or(false),
        };
        generate.validate()?;
        let linter = linter_spec(
            &args.linter,
            file.linter.as_deref(),
            file.linter_cmd,
            file.linter_pattern,
            file.linter_timeout_ms,
            file.include_warnings.unwrap_or(false),
        )?;
        let max_skip_fraction = args.max_skip_fraction.or(file.max_skip_fraction).unwrap_or(0.05);
        if !(0.0..=1.0).contains(&max_skip_fraction) {
            bail!("--max-skip-fraction must lie in [0, 1]");
        }
        Ok(Self { input, output, linter, generate, max_skip_fraction })
    }
}
