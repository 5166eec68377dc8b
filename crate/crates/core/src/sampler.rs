//! Backward sampling of program-state sequences.
//!
//! Both samplers start from the full program and repeatedly delete lines
//! until nothing is left; the collected states are then reversed so the
//! sequence grows from the empty program to the original.
//!
//! * [`backward_sample`] deletes one uniformly drawn line, then keeps
//!   removing every line that carries a finding absent from the original's
//!   report until the linter reports nothing new.
//! * [`random_sample`] draws a count `k` uniformly from `1..=len`, then
//!   deletes a uniform `k`-subset, with no linter involved.

use std::collections::BTreeSet;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::SourceExample;
use crate::diffkit::{join_lines, split_lines};
use crate::lint::{LintError, Linter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Lintseq,
    Randseq,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lintseq" => Ok(Mode::Lintseq),
            "randseq" => Ok(Mode::Randseq),
            other => Err(format!("unknown mode {other:?} (expected lintseq or randseq)")),
        }
    }
}

/// `(global_seed, example_index, sample_index)`; serialized as a 3-element array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[u64; 3]", into = "[u64; 3]")]
pub struct SeedPath {
    pub global_seed: u64,
    pub example_index: u64,
    pub sample_index: u64,
}

impl From<[u64; 3]> for SeedPath {
    fn from([global_seed, example_index, sample_index]: [u64; 3]) -> Self {
        Self { global_seed, example_index, sample_index }
    }
}

impl From<SeedPath> for [u64; 3] {
    fn from(p: SeedPath) -> Self {
        [p.global_seed, p.example_index, p.sample_index]
    }
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl SeedPath {
    pub fn new(global_seed: u64, example_index: u64, sample_index: u64) -> Self {
        Self { global_seed, example_index, sample_index }
    }

    /// Stream seed for retry `attempt` of this path: each component is folded
    /// in with SplitMix64, so neighbouring paths get unrelated streams.
    pub fn derive(&self, attempt: u64) -> u64 {
        let mut h = splitmix64(self.global_seed);
        h = splitmix64(h ^ self.example_index);
        h = splitmix64(h ^ self.sample_index);
        splitmix64(h ^ attempt)
    }

    pub fn rng(&self, attempt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.derive(attempt))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramState {
    /// Strictly increasing 0-based indices into the original lines.
    pub kept_indices: Vec<usize>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSequence {
    pub source_id: String,
    /// Original program lines joined with `\n`, without a trailing newline.
    pub original: String,
    /// From the empty program to the full program.
    pub states: Vec<ProgramState>,
}

impl StateSequence {
    pub fn num_edits(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    fn from_backward(source_id: &str, lines: &[&str], mut backward: Vec<Vec<usize>>) -> Self {
        backward.reverse();
        let states = backward
            .into_iter()
            .map(|kept| {
                let text = join_lines(&kept.iter().map(|&i| lines[i]).collect::<Vec<_>>());
                ProgramState { kept_indices: kept, text }
            })
            .collect();
        Self { source_id: source_id.to_string(), original: join_lines(lines), states }
    }
}

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("program is empty or whitespace-only")]
    EmptyProgram,
    #[error("program has {lines} lines (limit {max})")]
    TooManyLines { lines: usize, max: usize },
    #[error("original program already has linter errors")]
    DirtySource,
    #[error(transparent)]
    Lint(#[from] LintError),
}

fn usable_lines(example: &SourceExample) -> Result<Vec<&str>, SampleError> {
    let lines = split_lines(&example.program);
    if lines.iter().all(|l| l.trim().is_empty()) {
        return Err(SampleError::EmptyProgram);
    }
    Ok(lines)
}

/// Linter-guided backward sampling.
///
/// A state is accepted once its report contains no `(code, message)` pair
/// more often than the original's. For an original that is itself clean this
/// is exactly fingerprint equality.
pub fn backward_sample(example: &SourceExample, linter: &Linter, seed: SeedPath) -> Result<StateSequence, SampleError> {
    backward_sample_attempt(example, linter, seed, 0)
}

fn backward_sample_attempt(
    example: &SourceExample,
    linter: &Linter,
    seed: SeedPath,
    attempt: u64,
) -> Result<StateSequence, SampleError> {
    let lines = usable_lines(example)?;
    let baseline = linter.check(&join_lines(&lines))?;
    let mut rng = seed.rng(attempt);
    let text_of = |kept: &[usize]| join_lines(&kept.iter().map(|&i| lines[i]).collect::<Vec<_>>());

    let mut current: Vec<usize> = (0..lines.len()).collect();
    let mut backward = vec![current.clone()];
    while !current.is_empty() {
        let mut next = current.clone();
        next.remove(rng.gen_range(0..current.len()));
        while !next.is_empty() {
            let affected: BTreeSet<usize> = linter.new_finding_lines(&text_of(&next), &baseline)?;
            if affected.is_empty() {
                break;
            }
            next = next
                .into_iter()
                .enumerate()
                .filter(|(pos, _)| !affected.contains(&(pos + 1)))
                .map(|(_, idx)| idx)
                .collect();
        }
        backward.push(next.clone());
        current = next;
    }
    Ok(StateSequence::from_backward(&example.id, &lines, backward))
}

/// Random-deletion ablation: no linter, uniform deletion counts and sets.
pub fn random_sample(example: &SourceExample, seed: SeedPath) -> Result<StateSequence, SampleError> {
    random_sample_attempt(example, seed, 0)
}

fn random_sample_attempt(example: &SourceExample, seed: SeedPath, attempt: u64) -> Result<StateSequence, SampleError> {
    let lines = usable_lines(example)?;
    let mut rng = seed.rng(attempt);
    let mut current: Vec<usize> = (0..lines.len()).collect();
    let mut backward = vec![current.clone()];
    while !current.is_empty() {
        let k = rng.gen_range(1..=current.len());
        let drop: BTreeSet<usize> = index::sample(&mut rng, current.len(), k).into_iter().collect();
        current = current
            .iter()
            .enumerate()
            .filter(|(pos, _)| !drop.contains(pos))
            .map(|(_, &idx)| idx)
            .collect();
        backward.push(current.clone());
    }
    Ok(StateSequence::from_backward(&example.id, &lines, backward))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleOptions {
    pub samples: usize,
    pub mode: Mode,
    pub global_seed: u64,
    /// Retry a sample whose state sequence repeats an earlier one.
    pub unique_sequences: bool,
    pub max_attempts: u64,
    pub skip_dirty_sources: bool,
    pub max_lines: usize,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self {
            samples: 5,
            mode: Mode::Lintseq,
            global_seed: 0,
            unique_sequences: false,
            max_attempts: 10,
            skip_dirty_sources: false,
            max_lines: 2048,
        }
    }
}

/// Draws `options.samples` sequences for one example. With
/// `unique_sequences`, a repeated sequence is redrawn up to `max_attempts`
/// times and kept as-is when attempts run out.
pub fn sample_example(
    example: &SourceExample,
    example_index: u64,
    linter: &Linter,
    options: &SampleOptions,
) -> Result<Vec<(SeedPath, StateSequence)>, SampleError> {
    let lines = usable_lines(example)?;
    if lines.len() > options.max_lines {
        return Err(SampleError::TooManyLines { lines: lines.len(), max: options.max_lines });
    }
    if options.skip_dirty_sources && linter.check(&join_lines(&lines))?.has_errors() {
        return Err(SampleError::DirtySource);
    }

    let mut out: Vec<(SeedPath, StateSequence)> = Vec::with_capacity(options.samples);
    for sample_index in 0..options.samples {
        let seed = SeedPath::new(options.global_seed, example_index, sample_index as u64);
        let draw = |attempt| match options.mode {
            Mode::Lintseq => backward_sample_attempt(example, linter, seed, attempt),
            Mode::Randseq => random_sample_attempt(example, seed, attempt),
        };
        let mut seq = draw(0)?;
        if options.unique_sequences {
            let mut attempt = 1;
            while attempt < options.max_attempts.max(1) && out.iter().any(|(_, prev)| prev.states == seq.states) {
                seq = draw(attempt)?;
                attempt += 1;
            }
        }
        out.push((seed, seq));
    }
    Ok(out)
}
