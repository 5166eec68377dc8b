//! Streaming generation: load, dedup, sample, diff, serialize, write.

use std::io::{BufRead, Write};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CorpusError, CorpusReader, Deduper, EditSequenceRecord, RecordError, RecordWriter, SourceExample};
use crate::diffkit::{diff_states, DiffError};
use crate::editcodec::{serialize, DEFAULT_SEPARATOR};
use crate::lint::Linter;
use crate::sampler::{sample_example, Mode, SampleError, SampleOptions};

const CHUNK: usize = 256;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerateConfig {
    pub sample: SampleOptions,
    pub workers: usize,
    pub separator: String,
    pub dedup: bool,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        Self { sample: SampleOptions::default(), workers: 1, separator: DEFAULT_SEPARATOR.to_string(), dedup: false }
    }
}

impl GenerateConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.sample.samples == 0 {
            return Err(PipelineError::Config("samples per example must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(PipelineError::Config("workers must be at least 1".into()));
        }
        if self.separator.is_empty() || self.separator.contains('\n') {
            return Err(PipelineError::Config("separator must be a non-empty single-line token".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("writing output: {0}")]
    Output(#[from] std::io::Error),
    #[error("cannot build worker pool: {0}")]
    Pool(String),
}

/// An example that produced no records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skip {
    pub source_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GenerateSummary {
    pub examples_read: usize,
    pub examples_processed: usize,
    pub sequences: usize,
    pub duplicates_removed: usize,
    pub malformed_records: Vec<RecordError>,
    pub skipped: Vec<Skip>,
    pub mean_edits: f64,
    pub wall_seconds: f64,
}

impl GenerateSummary {
    /// Skipped or malformed inputs as a fraction of everything read.
    pub fn skip_fraction(&self) -> f64 {
        let bad = self.skipped.len() + self.malformed_records.len();
        let total = self.examples_read + self.malformed_records.len();
        if total == 0 {
            0.0
        } else {
            bad as f64 / total as f64
        }
    }
}

const SYNTAX_CODES: &[&str] = &["syntax-error", "E0001"];

fn warn_if_unparsable(example: &SourceExample, linter: &Linter) {
    let Ok(report) = linter.check(example.program.trim_end_matches('\n')) else { return };
    if let Some(f) = report.findings.iter().find(|f| SYNTAX_CODES.contains(&f.code.as_str())) {
        log::warn!("{} does not parse as code (line {}: {})", example.id, f.line, f.message);
    }
}

fn records_for(
    example: &SourceExample,
    index: u64,
    linter: &Linter,
    cfg: &GenerateConfig,
) -> Result<Vec<EditSequenceRecord>, String> {
    let samples = sample_example(example, index, linter, &cfg.sample).map_err(|e: SampleError| e.to_string())?;
    if cfg.sample.mode == Mode::Lintseq {
        warn_if_unparsable(example, linter);
    }
    samples
        .into_iter()
        .enumerate()
        .map(|(sample_index, (seed_path, seq))| {
            let edits = diff_states(&seq).map_err(|e: DiffError| e.to_string())?;
            let training = serialize(&edits, &cfg.separator);
            Ok(EditSequenceRecord {
                source_id: example.id.clone(),
                sample_index,
                instruction: example.instruction.clone(),
                program: example.program.clone(),
                num_edits: edits.len(),
                edits: edits.iter().map(|e| e.render()).collect(),
                training_text: training.text,
                seed_path,
            })
        })
        .collect()
}

struct Sink<'a, W: Write> {
    writer: RecordWriter<W>,
    summary: &'a mut GenerateSummary,
    total_edits: u64,
}

impl<W: Write> Sink<'_, W> {
    fn flush_chunk(
        &mut self,
        chunk: &mut Vec<(u64, SourceExample)>,
        linter: &Linter,
        cfg: &GenerateConfig,
        pool: &rayon::ThreadPool,
    ) -> Result<(), PipelineError> {
        let results: Vec<_> = pool.install(|| {
            chunk.par_iter().map(|(index, ex)| records_for(ex, *index, linter, cfg)).collect()
        });
        for ((_, ex), result) in chunk.drain(..).zip(results) {
            match result {
                Ok(records) => {
                    self.summary.examples_processed += 1;
                    for r in &records {
                        self.total_edits += r.num_edits as u64;
                        self.writer.write(r)?;
                    }
                    self.summary.sequences += records.len();
                }
                Err(reason) => {
                    log::warn!("skipping example {}: {reason}", ex.id);
                    self.summary.skipped.push(Skip { source_id: ex.id, reason });
                }
            }
        }
        Ok(())
    }
}

/// Runs generation over a JSON-lines corpus. Output order follows input
/// order and does not depend on `cfg.workers`.
pub fn generate<R: BufRead, W: Write>(
    input: CorpusReader<R>,
    output: W,
    linter: &Linter,
    cfg: &GenerateConfig,
) -> Result<GenerateSummary, PipelineError> {
    cfg.validate()?;
    let started = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| PipelineError::Pool(e.to_string()))?;

    let mut summary = GenerateSummary::default();
    let mut dedup = Deduper::default();
    let mut sink = Sink { writer: RecordWriter::new(output), summary: &mut summary, total_edits: 0 };
    let mut chunk = Vec::with_capacity(CHUNK);
    let mut index = 0u64;
    for item in input {
        match item? {
            Err(bad) => {
                log::warn!("skipping record at line {}: {}", bad.line, bad.reason);
                sink.summary.malformed_records.push(bad);
            }
            Ok(example) => {
                if cfg.dedup && !dedup.admit(&example) {
                    continue;
                }
                sink.summary.examples_read += 1;
                chunk.push((index, example));
                index += 1;
                if chunk.len() == CHUNK {
                    sink.flush_chunk(&mut chunk, linter, cfg, &pool)?;
                }
            }
        }
    }
    sink.flush_chunk(&mut chunk, linter, cfg, &pool)?;
    let total_edits = sink.total_edits;
    sink.writer.finish()?;

    summary.duplicates_removed = dedup.removed;
    if summary.sequences > 0 {
        summary.mean_edits = total_edits as f64 / summary.sequences as f64;
    }
    summary.wall_seconds = started.elapsed().as_secs_f64();
    Ok(summary)
}
