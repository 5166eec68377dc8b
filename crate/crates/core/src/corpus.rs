//! Line-delimited JSON corpora: instruction/program pairs in, edit-sequence
//! records out.
//!
//! Input records need a `program` string and may carry `instruction` and
//! `id`; a missing id becomes the zero-padded record index. Line endings are
//! normalized to `\n` on load.

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::diffkit::split_lines;
use crate::editcodec::{resolve, ResolveError};
use crate::sampler::SeedPath;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: file is not valid UTF-8")]
    NotUtf8 { path: PathBuf, line: usize },
}

/// A record that could not be used; loading continues past it.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("line {line}: {reason}")]
pub struct RecordError {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceExample {
    pub id: String,
    pub instruction: Option<String>,
    /// Program text with `\n` line endings.
    pub program: String,
    pub line_count: usize,
    pub trailing_newline: bool,
}

pub fn normalize_newlines(text: &str) -> String {
    if text.contains('\r') {
        text.replace("\r\n", "\n").replace('\r', "\n")
    } else {
        text.to_string()
    }
}

impl SourceExample {
    pub fn new(id: impl Into<String>, instruction: Option<String>, program: &str) -> Self {
        let program = normalize_newlines(program);
        Self {
            id: id.into(),
            instruction,
            line_count: split_lines(&program).len(),
            trailing_newline: program.ends_with('\n'),
            program,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorpusFormat {
    /// One JSON object per line.
    #[default]
    Jsonl,
    /// The whole file is a single program.
    Program,
}

impl std::str::FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jsonl" => Ok(Self::Jsonl),
            "program" => Ok(Self::Program),
            other => Err(format!("unknown corpus format {other:?}")),
        }
    }
}

#[derive(Debug, Default)]
pub struct LoadedCorpus {
    pub examples: Vec<SourceExample>,
    pub skipped: Vec<RecordError>,
}

/// Streams examples from a JSON-lines reader.
///
/// Items are `Ok(Ok(example))`, `Ok(Err(record_error))` for a skippable
/// record, or `Err(_)` for a fatal error after which iteration stops.
pub struct CorpusReader<R> {
    reader: R,
    path: PathBuf,
    line: usize,
    record: usize,
    seen_ids: HashSet<String>,
    done: bool,
}

impl<R: BufRead> CorpusReader<R> {
    pub fn new(reader: R, path: impl Into<PathBuf>) -> Self {
        Self { reader, path: path.into(), line: 0, record: 0, seen_ids: HashSet::new(), done: false }
    }

    fn parse(&mut self, text: &str) -> Result<SourceExample, RecordError> {
        let err = |reason: String| RecordError { line: self.line, reason };
        let index = self.record;
        self.record += 1;
        let value: Value = serde_json::from_str(text).map_err(|e| err(format!("invalid JSON: {e}")))?;
        let obj = value.as_object().ok_or_else(|| err("record is not an object".into()))?;
        let program = match obj.get("program") {
            Some(Value::String(p)) => p,
            Some(_) => return Err(err("`program` is not a string".into())),
            None => return Err(err("missing `program` field".into())),
        };
        let instruction = match obj.get("instruction") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(normalize_newlines(s)),
            Some(_) => return Err(err("`instruction` is not a string".into())),
        };
        let id = match obj.get("id") {
            None | Some(Value::Null) => format!("{index:06}"),
            Some(Value::String(s)) => s.clone(),
            Some(Value::Number(n)) => n.to_string(),
            Some(_) => return Err(err("`id` is not a string or number".into())),
        };
        if !self.seen_ids.insert(id.clone()) {
            return Err(err(format!("duplicate id {id:?}")));
        }
        Ok(SourceExample::new(id, instruction, program))
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Result<Result<SourceExample, RecordError>, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        let mut buf = Vec::new();
        while !self.done {
            buf.clear();
            match self.reader.read_until(b'\n', &mut buf) {
                Ok(0) => self.done = true,
                Ok(_) => {
                    self.line += 1;
                    let Ok(text) = std::str::from_utf8(&buf) else {
                        self.done = true;
                        return Some(Err(CorpusError::NotUtf8 { path: self.path.clone(), line: self.line }));
                    };
                    let text = text.trim();
                    if text.is_empty() {
                        continue;
                    }
                    let text = text.to_string();
                    return Some(Ok(self.parse(&text)));
                }
                Err(source) => {
                    self.done = true;
                    return Some(Err(CorpusError::Io { path: self.path.clone(), source }));
                }
            }
        }
        None
    }
}

pub fn open_corpus(path: &Path) -> Result<CorpusReader<BufReader<File>>, CorpusError> {
    let file = File::open(path).map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })?;
    Ok(CorpusReader::new(BufReader::new(file), path))
}

pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<LoadedCorpus, CorpusError> {
    match format {
        CorpusFormat::Program => {
            let bytes = std::fs::read(path).map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })?;
            let text = String::from_utf8(bytes).map_err(|_| CorpusError::NotUtf8 { path: path.to_path_buf(), line: 1 })?;
            Ok(LoadedCorpus { examples: vec![SourceExample::new("000000", None, &text)], skipped: Vec::new() })
        }
        CorpusFormat::Jsonl => {
            let mut loaded = LoadedCorpus::default();
            for item in open_corpus(path)? {
                match item? {
                    Ok(ex) => loaded.examples.push(ex),
                    Err(skip) => {
                        log::warn!("{}: skipping record: {skip}", path.display());
                        loaded.skipped.push(skip);
                    }
                }
            }
            Ok(loaded)
        }
    }
}

/// Streaming exact-duplicate filter on `(instruction, program)`.
#[derive(Debug, Default)]
pub struct Deduper {
    seen: HashSet<[u8; 32]>,
    pub removed: usize,
}

impl Deduper {
    /// True the first time a pair is seen.
    pub fn admit(&mut self, example: &SourceExample) -> bool {
        let mut h = Sha256::new();
        match &example.instruction {
            Some(i) => {
                h.update([1u8]);
                h.update((i.len() as u64).to_le_bytes());
                h.update(i.as_bytes());
            }
            None => h.update([0u8]),
        }
        h.update(example.program.as_bytes());
        let fresh = self.seen.insert(h.finalize().into());
        if !fresh {
            self.removed += 1;
        }
        fresh
    }
}

/// Keeps the first occurrence of each `(instruction, program)` pair.
pub fn deduplicate(corpus: Vec<SourceExample>) -> (Vec<SourceExample>, usize) {
    let mut dedup = Deduper::default();
    let kept = corpus.into_iter().filter(|ex| dedup.admit(ex)).collect();
    (kept, dedup.removed)
}

/// One synthetic edit sequence for one source example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditSequenceRecord {
    pub source_id: String,
    pub sample_index: usize,
    pub instruction: Option<String>,
    pub program: String,
    /// Rendered diffs, first edit first.
    pub edits: Vec<String>,
    pub training_text: String,
    pub num_edits: usize,
    pub seed_path: SeedPath,
}

impl EditSequenceRecord {
    /// Resolves `training_text`, restoring the source's trailing newline.
    pub fn resolve(&self, separator: &str) -> Result<String, ResolveError> {
        let mut program = resolve(&self.training_text, separator)?;
        if self.program.ends_with('\n') && !program.is_empty() {
            program.push('\n');
        }
        Ok(program)
    }
}

pub struct RecordWriter<W: Write> {
    out: W,
    written: usize,
}

impl<W: Write> RecordWriter<W> {
    pub fn new(out: W) -> Self {
        Self { out, written: 0 }
    }

    pub fn write(&mut self, record: &EditSequenceRecord) -> io::Result<()> {
        serde_json::to_writer(&mut self.out, record)?;
        self.out.write_all(b"\n")?;
        self.written += 1;
        Ok(())
    }

    pub fn finish(mut self) -> io::Result<usize> {
        self.out.flush()?;
        Ok(self.written)
    }
}

pub fn create_record_writer(path: &Path) -> Result<RecordWriter<BufWriter<File>>, CorpusError> {
    let file = File::create(path).map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })?;
    Ok(RecordWriter::new(BufWriter::new(file)))
}

pub fn write_records<'a>(
    records: impl IntoIterator<Item = &'a EditSequenceRecord>,
    path: &Path,
) -> Result<usize, CorpusError> {
    let io_err = |source| CorpusError::Io { path: path.to_path_buf(), source };
    let mut writer = create_record_writer(path)?;
    for r in records {
        writer.write(r).map_err(io_err)?;
    }
    writer.finish().map_err(io_err)
}

/// Reads records back; malformed lines are returned as [`RecordError`]s.
pub fn read_records(path: &Path) -> Result<Vec<Result<EditSequenceRecord, RecordError>>, CorpusError> {
    let io_err = |source| CorpusError::Io { path: path.to_path_buf(), source };
    let reader = BufReader::new(File::open(path).map_err(io_err)?);
    let mut out = Vec::new();
    for (i, line) in reader.split(b'\n').enumerate() {
        let bytes = line.map_err(io_err)?;
        let text = std::str::from_utf8(&bytes).map_err(|_| CorpusError::NotUtf8 { path: path.to_path_buf(), line: i + 1 })?;
        if text.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(text).map_err(|e| RecordError { line: i + 1, reason: format!("invalid record: {e}") }),
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn load_str(text: &str) -> (Vec<SourceExample>, Vec<RecordError>) {
        let mut ok = Vec::new();
        let mut bad = Vec::new();
        for item in CorpusReader::new(Cursor::new(text.as_bytes().to_vec()), "mem") {
            match item.unwrap() {
                Ok(ex) => ok.push(ex),
                Err(e) => bad.push(e),
            }
        }
        (ok, bad)
    }

    #[test]
    fn two_good_records() {
        let (ok, bad) = load_str("{\"instruction\": \"a\", \"program\": \"x = 1\"}\n{\"program\": \"y = 2\\n\"}\n");
        assert_eq!(ok.len(), 2);
        assert!(bad.is_empty());
        assert_eq!(ok[0].id, "000000");
        assert_eq!(ok[1].id, "000001");
        assert!(ok[1].trailing_newline);
        assert_eq!(ok[1].line_count, 1);
    }

    #[test]
    fn empty_input() {
        let (ok, bad) = load_str("");
        assert!(ok.is_empty() && bad.is_empty());
    }

    #[test]
    fn missing_program_is_skipped_with_line_number() {
        let (ok, bad) = load_str("{\"program\": \"a\"}\n{\"instruction\": \"no program\"}\n{\"program\": \"b\"}\n");
        assert_eq!(ok.len(), 2);
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].line, 2);
    }

    #[test]
    fn crlf_is_normalized() {
        let (ok, _) = load_str("{\"program\": \"a\\r\\nb\\rc\\r\\n\", \"id\": 7}\n");
        assert_eq!(ok[0].program, "a\nb\nc\n");
        assert_eq!(ok[0].id, "7");
        assert_eq!(ok[0].line_count, 3);
    }

    #[test]
    fn duplicate_ids_are_skipped() {
        let (ok, bad) = load_str("{\"program\": \"a\", \"id\": \"x\"}\n{\"program\": \"b\", \"id\": \"x\"}\n");
        assert_eq!(ok.len(), 1);
        assert_eq!(bad.len(), 1);
    }

    #[test]
    fn non_utf8_is_fatal() {
        let mut reader = CorpusReader::new(Cursor::new(b"{\"program\": \"\xff\"}\n".to_vec()), "mem");
        assert!(matches!(reader.next(), Some(Err(CorpusError::NotUtf8 { line: 1, .. }))));
        assert!(reader.next().is_none());
    }

    #[test]
    fn dedup_cases() {
        let a = SourceExample::new("1", Some("i".into()), "x = 1");
        let b = SourceExample::new("2", Some("i".into()), "x = 2");
        let a2 = SourceExample::new("3", Some("i".into()), "x =  1");
        let (kept, removed) = deduplicate(vec![a.clone(), b.clone(), a.clone()]);
        assert_eq!(kept, vec![a.clone(), b.clone()]);
        assert_eq!(removed, 1);

        let (kept, removed) = deduplicate(vec![a.clone(), a2.clone(), a.clone()]);
        assert_eq!(kept, vec![a.clone(), a2]);
        assert_eq!(removed, 1);

        let (kept, removed) = deduplicate(vec![a.clone(), b.clone()]);
        assert_eq!(kept.len(), 2);
        assert_eq!(removed, 0);

        // instruction participates in the key
        let no_instr = SourceExample::new("4", None, "x = 1");
        assert_eq!(deduplicate(vec![a, no_instr]).1, 0);
    }
}
