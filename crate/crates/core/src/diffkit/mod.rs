//! Line diffs between program texts in zero-context unified format.
//!
//! A rendered diff is a stream of hunks with no `---`/`+++` file headers:
//!
//! ```text
//! @@ -<old_start>[,<old_len>] +<new_start>[,<new_len>] @@
//! -deleted line
//! +inserted line
//! ```
//!
//! Ranges follow the unified-diff convention: the `,len` suffix is omitted
//! when `len == 1`, and an empty side names the line *before* the change
//! (`0` when the change sits at the top of the file).

mod matcher;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sampler::StateSequence;
use matcher::{Matcher, Tag};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiffError {
    #[error("malformed hunk decorator at line {line}: {text:?}")]
    MalformedDecorator { line: usize, text: String },
    #[error("hunk {hunk} body does not match its decorator (declared -{old_len} +{new_len}, found -{deletions} +{insertions})")]
    BodyMismatch {
        hunk: usize,
        old_len: usize,
        new_len: usize,
        deletions: usize,
        insertions: usize,
    },
    #[error("hunk {hunk} has a decorator but no body")]
    TruncatedHunk { hunk: usize },
    #[error("unexpected line {line} outside of a hunk: {text:?}")]
    StrayLine { line: usize, text: String },
    #[error("invalid state sequence: {0}")]
    InvalidStates(String),
}

/// One contiguous change: deletions of `old_len` lines followed by
/// insertions of `new_len` lines.
///
/// `old_start` and `new_start` hold the numbers exactly as printed in the
/// decorator, so an empty side refers to the preceding line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hunk {
    pub old_start: usize,
    pub old_len: usize,
    pub new_start: usize,
    pub new_len: usize,
    pub deletions: Vec<String>,
    pub insertions: Vec<String>,
}

impl Hunk {
    /// Index into the pre-text where this hunk's change begins.
    pub fn old_offset(&self) -> usize {
        if self.old_len == 0 {
            self.old_start
        } else {
            self.old_start - 1
        }
    }

    pub fn is_insertion_only(&self) -> bool {
        self.old_len == 0
    }

    pub fn decorator(&self) -> String {
        format!(
            "@@ -{} +{} @@",
            format_range(self.old_start, self.old_len),
            format_range(self.new_start, self.new_len)
        )
    }
}

/// A single edit: an ordered list of non-overlapping hunks.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditDiff {
    pub hunks: Vec<Hunk>,
}

impl EditDiff {
    pub fn is_empty(&self) -> bool {
        self.hunks.is_empty()
    }

    pub fn is_insertion_only(&self) -> bool {
        self.hunks.iter().all(Hunk::is_insertion_only)
    }

    /// Canonical text form; hunks are joined by `\n` with no trailing newline.
    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for EditDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut line = |f: &mut fmt::Formatter<'_>, s: &str| -> fmt::Result {
            if !first {
                f.write_str("\n")?;
            }
            first = false;
            f.write_str(s)
        };
        for hunk in &self.hunks {
            line(f, &hunk.decorator())?;
            for d in &hunk.deletions {
                line(f, &format!("-{d}"))?;
            }
            for i in &hunk.insertions {
                line(f, &format!("+{i}"))?;
            }
        }
        Ok(())
    }
}

fn format_range(start: usize, len: usize) -> String {
    if len == 1 {
        start.to_string()
    } else {
        format!("{start},{len}")
    }
}

/// Splits program text into lines. A single trailing `\n` does not start a
/// new line and the empty text has no lines.
pub fn split_lines(text: &str) -> Vec<&str> {
    if text.is_empty() {
        return Vec::new();
    }
    text.strip_suffix('\n').unwrap_or(text).split('\n').collect()
}

pub fn join_lines<S: AsRef<str>>(lines: &[S]) -> String {
    let mut out = String::new();
    for (i, line) in lines.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(line.as_ref());
    }
    out
}

/// Zero-context line diff from `before` to `after`.
pub fn diff(before: &str, after: &str) -> EditDiff {
    let a = split_lines(before);
    let b = split_lines(after);
    let matcher = Matcher::new(&a, &b);
    let hunks = matcher
        .opcodes()
        .into_iter()
        .filter(|op| op.tag != Tag::Equal)
        .map(|op| {
            let old_len = op.a_hi - op.a_lo;
            let new_len = op.b_hi - op.b_lo;
            Hunk {
                old_start: if old_len == 0 { op.a_lo } else { op.a_lo + 1 },
                old_len,
                new_start: if new_len == 0 { op.b_lo } else { op.b_lo + 1 },
                new_len,
                deletions: a[op.a_lo..op.a_hi].iter().map(|s| s.to_string()).collect(),
                insertions: b[op.b_lo..op.b_hi].iter().map(|s| s.to_string()).collect(),
            }
        })
        .collect();
    EditDiff { hunks }
}

/// Insertion-only diffs between consecutive states, read off the kept-line
/// provenance instead of re-matching line texts.
pub fn diff_states(seq: &StateSequence) -> Result<Vec<EditDiff>, DiffError> {
    let states = &seq.states;
    if states.len() < 2 {
        return Err(DiffError::InvalidStates("fewer than two states".into()));
    }
    if !states[0].kept_indices.is_empty() {
        return Err(DiffError::InvalidStates("first state is not empty".into()));
    }
    let lines = split_lines(&seq.original);
    let mut diffs = Vec::with_capacity(states.len() - 1);
    for (step, pair) in states.windows(2).enumerate() {
        let (prev, next) = (&pair[0].kept_indices, &pair[1].kept_indices);
        if next.len() <= prev.len() {
            return Err(DiffError::InvalidStates(format!("state {} does not grow", step + 1)));
        }
        if next.windows(2).any(|w| w[0] >= w[1]) || next.last().is_some_and(|&l| l >= lines.len()) {
            return Err(DiffError::InvalidStates(format!("state {} has invalid indices", step + 1)));
        }

        let mut hunks: Vec<Hunk> = Vec::new();
        let mut p = 0; // number of prev lines consumed
        let mut open = false;
        for (pos, &idx) in next.iter().enumerate() {
            if p < prev.len() && prev[p] == idx {
                p += 1;
                open = false;
                continue;
            }
            if p < prev.len() && prev[p] < idx {
                return Err(DiffError::InvalidStates(format!(
                    "state {} drops line {}",
                    step + 1,
                    prev[p]
                )));
            }
            if open {
                let h = hunks.last_mut().expect("open hunk");
                h.new_len += 1;
                h.insertions.push(lines[idx].to_string());
            } else {
                hunks.push(Hunk {
                    old_start: p,
                    old_len: 0,
                    new_start: pos + 1,
                    new_len: 1,
                    deletions: Vec::new(),
                    insertions: vec![lines[idx].to_string()],
                });
                open = true;
            }
        }
        if p != prev.len() {
            return Err(DiffError::InvalidStates(format!(
                "state {} is not a superset of its predecessor",
                step + 1
            )));
        }
        diffs.push(EditDiff { hunks });
    }
    Ok(diffs)
}

fn parse_range(s: &str) -> Option<(usize, usize)> {
    match s.split_once(',') {
        Some((start, len)) => Some((start.parse().ok()?, len.parse().ok()?)),
        None => Some((s.parse().ok()?, 1)),
    }
}

fn parse_decorator(line: &str) -> Option<(usize, usize, usize, usize)> {
    let rest = line.strip_prefix("@@ -")?;
    let (old, rest) = rest.split_once(" +")?;
    let (new, _) = rest.split_once(" @@")?;
    let (old_start, old_len) = parse_range(old)?;
    let (new_start, new_len) = parse_range(new)?;
    if old_len + new_len == 0 {
        return None;
    }
    Some((old_start, old_len, new_start, new_len))
}

/// Parses a rendered diff. Accepts `,1` spelled out, text after the closing
/// `@@`, an optional `---`/`+++` header pair, and `\ No newline` markers.
pub fn parse_diff(text: &str) -> Result<EditDiff, DiffError> {
    let trimmed = text.trim_matches('\n');
    if trimmed.is_empty() {
        return Ok(EditDiff::default());
    }
    let lines: Vec<&str> = trimmed.split('\n').collect();
    let mut pos = 0;
    if lines.len() >= 2 && lines[0].starts_with("--- ") && lines[1].starts_with("+++ ") {
        pos = 2;
    }

    let mut hunks = Vec::new();
    while pos < lines.len() {
        let line = lines[pos];
        if !line.starts_with("@@") {
            return Err(DiffError::StrayLine { line: pos + 1, text: line.to_string() });
        }
        let (old_start, old_len, new_start, new_len) =
            parse_decorator(line).ok_or_else(|| DiffError::MalformedDecorator {
                line: pos + 1,
                text: line.to_string(),
            })?;
        pos += 1;

        let hunk_index = hunks.len();
        let mismatch = |deletions: usize, insertions: usize| DiffError::BodyMismatch {
            hunk: hunk_index,
            old_len,
            new_len,
            deletions,
            insertions,
        };
        let mut deletions = Vec::new();
        let mut insertions = Vec::new();
        let mut body_lines = 0;
        while pos < lines.len() && !lines[pos].starts_with("@@") {
            let body = lines[pos];
            if let Some(d) = body.strip_prefix('-') {
                if !insertions.is_empty() {
                    return Err(mismatch(deletions.len() + 1, insertions.len()));
                }
                deletions.push(d.to_string());
            } else if let Some(i) = body.strip_prefix('+') {
                insertions.push(i.to_string());
            } else if !body.starts_with('\\') {
                return Err(mismatch(deletions.len(), insertions.len()));
            }
            body_lines += 1;
            pos += 1;
        }
        if body_lines == 0 {
            return Err(DiffError::TruncatedHunk { hunk: hunk_index });
        }
        if deletions.len() != old_len || insertions.len() != new_len {
            return Err(mismatch(deletions.len(), insertions.len()));
        }
        hunks.push(Hunk { old_start, old_len, new_start, new_len, deletions, insertions });
    }
    Ok(EditDiff { hunks })
}
