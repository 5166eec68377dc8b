//! Training-string layout for edit sequences and resolution back to programs.
//!
//! Each edit is written as the separator token on its own line followed by
//! the rendered diff:
//!
//! ```text
//! <|diff|>
//! @@ -0,0 +1,2 @@
//! +import math
//! +print(math.pi)
//! <|diff|>
//! ...
//! ```
//!
//! Separators are recognised only at the start of a line. Diff lines always
//! begin with `@`, `-`, `+` or `\`, so a separator appearing inside program
//! text can never be mistaken for an edit boundary.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diffkit::{join_lines, parse_diff, split_lines, DiffError, EditDiff};

pub const DEFAULT_SEPARATOR: &str = "<|diff|>";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingString {
    pub text: String,
    pub separator: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConflictReason {
    #[error("range -{start},{len} lies outside a {base_lines}-line program")]
    OutOfRange { start: usize, len: usize, base_lines: usize },
    #[error("hunk overlaps or precedes the previous hunk")]
    Overlap,
    #[error("line {line}: expected {expected:?}, found {found:?}")]
    Mismatch { line: usize, expected: String, found: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot apply hunk {hunk}: {reason}")]
pub struct ApplyConflict {
    pub hunk: usize,
    pub reason: ConflictReason,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ResolveErrorKind {
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error(transparent)]
    Apply(#[from] ApplyConflict),
}

/// Resolution stopped at `edit_index`; `partial` is the program after the
/// longest well-formed prefix of edits.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("edit {edit_index}: {kind}")]
pub struct ResolveError {
    pub edit_index: usize,
    pub partial: String,
    pub kind: ResolveErrorKind,
}

pub fn serialize(edits: &[EditDiff], separator: &str) -> TrainingString {
    let text = edits
        .iter()
        .map(|e| format!("{separator}\n{}", e.render()))
        .collect::<Vec<_>>()
        .join("\n");
    TrainingString { text, separator: separator.to_string() }
}

/// Splits on line-anchored separators. Returns the text before the first
/// separator and the raw chunk following each separator.
fn split_on_separator<'a>(text: &'a str, separator: &str) -> (&'a str, Vec<&'a str>) {
    if separator.is_empty() {
        return (text, Vec::new());
    }
    let starts: Vec<usize> = text
        .match_indices(separator)
        .map(|(i, _)| i)
        .filter(|&i| i == 0 || text.as_bytes()[i - 1] == b'\n')
        .collect();
    let Some(&first) = starts.first() else {
        return (text, Vec::new());
    };
    let mut chunks = Vec::with_capacity(starts.len());
    for (n, &s) in starts.iter().enumerate() {
        let body_start = s + separator.len();
        let end = starts.get(n + 1).copied().unwrap_or(text.len());
        chunks.push(&text[body_start..end]);
    }
    (&text[..first], chunks)
}

fn edit_chunks<'a>(text: &'a str, separator: &str) -> Vec<&'a str> {
    let (preamble, mut chunks) = split_on_separator(text, separator);
    if chunks.is_empty() {
        // A raw diff stream without separators is a single edit.
        return if text.trim().is_empty() { Vec::new() } else { vec![text] };
    }
    if !preamble.trim().is_empty() {
        chunks.insert(0, preamble);
    }
    chunks
}

pub fn deserialize(text: &str, separator: &str) -> Result<Vec<EditDiff>, (usize, DiffError)> {
    edit_chunks(text, separator)
        .into_iter()
        .enumerate()
        .map(|(i, chunk)| parse_diff(chunk).map_err(|e| (i, e)))
        .collect()
}

/// Applies one edit. Hunks are located by their pre-text positions; the
/// returned text has no trailing newline.
pub fn apply(base: &str, edit: &EditDiff) -> Result<String, ApplyConflict> {
    let lines = split_lines(base);
    Ok(join_lines(&apply_lines(&lines, edit)?))
}

/// Line-level [`apply`]. Unlike text, a line list can hold programs made
/// only of blank lines without ambiguity.
pub fn apply_lines<'a, S: AsRef<str>>(lines: &'a [S], edit: &'a EditDiff) -> Result<Vec<&'a str>, ApplyConflict> {
    let lines: Vec<&str> = lines.iter().map(AsRef::as_ref).collect();
    let mut out: Vec<&str> = Vec::with_capacity(lines.len());
    let mut cursor = 0;
    for (h, hunk) in edit.hunks.iter().enumerate() {
        let conflict = |reason| ApplyConflict { hunk: h, reason };
        if hunk.old_len > 0 && hunk.old_start == 0 {
            return Err(conflict(ConflictReason::OutOfRange {
                start: hunk.old_start,
                len: hunk.old_len,
                base_lines: lines.len(),
            }));
        }
        let at = hunk.old_offset();
        if at.checked_add(hunk.old_len).is_none_or(|end| end > lines.len()) {
            return Err(conflict(ConflictReason::OutOfRange {
                start: hunk.old_start,
                len: hunk.old_len,
                base_lines: lines.len(),
            }));
        }
        if at < cursor {
            return Err(conflict(ConflictReason::Overlap));
        }
        out.extend_from_slice(&lines[cursor..at]);
        for (k, expected) in hunk.deletions.iter().enumerate() {
            let found = lines[at + k];
            if found != expected {
                return Err(conflict(ConflictReason::Mismatch {
                    line: at + k + 1,
                    expected: expected.clone(),
                    found: found.to_string(),
                }));
            }
        }
        out.extend(hunk.insertions.iter().map(String::as_str));
        cursor = at + hunk.old_len;
    }
    out.extend_from_slice(&lines[cursor..]);
    Ok(out)
}

/// Program after each edit, starting from the empty program.
pub fn resolve_prefixes(edit_text: &str, separator: &str) -> Result<Vec<String>, ResolveError> {
    let mut programs = Vec::new();
    let mut current: Vec<String> = Vec::new();
    for (i, chunk) in edit_chunks(edit_text, separator).into_iter().enumerate() {
        let fail = |partial: &[String], kind: ResolveErrorKind| ResolveError {
            edit_index: i,
            partial: join_lines(partial),
            kind,
        };
        let edit = parse_diff(chunk).map_err(|e| fail(&current, e.into()))?;
        let next: Vec<String> = apply_lines(&current, &edit)
            .map_err(|e| fail(&current, e.into()))?
            .into_iter()
            .map(str::to_string)
            .collect();
        current = next;
        programs.push(join_lines(&current));
    }
    Ok(programs)
}

/// Folds every edit over the empty program.
pub fn resolve(edit_text: &str, separator: &str) -> Result<String, ResolveError> {
    Ok(resolve_prefixes(edit_text, separator)?.pop().unwrap_or_default())
}
