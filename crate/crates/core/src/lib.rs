//! Linter-guided synthetic edit sequences for code corpora.
//!
//! Programs are decomposed into sequences of insertion-only diffs by deleting
//! lines backwards from the full program and re-checking with a linter, so
//! every intermediate state stays free of new lint errors.

pub mod corpus;
pub mod diffkit;
pub mod editcodec;
pub mod lint;
pub mod metrics;
#[cfg(feature = "native")]
pub mod pipeline;
pub mod sampler;

pub use corpus::{EditSequenceRecord, SourceExample};
pub use diffkit::{diff, diff_states, parse_diff, EditDiff, Hunk};
pub use editcodec::{resolve, serialize, DEFAULT_SEPARATOR};
pub use lint::{LintReport, Linter, LinterSpec};
pub use sampler::{Mode, SampleOptions, SeedPath, StateSequence};
