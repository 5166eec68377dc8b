//! Linter abstraction used to decide whether an intermediate program state is
//! error-free relative to its source file.
//!
//! Two reports are compared by their *fingerprint*: the multiset of
//! `(code, message)` pairs with locations erased. Deleting lines shifts every
//! later line number, so positions cannot take part in the comparison, while
//! names embedded in messages keep distinct defects distinct.

#[cfg(feature = "native")]
mod external;
mod python;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use dashmap::DashMap;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::diffkit::split_lines;

#[cfg(feature = "native")]
pub use external::DEFAULT_FINDING_PATTERN;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LintFinding {
    pub code: String,
    pub message: String,
    /// 1-based line in the checked text.
    pub line: usize,
    pub severity: Severity,
}

/// Multiset of `(code, message)` pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint(BTreeMap<(String, String), usize>);

impl Fingerprint {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.values().sum()
    }

    pub fn count(&self, code: &str, message: &str) -> usize {
        self.0.get(&(code.to_string(), message.to_string())).copied().unwrap_or(0)
    }

    /// Keys occurring more often in `self` than in `other`.
    pub fn excess_over<'a>(&'a self, other: &'a Fingerprint) -> impl Iterator<Item = &'a (String, String)> + 'a {
        self.0.iter().filter(move |(k, &n)| n > other.0.get(*k).copied().unwrap_or(0)).map(|(k, _)| k)
    }

    /// True when every pair occurs at most as often as in `other`.
    pub fn is_submultiset_of(&self, other: &Fingerprint) -> bool {
        self.excess_over(other).next().is_none()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LintReport {
    pub findings: Vec<LintFinding>,
    pub fingerprint: Fingerprint,
    /// External linter output lines that did not match the finding pattern.
    pub skipped_lines: usize,
}

impl LintReport {
    pub fn new(findings: Vec<LintFinding>, include_warnings: bool) -> Self {
        let mut fp = BTreeMap::new();
        for f in &findings {
            if include_warnings || f.severity == Severity::Error {
                *fp.entry((f.code.clone(), f.message.clone())).or_insert(0) += 1;
            }
        }
        Self { findings, fingerprint: Fingerprint(fp), skipped_lines: 0 }
    }

    /// Whether any finding participates in the fingerprint.
    pub fn has_errors(&self) -> bool {
        !self.fingerprint.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinterKind {
    #[default]
    Builtin,
    External,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinterSpec {
    pub kind: LinterKind,
    /// Shell command; `{file}` is replaced by the file to check, or the path is appended.
    pub command_template: Option<String>,
    /// Regex with named captures `line`, `code`, `message` and optionally `severity`.
    pub finding_pattern: Option<String>,
    pub timeout_ms: u64,
    /// Let warnings take part in fingerprints.
    pub include_warnings: bool,
}

impl Default for LinterSpec {
    fn default() -> Self {
        Self {
            kind: LinterKind::Builtin,
            command_template: None,
            finding_pattern: None,
            timeout_ms: 30_000,
            include_warnings: false,
        }
    }
}

impl LinterSpec {
    pub fn builtin() -> Self {
        Self::default()
    }

    pub fn external(command_template: impl Into<String>, finding_pattern: impl Into<String>) -> Self {
        Self {
            kind: LinterKind::External,
            command_template: Some(command_template.into()),
            finding_pattern: Some(finding_pattern.into()),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), LintError> {
        if self.kind == LinterKind::External {
            let nonempty = |s: &Option<String>| s.as_deref().is_some_and(|s| !s.trim().is_empty());
            if !nonempty(&self.command_template) {
                return Err(LintError::InvalidSpec("external linter needs a command template".into()));
            }
            if !nonempty(&self.finding_pattern) {
                return Err(LintError::InvalidSpec("external linter needs a finding pattern".into()));
            }
            if self.timeout_ms == 0 {
                return Err(LintError::InvalidSpec("timeout must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum LintError {
    #[error("linter timed out on program {program_hash}")]
    Timeout { program_hash: String },
    #[error("invalid linter spec: {0}")]
    InvalidSpec(String),
    #[error("failed to run linter: {0}")]
    Io(#[from] std::io::Error),
    #[error("external linters are not available in this build")]
    Unsupported,
    #[error("candidate differs from the baseline but introduces no new findings")]
    NoNewFindings,
}

pub fn content_hash(program: &str) -> String {
    hex::encode(Sha256::digest(program.as_bytes()))
}

/// A configured linter with a content-addressed report cache.
///
/// Safe to share between threads; concurrent checks of the same text may
/// both run, and either result is kept since they are identical.
pub struct Linter {
    spec: LinterSpec,
    cache: DashMap<[u8; 32], Arc<LintReport>>,
    #[cfg(feature = "native")]
    runner: Option<external::Runner>,
}

impl std::fmt::Debug for Linter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Linter").field("spec", &self.spec).field("cached", &self.cache.len()).finish()
    }
}

impl Linter {
    pub fn new(spec: LinterSpec) -> Result<Self, LintError> {
        spec.validate()?;
        #[cfg(feature = "native")]
        let runner = match spec.kind {
            LinterKind::External => Some(external::Runner::new(&spec)?),
            LinterKind::Builtin => None,
        };
        #[cfg(not(feature = "native"))]
        if spec.kind == LinterKind::External {
            return Err(LintError::Unsupported);
        }
        Ok(Self {
            spec,
            cache: DashMap::new(),
            #[cfg(feature = "native")]
            runner,
        })
    }

    pub fn builtin() -> Self {
        Self::new(LinterSpec::builtin()).expect("builtin spec is valid")
    }

    pub fn spec(&self) -> &LinterSpec {
        &self.spec
    }

    pub fn check(&self, program: &str) -> Result<Arc<LintReport>, LintError> {
        if program.is_empty() {
            return Ok(Arc::new(LintReport::default()));
        }
        let key: [u8; 32] = Sha256::digest(program.as_bytes()).into();
        if let Some(hit) = self.cache.get(&key) {
            return Ok(Arc::clone(&hit));
        }
        let report = Arc::new(self.run(program)?);
        self.cache.insert(key, Arc::clone(&report));
        Ok(report)
    }

    fn run(&self, program: &str) -> Result<LintReport, LintError> {
        match self.spec.kind {
            LinterKind::Builtin => {
                let findings = python::check_source(program)
                    .into_iter()
                    .map(|i| LintFinding { code: i.code.to_string(), message: i.message, line: i.line, severity: i.severity })
                    .collect();
                Ok(LintReport::new(findings, self.spec.include_warnings))
            }
            #[cfg(feature = "native")]
            LinterKind::External => {
                let runner = self.runner.as_ref().ok_or(LintError::Unsupported)?;
                runner.run(program, &self.spec)
            }
            #[cfg(not(feature = "native"))]
            LinterKind::External => Err(LintError::Unsupported),
        }
    }

    pub fn is_error_free_relative(&self, candidate: &str, baseline: &LintReport) -> Result<bool, LintError> {
        Ok(self.check(candidate)?.fingerprint == baseline.fingerprint)
    }

    /// Lines (1-based) carrying findings whose `(code, message)` occurs more
    /// often in the candidate than in the baseline. Every finding with such a
    /// key contributes its line; lines are clamped to the candidate's range.
    pub fn new_finding_lines(&self, candidate: &str, baseline: &LintReport) -> Result<BTreeSet<usize>, LintError> {
        let report = self.check(candidate)?;
        let excess: BTreeSet<&(String, String)> = report.fingerprint.excess_over(&baseline.fingerprint).collect();
        let last = split_lines(candidate).len().max(1);
        Ok(report
            .findings
            .iter()
            .filter(|f| excess.contains(&(f.code.clone(), f.message.clone())))
            .map(|f| f.line.clamp(1, last))
            .collect())
    }

    /// Like [`Linter::new_finding_lines`] but requires the candidate to
    /// differ from the baseline and reports an inconsistency when no new
    /// finding explains the difference.
    pub fn affected_lines(&self, candidate: &str, baseline: &LintReport) -> Result<BTreeSet<usize>, LintError> {
        let lines = self.new_finding_lines(candidate, baseline)?;
        if lines.is_empty() {
            return Err(LintError::NoNewFindings);
        }
        Ok(lines)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lint() -> Linter {
        Linter::builtin()
    }

    #[test]
    fn empty_program_has_empty_report() {
        let r = lint().check("").unwrap();
        assert!(r.findings.is_empty());
        assert!(r.fingerprint.is_empty());
    }

    #[test]
    fn clean_two_liner() {
        assert!(!lint().check("x = 1\nprint(x)").unwrap().has_errors());
    }

    #[test]
    fn single_undefined_name() {
        let r = lint().check("print(undefined_name)").unwrap();
        assert_eq!(r.findings.len(), 1);
        assert_eq!(r.findings[0].code, "undefined-name");
        assert_eq!(r.findings[0].line, 1);
    }

    #[test]
    fn identical_candidate_is_error_free() {
        let l = lint();
        let src = "import os\nprint(os.sep)\n";
        let base = l.check(src).unwrap();
        assert!(l.is_error_free_relative(src, &base).unwrap());
    }

    #[test]
    fn dropping_a_definition_breaks_relative_freedom() {
        let l = lint();
        let base = l.check("x = 1\nprint(x)").unwrap();
        assert!(!l.is_error_free_relative("print(x)", &base).unwrap());
    }

    #[test]
    fn preserved_original_finding_is_still_free() {
        let l = lint();
        let base = l.check("y = 2\nprint(missing)\nprint(y)").unwrap();
        assert_eq!(base.fingerprint.total(), 1);
        assert!(l.is_error_free_relative("print(missing)", &base).unwrap());
        assert!(!l.is_error_free_relative("print(missing)\nprint(y)", &base).unwrap());
    }

    #[test]
    fn fingerprint_ignores_line_shifts() {
        let l = lint();
        let a = l.check("print(a)\nprint(b)").unwrap();
        let b = l.check("\n\nprint(b)\n\nprint(a)").unwrap();
        assert_eq!(a.fingerprint, b.fingerprint);
        assert_ne!(a.findings, b.findings);
    }

    #[test]
    fn affected_line_after_dropping_import() {
        let l = lint();
        let base = l.check("import os\nx = 1\nprint(os.sep, x)").unwrap();
        let lines = l.affected_lines("x = 1\nprint(os.sep, x)", &base).unwrap();
        assert_eq!(lines.into_iter().collect::<Vec<_>>(), vec![2]);
    }

    #[test]
    fn no_op_deletion_is_inconsistent() {
        let l = lint();
        let base = l.check("x = 1\n\nprint(x)").unwrap();
        assert!(matches!(l.affected_lines("x = 1\nprint(x)", &base), Err(LintError::NoNewFindings)));
    }

    #[test]
    fn dropping_a_def_flags_its_callers() {
        let l = lint();
        let src = "def greet(): return 'hi'\nx = 1\nprint(greet())\ny = greet\nprint(x, y)";
        let base = l.check(src).unwrap();
        let candidate = "x = 1\nprint(greet())\ny = greet\nprint(x, y)";
        let lines: Vec<_> = l.affected_lines(candidate, &base).unwrap().into_iter().collect();
        assert_eq!(lines, vec![2, 3]);
    }

    #[test]
    fn dropping_a_def_with_body_orphans_it() {
        let l = lint();
        let src = "def greet():\n    return 'hi'\nprint(greet())";
        let base = l.check(src).unwrap();
        let lines: Vec<_> = l.affected_lines("    return 'hi'\nprint(greet())", &base).unwrap().into_iter().collect();
        assert_eq!(lines, vec![1]);
        let lines: Vec<_> = l.affected_lines("print(greet())", &base).unwrap().into_iter().collect();
        assert_eq!(lines, vec![1]);
    }

    #[test]
    fn warnings_only_count_when_enabled() {
        let strict = Linter::new(LinterSpec { include_warnings: true, ..LinterSpec::default() }).unwrap();
        assert!(strict.check("import os").unwrap().has_errors());
        assert!(!lint().check("import os").unwrap().has_errors());
    }

    #[test]
    fn results_are_cached_and_stable() {
        let l = lint();
        let a = l.check("print(q)").unwrap();
        let b = l.check("print(q)").unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(*a, *Linter::builtin().check("print(q)").unwrap());
    }

    #[test]
    fn external_spec_validation() {
        assert!(LinterSpec::external("", "x").validate().is_err());
        assert!(LinterSpec::external("lint {path}", " ").validate().is_err());
        assert!(LinterSpec::external("lint {path}", "(?P<line>\\d+)").validate().is_ok());
    }
}
