//! Built-in line-oriented Python surface checker.
//!
//! Covers bracket balance, string termination, indentation structure,
//! header/body pairing (`def`, `class`, `if`/`elif`/`else`, `try`/`except`),
//! a handful of statement-context rules and name definition-before-use with
//! Python's scoping rules approximated in textual order.

mod checker;
mod names;
mod tokenize;

use crate::lint::Severity;

const SYNTAX_ERROR: &str = "syntax-error";

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Issue {
    pub line: usize,
    pub code: &'static str,
    pub message: String,
    pub severity: Severity,
}

impl Issue {
    pub fn syntax(line: usize, message: impl Into<String>) -> Self {
        Self::error(line, SYNTAX_ERROR, message)
    }

    pub fn error(line: usize, code: &'static str, message: impl Into<String>) -> Self {
        Self { line, code, message: message.into(), severity: Severity::Error }
    }

    pub fn warning(line: usize, code: &'static str, message: impl Into<String>) -> Self {
        Self { line, code, message: message.into(), severity: Severity::Warning }
    }
}

/// Checks Python source text; findings are sorted by line, then code and message.
pub(crate) fn check_source(source: &str) -> Vec<Issue> {
    let mut issues = Vec::new();
    let lines = tokenize::tokenize(source, &mut issues);
    checker::check_lines(&lines, source.matches('\n').count() + 1, &mut issues);
    issues.sort_by(|a, b| (a.line, a.code, &a.message).cmp(&(b.line, b.code, &b.message)));
    // A file that does not parse reports its first syntax error and nothing else.
    if let Some(first) = issues.iter().position(|i| i.code == SYNTAX_ERROR) {
        return vec![issues.swap_remove(first)];
    }
    issues
}
