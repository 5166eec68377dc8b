//! Dataset statistics, lint error rates, pass@k and inference FLOPs.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::EditSequenceRecord;
use crate::diffkit::split_lines;
use crate::lint::{LintError, LintReport, Linter, Severity};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("pass@k needs 0 <= c <= n and 1 <= k <= n (got n={n}, c={c}, k={k})")]
    PassAtK { n: u64, c: u64, k: u64 },
    #[error("FLOPs model field `{0}` must be positive")]
    NonPositive(&'static str),
    #[error("FLOPs count overflows 128 bits")]
    Overflow,
    #[error("error rate is undefined for an empty program set")]
    NoPrograms,
}

/// Counts per integer value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub counts: BTreeMap<u64, u64>,
    pub total: u64,
    pub mean: f64,
}

impl Histogram {
    fn from_values(values: impl IntoIterator<Item = u64>) -> Self {
        let mut counts = BTreeMap::new();
        let (mut n, mut sum) = (0u64, 0u128);
        for v in values {
            *counts.entry(v).or_insert(0) += 1;
            n += 1;
            sum += v as u128;
        }
        let mean = if n == 0 { 0.0 } else { sum as f64 / n as f64 };
        Self { counts, total: n, mean }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub example_count: usize,
    pub sequence_count: usize,
    /// One entry per distinct source example.
    pub lines_per_example: Histogram,
    pub edits_per_sequence: Histogram,
    pub chars_per_training_text: Histogram,
}

pub fn dataset_stats<'a>(records: impl IntoIterator<Item = &'a EditSequenceRecord>) -> DatasetStats {
    let mut seen = HashSet::new();
    let mut lines = Vec::new();
    let mut edits = Vec::new();
    let mut chars = Vec::new();
    for r in records {
        if seen.insert(r.source_id.as_str()) {
            lines.push(split_lines(&r.program).len() as u64);
        }
        edits.push(r.num_edits as u64);
        chars.push(r.training_text.chars().count() as u64);
    }
    DatasetStats {
        example_count: seen.len(),
        sequence_count: edits.len(),
        lines_per_example: Histogram::from_values(lines),
        edits_per_sequence: Histogram::from_values(edits),
        chars_per_training_text: Histogram::from_values(chars),
    }
}

/// Unbiased pass@k from `n` samples of which `c` are correct:
/// `1 - C(n-c, k) / C(n, k)`, evaluated as `1 - prod_{i=n-c+1}^{n} (1 - k/i)`.
pub fn pass_at_k(n: u64, c: u64, k: u64) -> Result<f64, MetricsError> {
    if c > n || k == 0 || k > n {
        return Err(MetricsError::PassAtK { n, c, k });
    }
    if n - c < k {
        return Ok(1.0);
    }
    let kf = k as f64;
    let prod: f64 = (n - c + 1..=n).map(|i| 1.0 - kf / i as f64).product();
    Ok(1.0 - prod)
}

/// Mean pass@k over problems given as `(n, c)` pairs.
pub fn mean_pass_at_k(problems: &[(u64, u64)], k: u64) -> Result<f64, MetricsError> {
    if problems.is_empty() {
        return Err(MetricsError::NoPrograms);
    }
    let mut sum = 0.0;
    for &(n, c) in problems {
        sum += pass_at_k(n, c, k)?;
    }
    Ok(sum / problems.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlopsModel {
    pub n_params: u64,
    pub n_layers: u64,
    pub context: u64,
    pub avg_tokens_per_sample: u64,
    pub samples_per_problem: u64,
    pub problems: u64,
}

impl FlopsModel {
    pub fn validate(&self) -> Result<(), MetricsError> {
        let fields = [
            ("n_params", self.n_params),
            ("n_layers", self.n_layers),
            ("context", self.context),
            ("avg_tokens_per_sample", self.avg_tokens_per_sample),
            ("samples_per_problem", self.samples_per_problem),
            ("problems", self.problems),
        ];
        match fields.iter().find(|(_, v)| *v == 0) {
            Some((name, _)) => Err(MetricsError::NonPositive(name)),
            None => Ok(()),
        }
    }
}

/// `2 * (N + 2 * L * C)`.
pub fn flops_per_token(model: &FlopsModel) -> Result<u128, MetricsError> {
    model.validate()?;
    let attn = 2u128
        .checked_mul(model.n_layers as u128)
        .and_then(|x| x.checked_mul(model.context as u128))
        .ok_or(MetricsError::Overflow)?;
    (model.n_params as u128)
        .checked_add(attn)
        .and_then(|x| x.checked_mul(2))
        .ok_or(MetricsError::Overflow)
}

/// FLOPs per token times tokens per sample, samples per problem and problems.
pub fn total_flops(model: &FlopsModel) -> Result<u128, MetricsError> {
    flops_per_token(model)?
        .checked_mul(model.avg_tokens_per_sample as u128)
        .and_then(|x| x.checked_mul(model.samples_per_problem as u128))
        .and_then(|x| x.checked_mul(model.problems as u128))
        .ok_or(MetricsError::Overflow)
}

/// Token estimate from a character count: `ceil(chars / chars_per_token)`.
pub fn tokens_from_chars(chars: u64, chars_per_token: f64) -> u64 {
    if chars_per_token <= 0.0 {
        return chars;
    }
    (chars as f64 / chars_per_token).ceil() as u64
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LintErrorRate {
    pub rate: f64,
    pub with_errors: usize,
    pub checked: usize,
    /// Programs the linter failed on; excluded from the denominator.
    pub failed: usize,
    /// Number of programs reporting each code.
    pub per_code: BTreeMap<String, usize>,
}

pub fn lint_error_rate<'a>(
    programs: impl IntoIterator<Item = &'a str>,
    linter: &Linter,
) -> Result<LintErrorRate, MetricsError> {
    let reports: Vec<Result<_, LintError>> = programs.into_iter().map(|p| linter.check(p)).collect();
    lint_error_rate_from_reports(reports)
}

/// Aggregates reports computed elsewhere; failed checks are counted, not fatal.
pub fn lint_error_rate_from_reports<R: std::ops::Deref<Target = LintReport>>(
    reports: Vec<Result<R, LintError>>,
) -> Result<LintErrorRate, MetricsError> {
    let mut out = LintErrorRate::default();
    for report in reports {
        let report = match report {
            Ok(r) => r,
            Err(e) => {
                log::warn!("lint failed: {e}");
                out.failed += 1;
                continue;
            }
        };
        out.checked += 1;
        if report.has_errors() {
            out.with_errors += 1;
            let codes: std::collections::BTreeSet<&str> = report
                .findings
                .iter()
                .filter(|f| f.severity == Severity::Error)
                .map(|f| f.code.as_str())
                .collect();
            for code in codes {
                *out.per_code.entry(code.to_string()).or_insert(0) += 1;
            }
        }
    }
    if out.checked == 0 {
        return Err(MetricsError::NoPrograms);
    }
    out.rate = out.with_errors as f64 / out.checked as f64;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_at_k_edges() {
        assert_eq!(pass_at_k(10, 0, 5).unwrap(), 0.0);
        assert_eq!(pass_at_k(5, 5, 1).unwrap(), 1.0);
        assert!((pass_at_k(10, 3, 5).unwrap() - 231.0 / 252.0).abs() < 1e-12);
        assert!(pass_at_k(3, 4, 1).is_err());
        assert!(pass_at_k(3, 1, 0).is_err());
        assert!(pass_at_k(3, 1, 4).is_err());
    }

    #[test]
    fn pass_at_k_large_budget_is_finite() {
        for c in 0..=128 {
            for k in [1, 10, 64, 128] {
                let p = pass_at_k(128, c, k).unwrap();
                assert!(p.is_finite() && (0.0..=1.0).contains(&p));
            }
        }
    }

    #[test]
    fn flops_examples() {
        let m = |n, l, c| FlopsModel { n_params: n, n_layers: l, context: c, avg_tokens_per_sample: 1, samples_per_problem: 1, problems: 1 };
        assert_eq!(flops_per_token(&m(150_000_000, 12, 1024)).unwrap(), 300_049_152);
        assert_eq!(flops_per_token(&m(1, 1, 1)).unwrap(), 6);
        assert_eq!(total_flops(&m(1, 1, 1)).unwrap(), 6);
        let big = flops_per_token(&m(150_000_000, 12, 1024)).unwrap() as f64;
        let doubled = flops_per_token(&m(150_000_000, 12, 2048)).unwrap() as f64;
        assert!((doubled - big) / big < 0.01);
    }

    #[test]
    fn flops_rejects_zero_fields() {
        let mut model = FlopsModel { n_params: 1, n_layers: 1, context: 1, avg_tokens_per_sample: 1, samples_per_problem: 0, problems: 1 };
        assert_eq!(total_flops(&model), Err(MetricsError::NonPositive("samples_per_problem")));
        model.samples_per_problem = 2;
        assert_eq!(total_flops(&model).unwrap(), 12);
    }

    #[test]
    fn lint_rates() {
        let linter = Linter::builtin();
        assert_eq!(lint_error_rate(["x = 1", "print(1)"], &linter).unwrap().rate, 0.0);
        let r = lint_error_rate(["x = 1", "print(nope)", "y = 2\nprint(y)", "pass"], &linter).unwrap();
        assert_eq!(r.rate, 0.25);
        assert_eq!(r.per_code.get("undefined-name"), Some(&1));
        assert_eq!(lint_error_rate(std::iter::empty::<&str>(), &linter), Err(MetricsError::NoPrograms));
    }

    #[test]
    fn stats_of_nothing_are_zero() {
        let s = dataset_stats(std::iter::empty());
        assert_eq!(s, DatasetStats::default());
    }
}
