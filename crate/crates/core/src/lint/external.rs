//! Adapter for an external linter process.
//!
//! The program is written to a temporary `.py` file (under `LINTSEQ_TMPDIR`
//! when set), the command template is run through `sh -c` with `{file}`
//! replaced by the quoted path, and stdout is matched line by line against
//! the finding pattern. Exit status is ignored.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use regex::Regex;

use super::{content_hash, LintError, LintFinding, LintReport, LinterSpec, Severity};

/// Matches `path:line:col: CODE message`.
pub const DEFAULT_FINDING_PATTERN: &str =
    r"^(?P<path>[^:]+):(?P<line>\d+):(?P<col>\d+):\s+(?P<code>[A-Za-z]+[0-9]*)\s+(?P<message>.*)$";

pub const FILE_PLACEHOLDER: &str = "{file}";

struct Slots {
    free: Mutex<usize>,
    cond: Condvar,
}

impl Slots {
    fn acquire(&self) -> SlotGuard<'_> {
        let mut free = self.free.lock().expect("slot lock");
        while *free == 0 {
            free = self.cond.wait(free).expect("slot lock");
        }
        *free -= 1;
        SlotGuard(self)
    }
}

struct SlotGuard<'a>(&'a Slots);

impl Drop for SlotGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().expect("slot lock") += 1;
        self.0.cond.notify_one();
    }
}

pub(super) struct Runner {
    pattern: Regex,
    location: Regex,
    slots: Slots,
}

fn shell_quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', r"'\''"))
}

impl Runner {
    pub fn new(spec: &LinterSpec) -> Result<Self, LintError> {
        let pattern = spec.finding_pattern.as_deref().unwrap_or(DEFAULT_FINDING_PATTERN);
        let pattern = Regex::new(pattern).map_err(|e| LintError::InvalidSpec(e.to_string()))?;
        for name in ["line", "code", "message"] {
            if !pattern.capture_names().any(|n| n == Some(name)) {
                return Err(LintError::InvalidSpec(format!("finding pattern lacks a `{name}` capture")));
            }
        }
        let limit = thread::available_parallelism().map_or(4, |n| n.get());
        Ok(Self {
            pattern,
            location: Regex::new(r"(?i)\b(line|column|col)\s+\d+|:\d+(:\d+)?\b").expect("static regex"),
            slots: Slots { free: Mutex::new(limit), cond: Condvar::new() },
        })
    }

    fn normalize(&self, message: &str, path: &str) -> String {
        let message = message.replace(path, "<file>");
        let message = self.location.replace_all(&message, |c: &regex::Captures<'_>| {
            c.get(1).map_or(String::new(), |m| m.as_str().to_string())
        });
        message.split_whitespace().collect::<Vec<_>>().join(" ")
    }

    pub fn run(&self, program: &str, spec: &LinterSpec) -> Result<LintReport, LintError> {
        let dir = std::env::var_os("LINTSEQ_TMPDIR").map(std::path::PathBuf::from).unwrap_or_else(std::env::temp_dir);
        let mut file = tempfile::Builder::new().prefix("lintseq-").suffix(".py").tempfile_in(dir)?;
        file.write_all(program.as_bytes())?;
        file.flush()?;
        let path = file.path().to_string_lossy().into_owned();

        let template = spec.command_template.as_deref().unwrap_or_default();
        let command = if template.contains(FILE_PLACEHOLDER) {
            template.replace(FILE_PLACEHOLDER, &shell_quote(&path))
        } else {
            format!("{template} {}", shell_quote(&path))
        };

        let _slot = self.slots.acquire();
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&command)
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()?;
        let mut stdout = child.stdout.take().expect("piped stdout");
        let reader = thread::spawn(move || {
            let mut buf = Vec::new();
            let _ = stdout.read_to_end(&mut buf);
            buf
        });

        let deadline = Instant::now() + Duration::from_millis(spec.timeout_ms);
        loop {
            if child.try_wait()?.is_some() {
                break;
            }
            if Instant::now() >= deadline {
                let _ = child.kill();
                let _ = child.wait();
                return Err(LintError::Timeout { program_hash: content_hash(program) });
            }
            thread::sleep(Duration::from_millis(2));
        }
        let output = String::from_utf8_lossy(&reader.join().unwrap_or_default()).into_owned();

        let mut findings = Vec::new();
        let mut skipped = 0;
        for line in output.lines().filter(|l| !l.trim().is_empty()) {
            let Some(caps) = self.pattern.captures(line) else {
                skipped += 1;
                continue;
            };
            let Some(line_no) = caps.name("line").and_then(|m| m.as_str().parse::<usize>().ok()) else {
                skipped += 1;
                continue;
            };
            let code = caps.name("code").map_or("", |m| m.as_str()).to_string();
            let severity = match caps.name("severity").map(|m| m.as_str().to_ascii_lowercase()) {
                Some(s) if s.starts_with('e') || s.starts_with('f') => Severity::Error,
                Some(_) => Severity::Warning,
                None if code.starts_with(['E', 'F']) => Severity::Error,
                None => Severity::Warning,
            };
            let message = self.normalize(caps.name("message").map_or("", |m| m.as_str()), &path);
            findings.push(LintFinding { code, message, line: line_no.max(1), severity });
        }
        findings.sort_by(|a, b| (a.line, &a.code, &a.message).cmp(&(b.line, &b.code, &b.message)));
        let mut report = LintReport::new(findings, spec.include_warnings);
        report.skipped_lines = skipped;
        Ok(report)
    }
}
