use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use lintseq_core::corpus::{open_corpus, read_records, CorpusReader};
use lintseq_core::lint::Linter;
use lintseq_core::metrics::{
    dataset_stats, flops_per_token, lint_error_rate_from_reports, mean_pass_at_k, pass_at_k, tokens_from_chars,
    total_flops, FlopsModel,
};
use lintseq_core::pipeline::generate;
use lintseq_core::DEFAULT_SEPARATOR;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{linter_spec, RunConfig};
use crate::{
    Cli, Command, FlopsArgs, GenerateArgs, LintcheckArgs, PasskArgs, ResolveArgs, StatsArgs, EXIT_PARTIAL,
};

/// Runs one subcommand and returns its exit status. Fatal errors are
/// returned as `Err` and map to status 1.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Resolve(a) => cmd_resolve(&a),
        Command::Stats(a) => cmd_stats(&a),
        Command::Passk(a) => cmd_passk(&a),
        Command::Flops(a) => cmd_flops(&a),
        Command::Lintcheck(a) => cmd_lintcheck(&a),
    }
}

fn is_stdio(path: &Path) -> bool {
    path.as_os_str() == "-"
}

fn create_output(path: &Path) -> Result<Box<dyn Write>> {
    if is_stdio(path) {
        return Ok(Box::new(BufWriter::new(io::stdout().lock())));
    }
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(Box::new(BufWriter::new(file)))
}

/// Reports go to stdout unless stdout carries data.
fn report_stream(data_on_stdout: bool) -> Box<dyn Write> {
    if data_on_stdout {
        Box::new(io::stderr().lock())
    } else {
        Box::new(io::stdout().lock())
    }
}

fn cmd_generate(args: &GenerateArgs) -> Result<i32> {
    let cfg = RunConfig::from_args(args)?;
    let linter = Linter::new(cfg.linter.clone())?;
    let reader = open_corpus(&cfg.input)?;
    let output = create_output(&cfg.output)?;
    log::info!(
        "generating {} sequence(s) per example from {} with {} worker(s)",
        cfg.generate.sample.samples,
        cfg.input.display(),
        cfg.generate.workers
    );
    let summary = generate(reader, output, &linter, &cfg.generate)?;

    let mut out = report_stream(is_stdio(&cfg.output));
    if args.json {
        writeln!(out, "{}", serde_json::to_string(&summary)?)?;
    } else {
        writeln!(out, "examples:   {}", summary.examples_read)?;
        writeln!(out, "processed:  {}", summary.examples_processed)?;
        writeln!(out, "sequences:  {}", summary.sequences)?;
        writeln!(out, "skipped:    {}", summary.skipped.len())?;
        writeln!(out, "malformed:  {}", summary.malformed_records.len())?;
        writeln!(out, "duplicates: {}", summary.duplicates_removed)?;
        writeln!(out, "mean edits: {:.3}", summary.mean_edits)?;
        writeln!(out, "wall time:  {:.2}s", summary.wall_seconds)?;
    }
    if summary.skip_fraction() > cfg.max_skip_fraction {
        log::warn!(
            "skipped {:.1}% of inputs (limit {:.1}%)",
            100.0 * summary.skip_fraction(),
            100.0 * cfg.max_skip_fraction
        );
        return Ok(EXIT_PARTIAL);
    }
    Ok(0)
}

#[derive(Debug, Serialize)]
struct Resolved<'a> {
    source_id: &'a str,
    sample_index: usize,
    program: &'a str,
    matches_source: bool,
}

#[derive(Debug, Default, Serialize)]
struct ResolveSummary {
    records: usize,
    resolved: usize,
    matching: usize,
    conflicts: usize,
    malformed: usize,
}

fn cmd_resolve(args: &ResolveArgs) -> Result<i32> {
    let separator = args.separator.as_deref().unwrap_or(DEFAULT_SEPARATOR);
    let records = read_records(&args.input)?;
    let mut out = create_output(&args.output)?;
    let mut summary = ResolveSummary::default();
    for record in records {
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                log::warn!("malformed record: {e}");
                summary.malformed += 1;
                continue;
            }
        };
        summary.records += 1;
        match record.resolve(separator) {
            Ok(program) => {
                summary.resolved += 1;
                let matches_source = program == record.program;
                if matches_source {
                    summary.matching += 1;
                } else {
                    log::warn!("{}#{}: resolved program differs from source", record.source_id, record.sample_index);
                }
                let row = Resolved {
                    source_id: &record.source_id,
                    sample_index: record.sample_index,
                    program: &program,
                    matches_source,
                };
                serde_json::to_writer(&mut out, &row)?;
                out.write_all(b"\n")?;
            }
            Err(e) => {
                log::warn!("{}#{}: {e}", record.source_id, record.sample_index);
                summary.conflicts += 1;
                let row = json!({
                    "source_id": record.source_id,
                    "sample_index": record.sample_index,
                    "error": e.to_string(),
                    "edit_index": e.edit_index,
                    "partial": e.partial,
                });
                serde_json::to_writer(&mut out, &row)?;
                out.write_all(b"\n")?;
            }
        }
    }
    out.flush()?;
    drop(out);

    let mut report = report_stream(is_stdio(&args.output));
    if args.json {
        writeln!(report, "{}", serde_json::to_string(&summary)?)?;
    } else {
        writeln!(report, "records:   {}", summary.records)?;
        writeln!(report, "resolved:  {}", summary.resolved)?;
        writeln!(report, "matching:  {}", summary.matching)?;
        writeln!(report, "conflicts: {}", summary.conflicts)?;
        writeln!(report, "malformed: {}", summary.malformed)?;
    }
    let clean = summary.conflicts == 0 && summary.malformed == 0 && summary.matching == summary.resolved;
    Ok(if clean { 0 } else { EXIT_PARTIAL })
}

fn cmd_stats(args: &StatsArgs) -> Result<i32> {
    let records = read_records(&args.input)?;
    let malformed = records.iter().filter(|r| r.is_err()).count();
    let good: Vec<_> = records.into_iter().filter_map(Result::ok).collect();
    let stats = dataset_stats(&good);
    let mut out = io::stdout().lock();
    if args.json {
        let mut value = serde_json::to_value(&stats)?;
        value["malformed"] = json!(malformed);
        writeln!(out, "{value}")?;
    } else {
        writeln!(out, "examples:              {}", stats.example_count)?;
        writeln!(out, "sequences:             {}", stats.sequence_count)?;
        writeln!(out, "mean lines/example:    {:.3}", stats.lines_per_example.mean)?;
        writeln!(out, "mean edits/sequence:   {:.3}", stats.edits_per_sequence.mean)?;
        writeln!(out, "mean chars/sequence:   {:.1}", stats.chars_per_training_text.mean)?;
        writeln!(out, "malformed:             {malformed}")?;
        writeln!(out, "edits per sequence:")?;
        for (edits, count) in &stats.edits_per_sequence.counts {
            writeln!(out, "  {edits:>5}  {count}")?;
        }
    }
    Ok(if malformed == 0 { 0 } else { EXIT_PARTIAL })
}

#[derive(Debug, Deserialize)]
struct Problem {
    n: u64,
    c: u64,
}

fn read_problems(path: &Path) -> Result<Vec<(u64, u64)>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut problems = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let p: Problem = serde_json::from_str(&line).with_context(|| format!("{}:{}", path.display(), i + 1))?;
        problems.push((p.n, p.c));
    }
    Ok(problems)
}

fn cmd_passk(args: &PasskArgs) -> Result<i32> {
    let mut out = io::stdout().lock();
    if let Some(path) = &args.problems {
        // With --problems, every positional argument is a k.
        let ks: Vec<u64> = [args.n, args.c].into_iter().flatten().chain(args.k.iter().copied()).collect();
        if ks.is_empty() {
            bail!("give at least one k");
        }
        let problems = read_problems(path)?;
        let rows = ks
            .iter()
            .map(|&k| Ok(json!({ "k": k, "pass_at_k": mean_pass_at_k(&problems, k)? })))
            .collect::<Result<Vec<_>>>()?;
        if args.json {
            writeln!(out, "{}", json!({ "problems": problems.len(), "results": rows }))?;
        } else {
            writeln!(out, "problems: {}", problems.len())?;
            for row in rows {
                writeln!(out, "pass@{}\t{:.4}", row["k"], row["pass_at_k"].as_f64().unwrap_or(f64::NAN))?;
            }
        }
        return Ok(0);
    }

    let (Some(n), Some(c)) = (args.n, args.c) else { bail!("usage: passk <N> <C> <K>...") };
    if args.k.is_empty() {
        bail!("give at least one k");
    }
    let rows = args
        .k
        .iter()
        .map(|&k| Ok((k, pass_at_k(n, c, k)?)))
        .collect::<Result<Vec<_>>>()?;
    if args.json {
        let rows: Vec<_> = rows.iter().map(|(k, p)| json!({ "n": n, "c": c, "k": k, "pass_at_k": p })).collect();
        writeln!(out, "{}", serde_json::Value::Array(rows))?;
    } else {
        for (k, p) in rows {
            writeln!(out, "pass@{k}\t{p:.4}")?;
        }
    }
    Ok(0)
}

fn cmd_flops(args: &FlopsArgs) -> Result<i32> {
    let tokens = match (args.tokens, args.chars) {
        (Some(t), _) => t,
        (None, Some(chars)) => tokens_from_chars(chars, args.chars_per_token),
        (None, None) => 1,
    };
    let model = FlopsModel {
        n_params: args.params,
        n_layers: args.layers,
        context: args.context,
        avg_tokens_per_sample: tokens,
        samples_per_problem: args.samples,
        problems: args.problems,
    };
    let per_token = flops_per_token(&model)?;
    let total = total_flops(&model)?;
    let mut out = io::stdout().lock();
    if args.json {
        // Serialized as strings: u128 does not fit JSON's safe integer range.
        let value = json!({
            "flops_per_token": per_token.to_string(),
            "total_flops": total.to_string(),
            "tokens_per_sample": tokens,
        });
        writeln!(out, "{value}")?;
    } else {
        writeln!(out, "flops/token: {per_token}")?;
        writeln!(out, "total:       {total} ({total:.3e})", total = total as f64)?;
    }
    Ok(0)
}

fn cmd_lintcheck(args: &LintcheckArgs) -> Result<i32> {
    let spec = linter_spec(&args.linter, None, None, None, None, false)?;
    let linter = Linter::new(spec)?;
    let reader: CorpusReader<_> = open_corpus(&args.input)?;
    let mut programs = Vec::new();
    let mut malformed = 0usize;
    for item in reader {
        match item? {
            Ok(ex) => programs.push(ex.program),
            Err(e) => {
                log::warn!("skipping record at line {}: {}", e.line, e.reason);
                malformed += 1;
            }
        }
    }
    let reports: Vec<_> = programs.par_iter().map(|p| linter.check(p)).collect();
    let rate = lint_error_rate_from_reports(reports)?;
    let mut out = io::stdout().lock();
    if args.json {
        let mut value = serde_json::to_value(&rate)?;
        value["malformed"] = json!(malformed);
        writeln!(out, "{value}")?;
    } else {
        writeln!(out, "checked:     {}", rate.checked)?;
        writeln!(out, "with errors: {}", rate.with_errors)?;
        writeln!(out, "error rate:  {:.4}", rate.rate)?;
        writeln!(out, "failed:      {}", rate.failed)?;
        writeln!(out, "malformed:   {malformed}")?;
        for (code, count) in &rate.per_code {
            writeln!(out, "  {code:<24} {count}")?;
        }
    }
    Ok(if malformed == 0 && rate.failed == 0 { 0 } else { EXIT_PARTIAL })
}
