use std::io::Cursor;

use lintseq_core::corpus::{deduplicate, read_records, write_records, CorpusReader, SourceExample};
use lintseq_core::editcodec::{resolve, resolve_prefixes, DEFAULT_SEPARATOR};
use lintseq_core::pipeline::{generate, GenerateConfig};
use lintseq_core::lint::Linter;
use proptest::prelude::*;

/// Byte offsets where each edit starts: separators at line starts, plus a
/// non-blank preamble.
fn chunk_starts(text: &str) -> Vec<usize> {
    let mut starts: Vec<usize> = text
        .match_indices(DEFAULT_SEPARATOR)
        .map(|(i, _)| i)
        .filter(|&i| i == 0 || text.as_bytes()[i - 1] == b'\n')
        .collect();
    let preamble = &text[..starts.first().copied().unwrap_or(text.len())];
    if !preamble.trim().is_empty() {
        starts.insert(0, 0);
    }
    starts
}

fn diffish() -> impl Strategy<Value = String> {
    let pieces = prop::sample::select(vec![
        "<|diff|>", "\n", "@@ -0,0 +1 @@", "@@ -1,0 +2,2 @@", "@@ -2 +1,0 @@", "@@ -1 +1 @@", "+x = 1", "-x = 1",
        "+", "-", "@@", " -3,", "99999999999999999999", ",0", "\\ No newline", "--- a", "+++ b", "é",
    ]);
    prop::collection::vec(pieces, 0..40).prop_map(|v| v.concat())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn resolve_never_panics(text in diffish()) {
        match resolve_prefixes(&text, DEFAULT_SEPARATOR) {
            Ok(states) => prop_assert_eq!(resolve(&text, DEFAULT_SEPARATOR).unwrap(), states.last().cloned().unwrap_or_default()),
            Err(e) => {
                // The partial program is the resolution of the edits before the failing one.
                let starts = chunk_starts(&text);
                prop_assert!(e.edit_index < starts.len());
                let before = &text[..starts[e.edit_index]];
                prop_assert_eq!(resolve(before, DEFAULT_SEPARATOR).unwrap(), e.partial);
            }
        }
    }

    #[test]
    fn resolve_never_panics_on_arbitrary_text(text in ".{0,200}") {
        let _ = resolve(&text, DEFAULT_SEPARATOR);
    }

    #[test]
    fn dedup_is_idempotent(picks in prop::collection::vec((0usize..4, 0usize..3), 0..30)) {
        let programs = ["a = 1", "b = 2\n", "a = 1\n", "print(1)"];
        let instructions = [None, Some("x".to_string()), Some("y".to_string())];
        let corpus: Vec<SourceExample> = picks
            .iter()
            .enumerate()
            .map(|(i, &(p, ins))| SourceExample::new(i.to_string(), instructions[ins].clone(), programs[p]))
            .collect();
        let (once, removed) = deduplicate(corpus.clone());
        let (twice, removed_again) = deduplicate(once.clone());
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(removed_again, 0);
        prop_assert_eq!(once.len() + removed, corpus.len());
    }
}

#[test]
fn records_survive_a_file_round_trip() {
    let input = [
        r#"{"id": "a", "instruction": "Add.", "program": "x = 1\ny = x + 1\nprint(y)\n"}"#,
        r#"{"id": "b", "program": "def f(a):\n    return a\n\n\nprint(f(2))"}"#,
    ]
    .join("\n");
    let mut out = Vec::new();
    let summary = generate(
        CorpusReader::new(Cursor::new(input.into_bytes()), "mem"),
        &mut out,
        &Linter::builtin(),
        &GenerateConfig::default(),
    )
    .unwrap();
    assert_eq!(summary.sequences, 10);

    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.jsonl");
    std::fs::write(&first, &out).unwrap();
    let records: Vec<_> = read_records(&first).unwrap().into_iter().map(Result::unwrap).collect();
    let second = dir.path().join("second.jsonl");
    write_records(&records, &second).unwrap();
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());

    for r in &records {
        assert_eq!(r.resolve(DEFAULT_SEPARATOR).unwrap(), r.program);
        assert_eq!(r.edits.len(), r.num_edits);
    }
}
