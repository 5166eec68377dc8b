use lintseq_core::diffkit::{diff, join_lines, parse_diff, split_lines};
use lintseq_core::editcodec::{apply, apply_lines};
use proptest::prelude::*;
use serde::Deserialize;

#[derive(Deserialize)]
struct Golden {
    before: String,
    after: String,
    diff: String,
}

fn golden() -> Vec<Golden> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/difflib_golden.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn matches_difflib_unified_diff_byte_for_byte() {
    let cases = golden();
    assert_eq!(cases.len(), 50);
    for (i, case) in cases.iter().enumerate() {
        assert_eq!(diff(&case.before, &case.after).render(), case.diff, "case {i}");
    }
}

#[test]
fn golden_diffs_parse_and_apply() {
    for case in golden() {
        let edit = parse_diff(&case.diff).unwrap();
        assert_eq!(edit.render(), case.diff);
        assert_eq!(apply(&case.before, &edit).unwrap(), case.after);
    }
}

fn line_list() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "", "x = 1", "  pass", "}"]), 0..24)
        .prop_map(|v| v.into_iter().map(String::from).collect())
}

/// Texts whose line lists survive a join/split round trip.
fn program_text() -> impl Strategy<Value = String> {
    line_list().prop_map(|mut v| {
        if v.last().is_some_and(|l| l.is_empty()) {
            v.pop();
            v.push("end".into());
        }
        join_lines(&v)
    })
}

proptest! {
    #[test]
    fn apply_inverts_diff(a in program_text(), b in program_text()) {
        let d = diff(&a, &b);
        prop_assert_eq!(apply(&a, &d).unwrap(), b);
    }

    #[test]
    fn line_apply_inverts_diff(a in program_text(), b in program_text()) {
        let d = diff(&a, &b);
        let lines = split_lines(&a);
        prop_assert_eq!(apply_lines(&lines, &d).unwrap(), split_lines(&b));
    }

    #[test]
    fn render_then_parse_is_identity(a in program_text(), b in program_text()) {
        let d = diff(&a, &b);
        let text = d.render();
        if d.is_empty() {
            prop_assert!(text.is_empty());
        } else {
            prop_assert_eq!(parse_diff(&text).unwrap(), d);
        }
    }

    #[test]
    fn pure_insertions_give_insertion_only_diffs(a in line_list(), mask in prop::collection::vec(any::<bool>(), 24)) {
        // Numbered lines pin down which lines were kept.
        let full: Vec<String> = a.iter().enumerate().map(|(i, l)| format!("{i}:{l}")).collect();
        let sub: Vec<&String> = full.iter().zip(&mask).filter(|(_, &m)| m).map(|(l, _)| l).collect();
        let d = diff(&join_lines(&sub), &join_lines(&full));
        prop_assert!(d.is_insertion_only());
        prop_assert_eq!(d.hunks.iter().map(|h| h.insertions.len()).sum::<usize>(), full.len() - sub.len());
    }
}
