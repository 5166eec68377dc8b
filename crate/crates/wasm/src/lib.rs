//! Browser bindings: sample an edit sequence, diff two texts, compute pass@k.

use lintseq_core::corpus::SourceExample;
use lintseq_core::diffkit::{diff, diff_states};
use lintseq_core::editcodec::{resolve_prefixes, serialize};
use lintseq_core::lint::Linter;
use lintseq_core::metrics;
use lintseq_core::sampler::{sample_example, Mode, SampleOptions};
use lintseq_core::DEFAULT_SEPARATOR;
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct Sampled {
    pub training_text: String,
    pub edits: Vec<String>,
    /// Program after each edit.
    pub states: Vec<String>,
}

pub fn sample(program: &str, seed: u64, mode: &str) -> Result<Sampled, String> {
    let mode: Mode = mode.parse()?;
    let example = SourceExample::new("demo", None, program);
    let options = SampleOptions { samples: 1, mode, global_seed: seed, ..SampleOptions::default() };
    let linter = Linter::builtin();
    let (_, seq) = sample_example(&example, 0, &linter, &options)
        .map_err(|e| e.to_string())?
        .pop()
        .ok_or("no sequence sampled")?;
    let edits = diff_states(&seq).map_err(|e| e.to_string())?;
    let training = serialize(&edits, DEFAULT_SEPARATOR);
    let states = resolve_prefixes(&training.text, DEFAULT_SEPARATOR).map_err(|e| e.to_string())?;
    Ok(Sampled { edits: edits.iter().map(|e| e.render()).collect(), training_text: training.text, states })
}

/// Samples one edit sequence for `program` and returns it as JSON.
#[wasm_bindgen(js_name = sampleEdits)]
pub fn sample_edits(program: &str, seed: u64, mode: &str) -> Result<String, JsError> {
    let sampled = sample(program, seed, mode).map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&sampled).map_err(|e| JsError::new(&e.to_string()))
}

/// Zero-context unified diff between two texts.
#[wasm_bindgen(js_name = diffTexts)]
pub fn diff_texts(before: &str, after: &str) -> String {
    diff(before, after).render()
}

#[wasm_bindgen(js_name = passAtK)]
pub fn pass_at_k(n: u32, c: u32, k: u32) -> Result<f64, JsError> {
    metrics::pass_at_k(n.into(), c.into(), k.into()).map_err(|e| JsError::new(&e.to_string()))
}
