//! Synthetic Python fixture corpus shared by the integration suites.
#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn lintseq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lintseq")).args(args).output().expect("run lintseq")
}

const FN_NAMES: &[&str] = &[
    "solve", "count_even", "total_score", "longest_word", "normalize", "top_item", "merge_runs", "parse_number",
    "clean_text", "window_sum", "find_pair", "digit_sum", "is_balanced", "rotate", "flatten", "histogram",
];
const VARS: &[&str] = &["values", "items", "nums", "data", "seq", "scores", "xs", "entries"];
const ACCS: &[&str] = &["total", "acc", "result", "count", "best", "score"];
const LOOPS: &[&str] = &["x", "item", "n", "v", "value", "elem"];
const CLASSES: &[&str] = &["Counter", "Account", "Stack", "Tracker", "Inventory", "Buffer"];

struct Gen {
    rng: ChaCha8Rng,
    used_fns: Vec<String>,
}

impl Gen {
    fn pick<'a>(&mut self, xs: &[&'a str]) -> &'a str {
        xs.choose(&mut self.rng).copied().expect("nonempty pool")
    }

    fn fresh_fn(&mut self) -> String {
        loop {
            let name = self.pick(FN_NAMES).to_string();
            let name = if self.used_fns.contains(&name) { format!("{name}_{}", self.used_fns.len()) } else { name };
            if !self.used_fns.contains(&name) {
                self.used_fns.push(name.clone());
                return name;
            }
        }
    }

    fn docstring(&mut self, out: &mut Vec<String>, what: &str) {
        if self.rng.gen_bool(0.3) {
            out.push(format!("    \"\"\"Return the {what}.\"\"\""));
        }
    }

    /// Returns the function's lines and a call expression for it.
    fn function(&mut self, imports: &mut Vec<&'static str>) -> (Vec<String>, String, FnArg) {
        let f = self.fresh_fn();
        let xs = self.pick(VARS);
        let acc = self.pick(ACCS);
        let x = self.pick(LOOPS);
        let k = self.rng.gen_range(2..9);
        let mut out = Vec::new();
        match self.rng.gen_range(0..8) {
            0 => {
                out.push(format!("def {f}({xs}):"));
                self.docstring(&mut out, "sum of selected values");
                out.push(format!("    {acc} = 0"));
                out.push(format!("    for {x} in {xs}:"));
                out.push(format!("        if {x} % {k} == 0:"));
                out.push(format!("            {acc} += {x}"));
                out.push(format!("    return {acc}"));
                (out, f, FnArg::Numbers)
            }
            1 => {
                out.push(format!("def {f}(text, limit={k}):"));
                self.docstring(&mut out, "long words in upper case");
                out.push("    words = text.split()".to_string());
                out.push("    kept = [w.upper() for w in words if len(w) > limit]".to_string());
                out.push("    return \" \".join(kept)".to_string());
                (out, f, FnArg::Text)
            }
            2 => {
                out.push(format!("def {f}({xs}):"));
                out.push("    counts = {}".to_string());
                out.push(format!("    for {x} in {xs}:"));
                out.push(format!("        counts[{x}] = counts.get({x}, 0) + 1"));
                out.push("    top = max(counts, key=counts.get)".to_string());
                out.push("    return top, counts[top]".to_string());
                (out, f, FnArg::Numbers)
            }
            3 => {
                imports.push("import math");
                out.push(format!("def {f}(a, b):"));
                self.docstring(&mut out, "rounded distance");
                out.push("    dist = math.sqrt(a ** 2 + b ** 2)".to_string());
                out.push(format!("    if dist > {k}:"));
                out.push("        return round(dist, 2)".to_string());
                out.push("    return dist".to_string());
                (out, f, FnArg::Pair)
            }
            4 => {
                out.push(format!("def {f}(a, b):"));
                out.push("    while b:".to_string());
                out.push("        a, b = b, a % b".to_string());
                out.push("    return a".to_string());
                (out, f, FnArg::Pair)
            }
            5 => {
                out.push(format!("def {f}(text):"));
                out.push("    try:".to_string());
                out.push("        number = int(text)".to_string());
                out.push("    except ValueError:".to_string());
                out.push("        number = 0".to_string());
                out.push(format!("    return number * {k}"));
                (out, f, FnArg::Text)
            }
            6 => {
                imports.push("from collections import deque");
                out.push(format!("def {f}({xs}, size={k}):"));
                self.docstring(&mut out, "sliding window sums");
                out.push("    window = deque()".to_string());
                out.push("    sums = []".to_string());
                out.push(format!("    for {x} in {xs}:"));
                out.push(format!("        window.append({x})"));
                out.push("        if len(window) > size:".to_string());
                out.push("            window.popleft()".to_string());
                out.push("        sums.append(sum(window))".to_string());
                out.push("    return sums".to_string());
                (out, f, FnArg::Numbers)
            }
            _ => {
                out.push(format!("def {f}(text):"));
                out.push("    stack = []".to_string());
                out.push("    pairs = {\")\": \"(\", \"]\": \"[\"}".to_string());
                out.push("    for ch in text:".to_string());
                out.push("        if ch in \"([\":".to_string());
                out.push("            stack.append(ch)".to_string());
                out.push("        elif ch in pairs:".to_string());
                out.push("            if not stack or stack.pop() != pairs[ch]:".to_string());
                out.push("                return False".to_string());
                out.push("    return not stack".to_string());
                (out, f, FnArg::Text)
            }
        }
    }

    fn class(&mut self) -> (Vec<String>, String) {
        let c = self.pick(CLASSES);
        let out = vec![
            format!("class {c}:"),
            "    def __init__(self, start=0):".to_string(),
            "        self.value = start".to_string(),
            "        self.history = []".to_string(),
            String::new(),
            "    def add(self, delta):".to_string(),
            "        self.history.append(delta)".to_string(),
            "        self.value += delta".to_string(),
            "        return self.value".to_string(),
        ];
        (out, c.to_string())
    }

    fn argument(&mut self, kind: FnArg) -> String {
        match kind {
            FnArg::Numbers => {
                let n = self.rng.gen_range(3..7);
                let nums: Vec<String> = (0..n).map(|_| self.rng.gen_range(0..50).to_string()).collect();
                format!("[{}]", nums.join(", "))
            }
            FnArg::Text => format!("{:?}", *["hello world again", "12", "(a[b])", "x y zz"].choose(&mut self.rng).unwrap()),
            FnArg::Pair => format!("{}, {}", self.rng.gen_range(1..40), self.rng.gen_range(1..40)),
        }
    }

    fn program(&mut self) -> String {
        self.used_fns.clear();
        let mut imports: Vec<&'static str> = Vec::new();
        let mut blocks: Vec<Vec<String>> = Vec::new();
        let mut driver: Vec<String> = Vec::new();
        let n_fns = *[1, 1, 1, 1, 1, 2, 2, 3].choose(&mut self.rng).unwrap();
        for i in 0..n_fns {
            let (lines, f, arg) = self.function(&mut imports);
            blocks.push(lines);
            let res = format!("out{i}");
            match arg {
                FnArg::Numbers if self.rng.gen_bool(0.5) => {
                    driver.push(format!("data{i} = {}", self.argument(arg)));
                    driver.push(format!("{res} = {f}(data{i})"));
                    driver.push(format!("print({res})"));
                }
                _ => {
                    let a = self.argument(arg);
                    driver.push(format!("print({f}({a}))"));
                }
            }
        }
        if self.rng.gen_bool(0.15) {
            let (lines, c) = self.class();
            blocks.push(lines);
            driver.push(format!("obj = {c}()"));
            driver.push("obj.add(3)".to_string());
            driver.push("print(obj.value, obj.history)".to_string());
        }
        imports.sort();
        imports.dedup();

        let mut out: Vec<String> = imports.iter().map(|s| s.to_string()).collect();
        if !out.is_empty() {
            out.push(String::new());
        }
        for b in blocks {
            out.extend(b);
            out.push(String::new());
        }
        if self.rng.gen_bool(0.3) {
            out.push("if __name__ == \"__main__\":".to_string());
            out.extend(driver.into_iter().map(|l| format!("    {l}")));
        } else {
            out.extend(driver);
        }
        let mut text = out.join("\n");
        text.push('\n');
        text
    }
}

#[derive(Clone, Copy)]
enum FnArg {
    Numbers,
    Text,
    Pair,
}

/// `count` programs, deterministic in `seed`.
pub fn programs(count: usize, seed: u64) -> Vec<String> {
    let mut gen = Gen { rng: ChaCha8Rng::seed_from_u64(seed), used_fns: Vec::new() };
    (0..count).map(|_| gen.program()).collect()
}

pub fn write_corpus(path: &Path, programs: &[String]) {
    let mut text = String::new();
    for (i, p) in programs.iter().enumerate() {
        let record = serde_json::json!({
            "id": format!("prog-{i:04}"),
            "instruction": format!("Write program {i}."),
            "program": p,
        });
        text.push_str(&record.to_string());
        text.push('\n');
    }
    std::fs::write(path, text).expect("write corpus");
}
