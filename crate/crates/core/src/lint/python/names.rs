//! Name binding and lookup over a scope tree built in textual order.

use std::collections::{HashMap, HashSet};

use super::tokenize::{tokenize, Tok, TokKind};
use super::Issue;

pub(crate) type ScopeId = usize;

pub(crate) const MODULE_SCOPE: ScopeId = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ScopeKind {
    Module,
    Function,
    Class,
}

const KEYWORDS: [&str; 35] = [
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue", "def",
    "del", "elif", "else", "except", "finally", "for", "from", "global", "if", "import", "in", "is",
    "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try", "while", "with", "yield",
];

const BUILTINS: &[&str] = &[
    "__build_class__", "__debug__", "__doc__", "__file__", "__import__", "__loader__", "__name__",
    "__package__", "__spec__", "__builtins__", "__annotations__", "__dict__", "__path__", "abs", "aiter",
    "all", "anext", "any", "ascii", "bin", "bool", "breakpoint", "bytearray", "bytes", "callable", "chr",
    "classmethod", "compile", "complex", "copyright", "credits", "delattr", "dict", "dir", "divmod",
    "enumerate", "eval", "exec", "exit", "filter", "float", "format", "frozenset", "getattr", "globals",
    "hasattr", "hash", "help", "hex", "id", "input", "int", "isinstance", "issubclass", "iter", "len",
    "license", "list", "locals", "map", "max", "memoryview", "min", "next", "object", "oct", "open", "ord",
    "pow", "print", "property", "quit", "range", "repr", "reversed", "round", "set", "setattr", "slice",
    "sorted", "staticmethod", "str", "sum", "super", "tuple", "type", "vars", "zip", "NotImplemented",
    "Ellipsis", "BaseException", "BaseExceptionGroup", "Exception", "ExceptionGroup", "ArithmeticError",
    "AssertionError", "AttributeError", "BlockingIOError", "BrokenPipeError", "BufferError",
    "ChildProcessError", "ConnectionAbortedError", "ConnectionError", "ConnectionRefusedError",
    "ConnectionResetError", "EOFError", "EnvironmentError", "FileExistsError", "FileNotFoundError",
    "FloatingPointError", "GeneratorExit", "IOError", "ImportError", "IndentationError", "IndexError",
    "InterruptedError", "IsADirectoryError", "KeyError", "KeyboardInterrupt", "LookupError", "MemoryError",
    "ModuleNotFoundError", "NameError", "NotADirectoryError", "NotImplementedError", "OSError",
    "OverflowError", "PermissionError", "ProcessLookupError", "RecursionError", "ReferenceError",
    "RuntimeError", "StopAsyncIteration", "StopIteration", "SyntaxError", "SystemError", "SystemExit",
    "TabError", "TimeoutError", "TypeError", "UnboundLocalError", "UnicodeDecodeError",
    "UnicodeEncodeError", "UnicodeError", "UnicodeTranslateError", "ValueError", "ZeroDivisionError",
    "Warning", "UserWarning", "DeprecationWarning", "PendingDeprecationWarning", "SyntaxWarning",
    "RuntimeWarning", "FutureWarning", "ImportWarning", "UnicodeWarning", "BytesWarning",
    "ResourceWarning", "EncodingWarning",
];

/// pylint's default dummy-variable and ignored-argument name patterns.
fn ignored_name(name: &str, kind: SiteKind) -> bool {
    if name.starts_with("ignored_") || name.starts_with("unused_") {
        return true;
    }
    match kind {
        SiteKind::Argument => name.starts_with('_'),
        SiteKind::Variable => {
            name.starts_with("dummy")
                || (name.starts_with('_')
                    && (name.bytes().all(|b| b == b'_') || name.bytes().last().is_some_and(|b| b.is_ascii_alphanumeric())))
        }
    }
}

pub(crate) fn is_keyword(name: &str) -> bool {
    KEYWORDS.contains(&name)
}

fn is_constant(name: &str) -> bool {
    matches!(name, "None" | "True" | "False")
}

/// A name token that can start or end an operand.
pub(crate) fn is_operand_name(tok: &Tok) -> bool {
    tok.kind == TokKind::Name && (!is_keyword(&tok.text) || is_constant(&tok.text))
}

fn is_plain_name(tok: &Tok) -> bool {
    tok.kind == TokKind::Name && !is_keyword(&tok.text)
}

pub(crate) fn is_opener(tok: &Tok) -> bool {
    tok.kind == TokKind::Op && matches!(tok.text.as_str(), "(" | "[" | "{")
}

pub(crate) fn is_closer(tok: &Tok) -> bool {
    tok.kind == TokKind::Op && matches!(tok.text.as_str(), ")" | "]" | "}")
}

fn ends_operand(tok: &Tok) -> bool {
    is_operand_name(tok) || matches!(tok.kind, TokKind::Number | TokKind::Str) || is_closer(tok) || tok.is_op("...")
}

/// For every opener index, the index of its matching closer.
pub(crate) fn match_brackets(toks: &[Tok]) -> Vec<Option<usize>> {
    let mut out = vec![None; toks.len()];
    let mut stack = Vec::new();
    for (i, t) in toks.iter().enumerate() {
        if is_opener(t) {
            stack.push(i);
        } else if is_closer(t) {
            if let Some(open) = stack.pop() {
                out[open] = Some(i);
            }
        }
    }
    out
}

/// Splits at depth-0 tokens satisfying `pred`.
pub(crate) fn split_top(toks: &[Tok], pred: impl Fn(&Tok) -> bool) -> Vec<&[Tok]> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    for (i, t) in toks.iter().enumerate() {
        if is_opener(t) {
            depth += 1;
        } else if is_closer(t) {
            depth = depth.saturating_sub(1);
        } else if depth == 0 && pred(t) {
            parts.push(&toks[start..i]);
            start = i + 1;
        }
    }
    parts.push(&toks[start..]);
    parts
}

/// Depth-0 positions of tokens matching `pred`, skipping the parameter list
/// of any lambda (`lambda x=1: ...`), whose `=` and `:` belong to the lambda.
pub(crate) fn top_positions(toks: &[Tok], pred: impl Fn(&Tok) -> bool) -> Vec<usize> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut in_lambda_params = 0usize;
    for (i, t) in toks.iter().enumerate() {
        if is_opener(t) {
            depth += 1;
        } else if is_closer(t) {
            depth = depth.saturating_sub(1);
        } else if depth == 0 {
            if t.is_name("lambda") {
                in_lambda_params += 1;
            } else if in_lambda_params > 0 {
                if t.is_op(":") {
                    in_lambda_params -= 1;
                }
            } else if pred(t) {
                out.push(i);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SiteKind {
    Variable,
    Argument,
}

/// A binding inside a function that is reported if nothing reads it.
#[derive(Debug)]
struct Site {
    scope: ScopeId,
    name: String,
    line: usize,
    kind: SiteKind,
}

#[derive(Debug)]
struct Use {
    name: String,
    line: usize,
    order: usize,
    lambda_body: bool,
    /// Target of an augmented assignment inside the function that binds it.
    augmented: bool,
}

#[derive(Debug)]
struct Scope {
    kind: ScopeKind,
    parent: Option<ScopeId>,
    bindings: HashMap<String, Vec<usize>>,
    globals: HashSet<String>,
    nonlocals: HashSet<String>,
    uses: Vec<Use>,
}

#[derive(Debug)]
pub(crate) struct Names {
    scopes: Vec<Scope>,
    order: usize,
    star_import: bool,
    /// Module names assigned from inside functions via `global`.
    late_bound: HashSet<String>,
    imports: Vec<(String, usize)>,
    sites: Vec<Site>,
}

enum Lookup {
    Found,
    BeforeAssignment,
    Missing,
}

impl Names {
    pub fn new() -> Self {
        Self {
            scopes: vec![Scope {
                kind: ScopeKind::Module,
                parent: None,
                bindings: HashMap::new(),
                globals: HashSet::new(),
                nonlocals: HashSet::new(),
                uses: Vec::new(),
            }],
            order: 0,
            star_import: false,
            late_bound: HashSet::new(),
            imports: Vec::new(),
            sites: Vec::new(),
        }
    }

    pub fn kind(&self, scope: ScopeId) -> ScopeKind {
        self.scopes[scope].kind
    }

    pub fn new_scope(&mut self, kind: ScopeKind, parent: ScopeId) -> ScopeId {
        self.scopes.push(Scope {
            kind,
            parent: Some(parent),
            bindings: HashMap::new(),
            globals: HashSet::new(),
            nonlocals: HashSet::new(),
            uses: Vec::new(),
        });
        self.scopes.len() - 1
    }

    fn tick(&mut self) -> usize {
        self.order += 1;
        self.order
    }

    /// Returns whether the name became a local binding of `scope`.
    fn bind_only(&mut self, scope: ScopeId, name: &str) -> bool {
        let order = self.tick();
        let sc = &self.scopes[scope];
        if sc.kind == ScopeKind::Function && sc.globals.contains(name) {
            self.late_bound.insert(name.to_string());
            return false;
        }
        if sc.nonlocals.contains(name) {
            return false;
        }
        self.scopes[scope].bindings.entry(name.to_string()).or_default().push(order);
        true
    }

    pub fn bind(&mut self, scope: ScopeId, name: &str, line: usize) {
        self.bind_site(scope, name, line, Some(SiteKind::Variable));
    }

    /// `kind` is `None` for bindings never reported as unused.
    pub fn bind_site(&mut self, scope: ScopeId, name: &str, line: usize, kind: Option<SiteKind>) {
        if self.bind_only(scope, name) && self.scopes[scope].kind == ScopeKind::Function {
            if let Some(kind) = kind.filter(|&k| !ignored_name(name, k)) {
                self.sites.push(Site { scope, name: name.to_string(), line, kind });
            }
        }
    }

    pub fn bind_import(&mut self, scope: ScopeId, name: &str, line: usize) {
        self.bind_only(scope, name);
        self.imports.push((name.to_string(), line));
    }

    pub fn use_name(&mut self, scope: ScopeId, name: &str, line: usize, lambda_body: bool) {
        let order = self.tick();
        self.scopes[scope].uses.push(Use { name: name.to_string(), line, order, lambda_body, augmented: false });
    }

    /// `name += ...`: a read of the name followed by a binding.
    pub fn augment(&mut self, scope: ScopeId, name: &str, line: usize) {
        let order = self.tick();
        let augmented = self.scopes[scope].kind == ScopeKind::Function;
        self.scopes[scope].uses.push(Use { name: name.to_string(), line, order, lambda_body: false, augmented });
        self.bind(scope, name, line);
    }

    pub fn declare_global(&mut self, scope: ScopeId, name: &str) {
        self.scopes[scope].globals.insert(name.to_string());
    }

    pub fn declare_nonlocal(&mut self, scope: ScopeId, name: &str) {
        self.scopes[scope].nonlocals.insert(name.to_string());
    }

    pub fn set_star_import(&mut self) {
        self.star_import = true;
    }

    fn in_function(&self, mut scope: ScopeId) -> bool {
        loop {
            let sc = &self.scopes[scope];
            if sc.kind == ScopeKind::Function {
                return true;
            }
            match sc.parent {
                Some(p) => scope = p,
                None => return false,
            }
        }
    }

    fn lookup(&self, scope: ScopeId, use_: &Use) -> Lookup {
        let name = use_.name.as_str();
        let deferred = use_.lambda_body || self.in_function(scope);
        let bound_before = |binds: &Vec<usize>| binds.iter().any(|&o| o < use_.order);
        let sc = &self.scopes[scope];

        let mut parent = sc.parent;
        if sc.globals.contains(name) {
            parent = Some(MODULE_SCOPE);
        } else if sc.nonlocals.contains(name) {
            // resolved in an enclosing function below
        } else if let Some(binds) = sc.bindings.get(name) {
            match sc.kind {
                ScopeKind::Function => {
                    return if bound_before(binds) { Lookup::Found } else { Lookup::BeforeAssignment };
                }
                ScopeKind::Module => {
                    return if deferred || bound_before(binds) || self.late_bound.contains(name) {
                        Lookup::Found
                    } else {
                        Lookup::BeforeAssignment
                    };
                }
                ScopeKind::Class => {
                    if bound_before(binds) {
                        return Lookup::Found;
                    }
                }
            }
        }

        while let Some(p) = parent {
            let ps = &self.scopes[p];
            match ps.kind {
                ScopeKind::Class => {}
                ScopeKind::Function => {
                    if ps.bindings.contains_key(name) {
                        return Lookup::Found;
                    }
                }
                ScopeKind::Module => {
                    if let Some(binds) = ps.bindings.get(name) {
                        return if deferred || bound_before(binds) || self.late_bound.contains(name) {
                            Lookup::Found
                        } else {
                            Lookup::BeforeAssignment
                        };
                    }
                }
            }
            parent = ps.parent;
        }
        if self.late_bound.contains(name) || BUILTINS.contains(&name) {
            Lookup::Found
        } else {
            Lookup::Missing
        }
    }

    /// The function scope whose binding a use reads, if any.
    fn reading_function(&self, scope: ScopeId, name: &str) -> Option<ScopeId> {
        let sc = &self.scopes[scope];
        if sc.globals.contains(name) {
            return None;
        }
        if !sc.nonlocals.contains(name) && sc.bindings.contains_key(name) {
            return (sc.kind == ScopeKind::Function).then_some(scope);
        }
        let mut parent = sc.parent;
        while let Some(p) = parent {
            let ps = &self.scopes[p];
            match ps.kind {
                ScopeKind::Function if ps.bindings.contains_key(name) && !ps.nonlocals.contains(name) => {
                    return Some(p);
                }
                ScopeKind::Module => return None,
                _ => {}
            }
            parent = ps.parent;
        }
        None
    }

    pub fn finish(self, issues: &mut Vec<Issue>) {
        let mut used: HashSet<&str> = HashSet::new();
        let mut read: HashSet<(ScopeId, &str)> = HashSet::new();
        for (id, sc) in self.scopes.iter().enumerate() {
            for u in &sc.uses {
                used.insert(&u.name);
                if let Some(f) = self.reading_function(id, &u.name) {
                    read.insert((f, &u.name));
                }
                let local = u.augmented && sc.bindings.contains_key(&u.name);
                match if local { Lookup::Found } else { self.lookup(id, u) } {
                    Lookup::Found => {}
                    Lookup::BeforeAssignment => issues.push(Issue::error(
                        u.line,
                        "used-before-assignment",
                        format!("name '{}' used before assignment", u.name),
                    )),
                    Lookup::Missing if self.star_import => {}
                    Lookup::Missing => {
                        issues.push(Issue::error(u.line, "undefined-name", format!("undefined name '{}'", u.name)))
                    }
                }
            }
        }
        for (name, line) in &self.imports {
            if !used.contains(name.as_str()) {
                issues.push(Issue::warning(*line, "unused-import", format!("'{name}' imported but unused")));
            }
        }
        let mut reported: HashSet<(ScopeId, &str)> = HashSet::new();
        for site in &self.sites {
            let key = (site.scope, site.name.as_str());
            if read.contains(&key) || !reported.insert(key) {
                continue;
            }
            issues.push(match site.kind {
                SiteKind::Variable => {
                    Issue::warning(site.line, "unused-variable", format!("unused variable '{}'", site.name))
                }
                SiteKind::Argument => {
                    Issue::warning(site.line, "unused-argument", format!("unused argument '{}'", site.name))
                }
            });
        }
    }
}

/// Extracts the expressions embedded in an f-string body.
fn fstring_expressions(body: &str) -> Vec<String> {
    let chars: Vec<char> = body.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        match chars[i] {
            '{' if chars.get(i + 1) == Some(&'{') => i += 2,
            '{' => {
                let mut depth = 0usize;
                let mut j = i + 1;
                let mut end_expr = None;
                let mut quote: Option<char> = None;
                while j < chars.len() {
                    let c = chars[j];
                    if let Some(q) = quote {
                        if c == q {
                            quote = None;
                        }
                    } else {
                        match c {
                            '\'' | '"' => quote = Some(c),
                            '(' | '[' | '{' => depth += 1,
                            ')' | ']' => depth = depth.saturating_sub(1),
                            '}' if depth > 0 => depth -= 1,
                            '}' => break,
                            '!' if depth == 0 && chars.get(j + 1) != Some(&'=') => {
                                end_expr.get_or_insert(j);
                            }
                            ':' if depth == 0 => {
                                end_expr.get_or_insert(j);
                            }
                            _ => {}
                        }
                    }
                    j += 1;
                }
                let stop = end_expr.unwrap_or(j).min(j);
                out.push(chars[i + 1..stop].iter().collect());
                i = j + 1;
            }
            _ => i += 1,
        }
    }
    out
}

/// Records every name read by an expression.
pub(crate) fn scan_uses(names: &mut Names, toks: &[Tok], scope: ScopeId) {
    scan_uses_inner(names, toks, scope, false);
}

fn scan_uses_inner(names: &mut Names, toks: &[Tok], scope: ScopeId, outer_lambda: bool) {
    let matches = match_brackets(toks);

    // (start, end, names) ranges where comprehension targets or lambda
    // parameters shadow outer names.
    let mut shadows: Vec<(usize, usize, HashSet<&str>)> = Vec::new();
    let mut lambda_bodies: Vec<(usize, usize)> = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    for (i, t) in toks.iter().enumerate() {
        if is_opener(t) {
            stack.push(i);
        } else if is_closer(t) {
            stack.pop();
        } else if t.is_name("for") {
            if let Some(&open) = stack.last() {
                let end = matches[open].unwrap_or(toks.len());
                let mut targets = HashSet::new();
                let mut depth = 0usize;
                for tok in &toks[i + 1..end] {
                    if depth == 0 && tok.is_name("in") {
                        break;
                    }
                    if is_opener(tok) {
                        depth += 1;
                    } else if is_closer(tok) {
                        depth = depth.saturating_sub(1);
                    } else if is_plain_name(tok) {
                        targets.insert(tok.text.as_str());
                    }
                }
                shadows.push((open, end, targets));
            }
        } else if t.is_name("lambda") {
            let mut params = HashSet::new();
            let mut depth = 0usize;
            let mut colon = None;
            let mut after_eq = false;
            for (k, tok) in toks.iter().enumerate().skip(i + 1) {
                if is_opener(tok) {
                    depth += 1;
                } else if is_closer(tok) {
                    if depth == 0 {
                        break;
                    }
                    depth -= 1;
                } else if depth == 0 {
                    if tok.is_op(":") {
                        colon = Some(k);
                        break;
                    } else if tok.is_op("=") {
                        after_eq = true;
                    } else if tok.is_op(",") {
                        after_eq = false;
                    } else if !after_eq && is_plain_name(tok) {
                        params.insert(tok.text.as_str());
                    }
                }
            }
            let Some(colon) = colon else { continue };
            let mut depth = 0usize;
            let mut end = toks.len();
            for (k, tok) in toks.iter().enumerate().skip(colon + 1) {
                if is_opener(tok) {
                    depth += 1;
                } else if is_closer(tok) {
                    if depth == 0 {
                        end = k;
                        break;
                    }
                    depth -= 1;
                } else if depth == 0 && tok.is_op(",") {
                    end = k;
                    break;
                }
            }
            shadows.push((i, end, params));
            lambda_bodies.push((colon, end));
        }
    }

    let mut depth = 0usize;
    for (i, t) in toks.iter().enumerate() {
        if is_opener(t) {
            depth += 1;
            continue;
        }
        if is_closer(t) {
            depth = depth.saturating_sub(1);
            continue;
        }
        let in_lambda = outer_lambda || lambda_bodies.iter().any(|&(s, e)| s < i && i < e);
        if t.kind == TokKind::Str && t.fstring {
            for expr in fstring_expressions(&t.body) {
                let mut ignored = Vec::new();
                let inner: Vec<Tok> = tokenize(&expr, &mut ignored)
                    .into_iter()
                    .flat_map(|l| l.tokens)
                    .map(|mut tok| {
                        tok.line = t.line;
                        tok
                    })
                    .collect();
                scan_uses_inner(names, &inner, scope, in_lambda);
            }
            continue;
        }
        if !is_plain_name(t) {
            continue;
        }
        if i > 0 && toks[i - 1].is_op(".") {
            continue;
        }
        let next = toks.get(i + 1);
        if depth > 0 && next.is_some_and(|n| n.is_op("=")) {
            continue;
        }
        if next.is_some_and(|n| n.is_op(":=")) {
            names.bind(scope, &t.text, t.line);
            continue;
        }
        if shadows.iter().any(|(s, e, set)| *s <= i && i < *e && set.contains(t.text.as_str())) {
            continue;
        }
        names.use_name(scope, &t.text, t.line, in_lambda);
    }
}

/// Binds the names assigned by an assignment target; subscripts and
/// attribute bases inside the target are reads.
pub(crate) fn bind_targets(names: &mut Names, toks: &[Tok], scope: ScopeId) {
    let matches = match_brackets(toks);
    let mut i = 0;
    while i < toks.len() {
        let t = &toks[i];
        let prev = i.checked_sub(1).map(|p| &toks[p]);
        if is_opener(t) {
            if prev.is_some_and(ends_operand) {
                let end = matches[i].unwrap_or(toks.len());
                scan_uses(names, &toks[i + 1..end], scope);
                i = end + 1;
                continue;
            }
        } else if is_plain_name(t) && !prev.is_some_and(|p| p.is_op(".")) {
            let next = toks.get(i + 1);
            if next.is_some_and(|n| n.is_op(".") || n.is_op("(") || n.is_op("[")) {
                names.use_name(scope, &t.text, t.line, false);
            } else {
                names.bind(scope, &t.text, t.line);
            }
        }
        i += 1;
    }
}

pub(crate) fn operand_end(tok: &Tok) -> bool {
    ends_operand(tok)
}
