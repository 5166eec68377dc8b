//! Statement-level structure: indentation blocks, compound headers and
//! clause pairing. Name events are forwarded to [`Names`].

use super::names::{
    bind_targets, is_closer, is_keyword, is_opener, is_operand_name, operand_end, scan_uses, split_top,
    top_positions, Names, ScopeId, ScopeKind, SiteKind, MODULE_SCOPE,
};
use super::tokenize::{LogicalLine, Tok, TokKind};
use super::Issue;

#[derive(Debug, Clone, Copy)]
struct Context {
    scope: ScopeId,
    in_function: bool,
    in_loop: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Clause {
    If,
    Elif,
    Else,
    For,
    While,
    Try,
    Except,
    TryElse,
    Finally,
    Other,
}

#[derive(Debug)]
struct Level {
    indent: usize,
    ctx: Context,
    last: Option<Clause>,
    open_try: Option<usize>,
    /// A `return`, `raise`, `break` or `continue` ended this block.
    terminated: bool,
}

impl Level {
    fn new(indent: usize, ctx: Context) -> Self {
        Self { indent, ctx, last: None, open_try: None, terminated: false }
    }
}

#[derive(Debug)]
struct Pending {
    keyword: String,
    ctx: Context,
}

const INDENT_WIDTH: usize = 4;

const COMPOUND: [&str; 11] = ["if", "elif", "else", "while", "for", "try", "except", "finally", "with", "def", "class"];

const AUGMENTED: [&str; 13] = ["+=", "-=", "*=", "/=", "//=", "%=", "**=", "@=", "&=", "|=", "^=", ">>=", "<<="];

/// Operators that cannot begin a statement.
const NO_LEADING: [&str; 17] =
    ["=", "==", "!=", "<", ">", "<=", ">=", "/", "//", "%", "|", "&", "^", "<<", ">>", ",", "->"];

/// Keywords that need an operand after them.
const NO_TRAILING_KW: [&str; 11] = ["and", "or", "not", "in", "is", "lambda", "if", "else", "as", "from", "import"];

/// `eof_line` is where errors found at the end of input are reported.
pub(crate) fn check_lines(lines: &[LogicalLine], eof_line: usize, issues: &mut Vec<Issue>) {
    let mut ck = Checker {
        issues,
        names: Names::new(),
        levels: vec![Level::new(0, Context { scope: MODULE_SCOPE, in_function: false, in_loop: false })],
        pending: None,
        decorator: None,
        static_method: false,
        eof_line,
    };
    for line in lines {
        ck.logical_line(line);
    }
    ck.finish();
}

struct Checker<'a> {
    issues: &'a mut Vec<Issue>,
    names: Names,
    levels: Vec<Level>,
    pending: Option<Pending>,
    decorator: Option<(usize, usize)>,
    static_method: bool,
    eof_line: usize,
}

fn first_keyword(toks: &[Tok]) -> (usize, Option<&str>) {
    let start = if toks.first().is_some_and(|t| t.is_name("async"))
        && toks.get(1).is_some_and(|t| t.is_name("def") || t.is_name("for") || t.is_name("with"))
    {
        1
    } else {
        0
    };
    match toks.get(start) {
        Some(t) if t.kind == TokKind::Name && COMPOUND.contains(&t.text.as_str()) => (start, Some(t.text.as_str())),
        Some(t) if (t.is_name("match") || t.is_name("case"))
            && toks.get(start + 1).is_some_and(|n| is_operand_name(n) || n.kind != TokKind::Op || is_opener(n))
            && toks.last().is_some_and(|l| l.is_op(":")) =>
        {
            (start, Some(t.text.as_str()))
        }
        _ => (start, None),
    }
}

/// First depth-0 `:` that is not a lambda's.
fn header_colon(toks: &[Tok]) -> Option<usize> {
    top_positions(toks, |t| t.is_op(":")).first().copied()
}

fn is_malformed(toks: &[Tok]) -> bool {
    let (Some(first), Some(last)) = (toks.first(), toks.last()) else {
        return false;
    };
    if first.kind == TokKind::Op && (NO_LEADING.contains(&first.text.as_str()) || AUGMENTED.contains(&first.text.as_str()) || first.is_op(":") || first.is_op(".")) {
        return true;
    }
    if last.kind == TokKind::Op && !is_closer(last) && !matches!(last.text.as_str(), "," | "..." | ";") {
        return true;
    }
    if last.kind == TokKind::Name && NO_TRAILING_KW.contains(&last.text.as_str()) {
        return true;
    }
    toks.windows(2).any(|w| {
        let (a, b) = (&w[0], &w[1]);
        let starts = is_operand_name(b)
            || b.kind == TokKind::Number
            || (b.kind == TokKind::Str && a.kind != TokKind::Str);
        operand_end(a) && starts
    })
}

impl Checker<'_> {
    fn issue(&mut self, issue: Issue) {
        self.issues.push(issue);
    }

    fn top(&mut self) -> &mut Level {
        self.levels.last_mut().expect("module level")
    }

    /// `at` is the line where the block turned out to be closed.
    fn close_level(&mut self, level: Level, at: usize) {
        if level.open_try.is_some() {
            self.issue(Issue::syntax(at, "expected 'except' or 'finally' block"));
        }
    }

    fn logical_line(&mut self, line: &LogicalLine) {
        let toks = &line.tokens;
        if toks.is_empty() {
            return;
        }
        let indent = line.indent;

        if let Some((_, dindent)) = self.decorator.take() {
            let (_, kw) = first_keyword(toks);
            let ok = indent == dindent && (toks[0].is_op("@") || matches!(kw, Some("def" | "class")));
            if !ok {
                self.issue(Issue::syntax(line.line, "decorator without a function or class"));
            }
        }

        let top_indent = self.levels.last().map_or(0, |l| l.indent);
        if let Some(p) = self.pending.take() {
            if indent > top_indent {
                self.levels.push(Level::new(indent, p.ctx));
            } else {
                self.issue(Issue::syntax(line.line, format!("expected an indented block after '{}' statement", p.keyword)));
            }
        } else if indent > top_indent {
            self.issue(Issue::syntax(line.line, "unexpected indent"));
            let ctx = self.top().ctx;
            self.levels.push(Level::new(indent, ctx));
        }
        if indent < self.top().indent {
            while self.levels.len() > 1 && self.top().indent > indent {
                let level = self.levels.pop().expect("nested level");
                self.close_level(level, line.line);
            }
            if self.top().indent != indent {
                self.issue(Issue::syntax(line.line, "unindent does not match any outer indentation level"));
                let ctx = self.top().ctx;
                self.levels.push(Level::new(indent, ctx));
            }
        }
        let expected = INDENT_WIDTH * (self.levels.len() - 1);
        if indent != expected {
            self.issue(Issue::warning(
                line.line,
                "bad-indentation",
                format!("bad indentation: found {indent} spaces, expected {expected}"),
            ));
        }
        if std::mem::take(&mut self.top().terminated) {
            let (_, kw) = first_keyword(toks);
            if !matches!(kw, Some("elif" | "else" | "except" | "finally")) {
                self.issue(Issue::warning(line.line, "unreachable", "unreachable code"));
            }
        }

        self.statement(line.line, indent, toks);
    }

    fn statement(&mut self, line: usize, indent: usize, toks: &[Tok]) {
        let ctx = self.top().ctx;

        if toks[0].is_op("@") {
            self.decorator = Some((line, indent));
            self.static_method |= toks.len() == 2 && toks[1].is_name("staticmethod");
            if toks.len() == 1 || is_malformed(&toks[1..]) {
                self.issue(Issue::syntax(line, "invalid syntax"));
            }
            scan_uses(&mut self.names, &toks[1..], ctx.scope);
            return;
        }

        let (start, kw) = first_keyword(toks);
        let kw = kw.map(str::to_string);

        // clause pairing at this level
        let level = self.top();
        let last = level.last;
        let mut dangling = None;
        let mut unfinished_try = None;
        let clause = match kw.as_deref() {
            Some("elif") => {
                if !matches!(last, Some(Clause::If | Clause::Elif)) {
                    dangling = Some("elif");
                }
                Some(Clause::Elif)
            }
            Some("else") => {
                if !matches!(last, Some(Clause::If | Clause::Elif | Clause::For | Clause::While | Clause::Except)) {
                    dangling = Some("else");
                }
                Some(if last == Some(Clause::Except) { Clause::TryElse } else { Clause::Else })
            }
            Some("except") => {
                if !matches!(last, Some(Clause::Try | Clause::Except)) {
                    dangling = Some("except");
                }
                level.open_try = None;
                Some(Clause::Except)
            }
            Some("finally") => {
                if !matches!(last, Some(Clause::Try | Clause::Except | Clause::TryElse)) {
                    dangling = Some("finally");
                }
                level.open_try = None;
                Some(Clause::Finally)
            }
            other => {
                unfinished_try = level.open_try.take();
                match other {
                    Some("if") => Some(Clause::If),
                    Some("for") => Some(Clause::For),
                    Some("while") => Some(Clause::While),
                    Some("try") => Some(Clause::Try),
                    Some(_) => Some(Clause::Other),
                    None => None,
                }
            }
        };
        level.last = clause;
        if clause == Some(Clause::Try) {
            level.open_try = Some(line);
        }
        if unfinished_try.is_some() {
            self.issue(Issue::syntax(line, "expected 'except' or 'finally' block"));
        }
        if let Some(word) = dangling {
            self.issue(Issue::syntax(line, format!("'{word}' without a matching block")));
        }

        let Some(kw) = kw else {
            self.simple_statements(line, toks, ctx);
            let jumps = ["return", "raise", "break", "continue"];
            if split_top(toks, |t| t.is_op(";")).iter().any(|s| s.first().is_some_and(|t| jumps.iter().any(|j| t.is_name(j)))) {
                self.top().terminated = true;
            }
            return;
        };

        let rest = &toks[start..];
        let Some(colon) = header_colon(rest) else {
            self.issue(Issue::syntax(line, "expected ':'"));
            if !matches!(kw.as_str(), "def" | "class") {
                scan_uses(&mut self.names, &rest[1..], ctx.scope);
            }
            if clause == Some(Clause::Try) {
                self.top().open_try = None;
            }
            return;
        };
        let header = &rest[1..colon];
        let inline = &rest[colon + 1..];
        let mut body = ctx;
        match kw.as_str() {
            "if" | "elif" | "while" | "match" | "case" => {
                if header.is_empty() || is_malformed(header) {
                    self.issue(Issue::syntax(line, "invalid syntax"));
                }
                scan_uses(&mut self.names, header, ctx.scope);
                if kw == "while" {
                    body.in_loop = true;
                }
            }
            "else" | "try" | "finally" => {
                if !header.is_empty() {
                    self.issue(Issue::syntax(line, "invalid syntax"));
                }
            }
            "for" => {
                body.in_loop = true;
                match top_positions(header, |t| t.is_name("in")).first() {
                    Some(&at) if at > 0 && at + 1 < header.len() => {
                        scan_uses(&mut self.names, &header[at + 1..], ctx.scope);
                        bind_targets(&mut self.names, &header[..at], ctx.scope);
                    }
                    _ => {
                        self.issue(Issue::syntax(line, "invalid syntax"));
                        scan_uses(&mut self.names, header, ctx.scope);
                    }
                }
            }
            "with" => {
                if header.is_empty() {
                    self.issue(Issue::syntax(line, "invalid syntax"));
                }
                for item in split_top(header, |t| t.is_op(",")) {
                    self.as_clause(item, ctx.scope);
                }
            }
            "except" => {
                let h = if header.first().is_some_and(|t| t.is_op("*")) { &header[1..] } else { header };
                self.as_clause(h, ctx.scope);
            }
            "def" => body = self.def_header(line, header, ctx),
            "class" => body = self.class_header(line, header, ctx),
            _ => {}
        }

        if inline.is_empty() {
            self.pending = Some(Pending { keyword: kw, ctx: body });
        } else {
            self.simple_statements(line, inline, body);
        }
    }

    fn as_clause(&mut self, item: &[Tok], scope: ScopeId) {
        match top_positions(item, |t| t.is_name("as")).first() {
            Some(&at) => {
                scan_uses(&mut self.names, &item[..at], scope);
                bind_targets(&mut self.names, &item[at + 1..], scope);
            }
            None => scan_uses(&mut self.names, item, scope),
        }
    }

    fn def_header(&mut self, line: usize, header: &[Tok], ctx: Context) -> Context {
        let static_method = std::mem::take(&mut self.static_method);
        let func = self.names.new_scope(ScopeKind::Function, ctx.scope);
        let body = Context { scope: func, in_function: true, in_loop: false };
        let name_ok = header.first().is_some_and(|t| t.kind == TokKind::Name && !is_keyword(&t.text));
        let open_ok = header.get(1).is_some_and(|t| t.is_op("("));
        if !name_ok || !open_ok {
            self.issue(Issue::syntax(line, "invalid syntax"));
            if let Some(name) = header.first().filter(|_| name_ok) {
                self.names.bind(ctx.scope, &name.text, line);
            }
            return body;
        }
        self.names.bind(ctx.scope, &header[0].text, line);

        let mut depth = 0usize;
        let mut close = header.len();
        for (i, t) in header.iter().enumerate().skip(1) {
            if is_opener(t) {
                depth += 1;
            } else if is_closer(t) {
                depth -= 1;
                if depth == 0 {
                    close = i;
                    break;
                }
            }
        }
        let params = &header[2..close.min(header.len())];
        let mut bound = Vec::new();
        for param in split_top(params, |t| t.is_op(",")) {
            let p: &[Tok] = {
                let skip = param.iter().take_while(|t| t.is_op("*") || t.is_op("**") || t.is_op("/")).count();
                &param[skip..]
            };
            let Some(name) = p.first() else { continue };
            if name.kind != TokKind::Name || is_keyword(&name.text) {
                self.issue(Issue::syntax(line, "invalid syntax"));
                continue;
            }
            bound.push(name.text.clone());
            let rest = &p[1..];
            let eq = top_positions(rest, |t| t.is_op("=")).first().copied();
            let (ann, default) = match eq {
                Some(e) => (&rest[..e], &rest[e + 1..]),
                None => (rest, &rest[rest.len()..]),
            };
            if let Some(colon) = ann.first().filter(|t| t.is_op(":")) {
                let _ = colon;
                scan_uses(&mut self.names, &ann[1..], ctx.scope);
            } else if !ann.is_empty() {
                self.issue(Issue::syntax(line, "invalid syntax"));
            }
            scan_uses(&mut self.names, default, ctx.scope);
        }
        if close + 1 < header.len() {
            let tail = &header[close + 1..];
            if tail[0].is_op("->") && tail.len() > 1 {
                scan_uses(&mut self.names, &tail[1..], ctx.scope);
            } else {
                self.issue(Issue::syntax(line, "invalid syntax"));
            }
        }
        let skip_first = self.names.kind(ctx.scope) == ScopeKind::Class && !static_method;
        for (i, name) in bound.into_iter().enumerate() {
            let kind = (i > 0 || !skip_first).then_some(SiteKind::Argument);
            self.names.bind_site(func, &name, line, kind);
        }
        body
    }

    fn class_header(&mut self, line: usize, header: &[Tok], ctx: Context) -> Context {
        self.static_method = false;
        let class = self.names.new_scope(ScopeKind::Class, ctx.scope);
        match header.first() {
            Some(t) if t.kind == TokKind::Name && !is_keyword(&t.text) => {
                if header.len() > 1 {
                    if header[1].is_op("(") && header.last().is_some_and(|t| t.is_op(")")) {
                        scan_uses(&mut self.names, &header[1..], ctx.scope);
                    } else {
                        self.issue(Issue::syntax(line, "invalid syntax"));
                    }
                }
                self.names.bind(ctx.scope, &t.text, line);
            }
            _ => self.issue(Issue::syntax(line, "invalid syntax")),
        }
        Context { scope: class, in_function: false, in_loop: false }
    }

    fn simple_statements(&mut self, line: usize, toks: &[Tok], ctx: Context) {
        for stmt in split_top(toks, |t| t.is_op(";")) {
            if !stmt.is_empty() {
                self.simple(line, stmt, ctx);
            }
        }
    }

    fn simple(&mut self, line: usize, toks: &[Tok], ctx: Context) {
        let scope = ctx.scope;
        let first = &toks[0];
        let keyword = if first.kind == TokKind::Name && is_keyword(&first.text) { Some(first.text.as_str()) } else { None };
        let rest = &toks[1..];

        match keyword {
            Some("import") => return self.import(line, rest, scope),
            Some("from") => return self.import_from(line, rest, scope),
            Some(kw @ ("global" | "nonlocal")) => {
                let parts = split_top(rest, |t| t.is_op(","));
                for part in parts {
                    match part {
                        [name] if name.kind == TokKind::Name && !is_keyword(&name.text) => {
                            if kw == "global" {
                                self.names.declare_global(scope, &name.text);
                            } else if self.names.kind(scope) == ScopeKind::Function {
                                self.names.declare_nonlocal(scope, &name.text);
                            } else {
                                self.issue(Issue::error(
                                    line,
                                    "nonlocal-at-module-level",
                                    "nonlocal declaration not allowed at module level",
                                ));
                            }
                        }
                        _ => self.issue(Issue::syntax(line, "invalid syntax")),
                    }
                }
                return;
            }
            Some(kw @ ("break" | "continue")) => {
                if !ctx.in_loop {
                    self.issue(Issue::error(line, "not-in-loop", format!("'{kw}' outside loop")));
                }
                if !rest.is_empty() {
                    self.issue(Issue::syntax(line, "invalid syntax"));
                }
                return;
            }
            Some("pass") => {
                if !rest.is_empty() {
                    self.issue(Issue::syntax(line, "invalid syntax"));
                }
                return;
            }
            Some(kw @ ("return" | "yield")) => {
                if !ctx.in_function {
                    self.issue(Issue::error(line, "outside-function", format!("'{kw}' outside function")));
                }
            }
            Some(kw) if COMPOUND.contains(&kw) => {
                self.issue(Issue::syntax(line, "invalid syntax"));
                scan_uses(&mut self.names, rest, scope);
                return;
            }
            _ => {}
        }

        if is_malformed(toks) {
            self.issue(Issue::syntax(line, "invalid syntax"));
        }
        if matches!(keyword, Some("return" | "yield" | "del" | "raise" | "assert" | "await")) {
            scan_uses(&mut self.names, rest, scope);
            return;
        }

        if let Some(&at) = top_positions(toks, |t| t.kind == TokKind::Op && AUGMENTED.contains(&t.text.as_str())).first() {
            scan_uses(&mut self.names, &toks[at + 1..], scope);
            match &toks[..at] {
                [name] if name.kind == TokKind::Name && !is_keyword(&name.text) => {
                    self.names.augment(scope, &name.text, name.line);
                }
                target => {
                    scan_uses(&mut self.names, target, scope);
                    bind_targets(&mut self.names, target, scope);
                }
            }
            return;
        }

        let eqs = top_positions(toks, |t| t.is_op("="));
        let colon = top_positions(toks, |t| t.is_op(":")).first().copied();
        if let Some(c) = colon.filter(|&c| eqs.first().is_none_or(|&e| c < e)) {
            // annotated assignment
            let target = &toks[..c];
            let value_at = eqs.first().copied();
            let ann = &toks[c + 1..value_at.unwrap_or(toks.len())];
            scan_uses(&mut self.names, ann, scope);
            match value_at {
                Some(e) => {
                    scan_uses(&mut self.names, &toks[e + 1..], scope);
                    bind_targets(&mut self.names, target, scope);
                }
                None if target.len() == 1 => {}
                None => scan_uses(&mut self.names, target, scope),
            }
            return;
        }
        if eqs.is_empty() {
            scan_uses(&mut self.names, toks, scope);
            return;
        }
        let last = *eqs.last().expect("nonempty");
        scan_uses(&mut self.names, &toks[last + 1..], scope);
        let mut start = 0;
        for &e in &eqs {
            bind_targets(&mut self.names, &toks[start..e], scope);
            start = e + 1;
        }
    }

    fn import(&mut self, line: usize, rest: &[Tok], scope: ScopeId) {
        if rest.is_empty() {
            self.issue(Issue::syntax(line, "invalid syntax"));
            return;
        }
        for item in split_top(rest, |t| t.is_op(",")) {
            match item {
                [name, .., as_, alias] if as_.is_name("as") && alias.kind == TokKind::Name && name.kind == TokKind::Name => {
                    self.names.bind_import(scope, &alias.text, line);
                }
                [name, tail @ ..]
                    if name.kind == TokKind::Name
                        && !is_keyword(&name.text)
                        && tail.chunks(2).all(|c| c.len() == 2 && c[0].is_op(".") && c[1].kind == TokKind::Name) =>
                {
                    self.names.bind_import(scope, &name.text, line);
                }
                _ => self.issue(Issue::syntax(line, "invalid syntax")),
            }
        }
    }

    fn import_from(&mut self, line: usize, rest: &[Tok], scope: ScopeId) {
        let Some(imp) = rest.iter().position(|t| t.is_name("import")) else {
            self.issue(Issue::syntax(line, "invalid syntax"));
            return;
        };
        let module: String = rest[..imp].iter().map(|t| t.text.as_str()).collect();
        if module.is_empty() {
            self.issue(Issue::syntax(line, "invalid syntax"));
        }
        let future = module == "__future__";
        let mut names = &rest[imp + 1..];
        if names.first().is_some_and(|t| t.is_op("(")) && names.last().is_some_and(|t| t.is_op(")")) {
            names = &names[1..names.len() - 1];
        }
        if names.is_empty() {
            self.issue(Issue::syntax(line, "invalid syntax"));
            return;
        }
        for item in split_top(names, |t| t.is_op(",")) {
            let bound = match item {
                [] => continue,
                [star] if star.is_op("*") => {
                    self.names.set_star_import();
                    continue;
                }
                [name] if name.kind == TokKind::Name && !is_keyword(&name.text) => &name.text,
                [name, as_, alias] if name.kind == TokKind::Name && as_.is_name("as") && alias.kind == TokKind::Name => {
                    &alias.text
                }
                _ => {
                    self.issue(Issue::syntax(line, "invalid syntax"));
                    continue;
                }
            };
            if future {
                self.names.bind_site(scope, bound, line, None);
            } else {
                self.names.bind_import(scope, bound, line);
            }
        }
    }

    fn finish(mut self) {
        let at = self.eof_line;
        if self.decorator.take().is_some() {
            self.issue(Issue::syntax(at, "decorator without a function or class"));
        }
        if let Some(p) = self.pending.take() {
            self.issue(Issue::syntax(at, format!("expected an indented block after '{}' statement", p.keyword)));
        }
        while let Some(level) = self.levels.pop() {
            self.close_level(level, at);
        }
        let Checker { issues, names, .. } = self;
        names.finish(issues);
    }
}
