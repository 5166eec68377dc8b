//! A forgiving Python tokenizer that groups tokens into logical lines.
//!
//! Problems the real tokenizer would reject (unbalanced brackets,
//! unterminated strings, stray characters) are reported as findings and
//! scanning continues, so later passes always see some token stream.

use super::Issue;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum TokKind {
    Name,
    Number,
    Str,
    Op,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Tok {
    pub kind: TokKind,
    pub text: String,
    pub line: usize,
    /// For `Str` tokens: true when the prefix contains `f`.
    pub fstring: bool,
    /// For `Str` tokens: the literal body without prefix and quotes.
    pub body: String,
}

impl Tok {
    pub fn is_op(&self, op: &str) -> bool {
        self.kind == TokKind::Op && self.text == op
    }

    pub fn is_name(&self, name: &str) -> bool {
        self.kind == TokKind::Name && self.text == name
    }
}

#[derive(Debug, Clone)]
pub(crate) struct LogicalLine {
    pub line: usize,
    pub indent: usize,
    pub tokens: Vec<Tok>,
}

const THREE_CHAR_OPS: [&str; 5] = ["**=", "//=", ">>=", "<<=", "..."];
const TWO_CHAR_OPS: [&str; 19] = [
    "**", "//", "==", "!=", "<=", ">=", "<<", ">>", "->", ":=", "+=", "-=", "*=", "/=", "%=", "&=", "|=",
    "^=", "@=",
];
const ONE_CHAR_OPS: &str = "+-*/%@&|^~<>()[]{},:;.=!";

fn is_string_prefix(ident: &str) -> bool {
    matches!(
        ident.to_ascii_lowercase().as_str(),
        "r" | "u" | "b" | "f" | "br" | "rb" | "fr" | "rf"
    )
}

fn closer_for(open: char) -> char {
    match open {
        '(' => ')',
        '[' => ']',
        _ => '}',
    }
}

struct Scanner<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    issues: &'a mut Vec<Issue>,
}

impl Scanner<'_> {
    fn peek(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.pos + ahead).copied()
    }

    /// Scans a string literal starting at the opening quote. Returns the body.
    fn string(&mut self, raw: bool) -> String {
        let start_line = self.line;
        let quote = self.chars[self.pos];
        let triple = self.peek(1) == Some(quote) && self.peek(2) == Some(quote);
        self.pos += if triple { 3 } else { 1 };
        let mut body = String::new();
        loop {
            let Some(c) = self.peek(0) else {
                let message = if triple {
                    "unterminated triple-quoted string literal"
                } else {
                    "unterminated string literal"
                };
                self.issues.push(Issue::syntax(start_line, message));
                return body;
            };
            if c == '\\' {
                if let Some(next) = self.peek(1) {
                    if next == '\n' {
                        self.line += 1;
                    }
                    if raw {
                        body.push(c);
                    }
                    body.push(next);
                    self.pos += 2;
                    continue;
                }
                body.push(c);
                self.pos += 1;
                continue;
            }
            if c == quote {
                if !triple {
                    self.pos += 1;
                    return body;
                }
                if self.peek(1) == Some(quote) && self.peek(2) == Some(quote) {
                    self.pos += 3;
                    return body;
                }
            }
            if c == '\n' {
                if !triple {
                    self.issues.push(Issue::syntax(start_line, "unterminated string literal"));
                    return body;
                }
                self.line += 1;
            }
            body.push(c);
            self.pos += 1;
        }
    }
}

fn indent_width(prefix: &[char]) -> usize {
    let mut col = 0;
    for c in prefix {
        match c {
            '\t' => col = (col / 8 + 1) * 8,
            '\x0c' => col = 0,
            _ => col += 1,
        }
    }
    col
}

pub(crate) fn tokenize(source: &str, issues: &mut Vec<Issue>) -> Vec<LogicalLine> {
    let mut sc = Scanner { chars: source.chars().collect(), pos: 0, line: 1, issues };
    let mut lines: Vec<LogicalLine> = Vec::new();
    let mut current: Option<LogicalLine> = None;
    let mut brackets: Vec<(char, usize)> = Vec::new();
    let mut continuation = false;
    let mut at_bol = true;

    loop {
        if at_bol && brackets.is_empty() && !continuation {
            let start = sc.pos;
            while matches!(sc.peek(0), Some(' ' | '\t' | '\x0c')) {
                sc.pos += 1;
            }
            let indent = indent_width(&sc.chars[start..sc.pos]);
            match sc.peek(0) {
                None => break,
                Some('\n') => {
                    sc.pos += 1;
                    sc.line += 1;
                    continue;
                }
                Some('#') => {
                    while !matches!(sc.peek(0), None | Some('\n')) {
                        sc.pos += 1;
                    }
                    continue;
                }
                Some(_) => {
                    current = Some(LogicalLine { line: sc.line, indent, tokens: Vec::new() });
                    at_bol = false;
                }
            }
        }
        continuation = false;

        let Some(c) = sc.peek(0) else { break };
        let line = sc.line;
        let mut push = |kind, text: String, fstring: bool, body: String| {
            if let Some(cur) = current.as_mut() {
                cur.tokens.push(Tok { kind, text, line, fstring, body });
            }
        };

        match c {
            '\n' => {
                sc.pos += 1;
                sc.line += 1;
                if brackets.is_empty() {
                    if let Some(done) = current.take() {
                        lines.push(done);
                    }
                    at_bol = true;
                }
            }
            ' ' | '\t' | '\x0c' | '\r' => sc.pos += 1,
            '#' => {
                while !matches!(sc.peek(0), None | Some('\n')) {
                    sc.pos += 1;
                }
            }
            '\\' => {
                if sc.peek(1) == Some('\n') {
                    sc.pos += 2;
                    sc.line += 1;
                    continuation = true;
                } else {
                    sc.issues.push(Issue::syntax(line, "unexpected character after line continuation character"));
                    sc.pos += 1;
                }
            }
            '\'' | '"' => {
                let body = sc.string(false);
                push(TokKind::Str, String::new(), false, body);
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = sc.pos;
                while sc.peek(0).is_some_and(|c| c.is_alphanumeric() || c == '_') {
                    sc.pos += 1;
                }
                let ident: String = sc.chars[start..sc.pos].iter().collect();
                if matches!(sc.peek(0), Some('\'' | '"')) && is_string_prefix(&ident) {
                    let lower = ident.to_ascii_lowercase();
                    let body = sc.string(lower.contains('r'));
                    push(TokKind::Str, ident, lower.contains('f'), body);
                } else {
                    push(TokKind::Name, ident, false, String::new());
                }
            }
            c if c.is_ascii_digit() || (c == '.' && sc.peek(1).is_some_and(|n| n.is_ascii_digit())) => {
                let start = sc.pos;
                let hex = c == '0' && matches!(sc.peek(1), Some('x' | 'X'));
                while let Some(n) = sc.peek(0) {
                    if n.is_ascii_alphanumeric() || n == '_' || n == '.' {
                        sc.pos += 1;
                        if !hex && matches!(n, 'e' | 'E') && matches!(sc.peek(0), Some('+' | '-')) {
                            sc.pos += 1;
                        }
                    } else {
                        break;
                    }
                }
                let text: String = sc.chars[start..sc.pos].iter().collect();
                push(TokKind::Number, text, false, String::new());
            }
            _ => {
                let rest: String = sc.chars[sc.pos..(sc.pos + 3).min(sc.chars.len())].iter().collect();
                let op = THREE_CHAR_OPS
                    .iter()
                    .chain(TWO_CHAR_OPS.iter())
                    .find(|op| rest.starts_with(**op))
                    .map(|op| op.to_string())
                    .or_else(|| ONE_CHAR_OPS.contains(c).then(|| c.to_string()));
                let Some(op) = op else {
                    sc.issues.push(Issue::syntax(line, format!("invalid character '{c}'")));
                    sc.pos += 1;
                    continue;
                };
                sc.pos += op.chars().count();
                match c {
                    '(' | '[' | '{' => brackets.push((c, line)),
                    ')' | ']' | '}' => match brackets.last() {
                        None => {
                            sc.issues.push(Issue::syntax(line, format!("unmatched '{c}'")));
                            continue;
                        }
                        Some(&(open, _)) if closer_for(open) != c => {
                            sc.issues.push(Issue::syntax(
                                line,
                                format!("closing parenthesis '{c}' does not match opening parenthesis '{open}'"),
                            ));
                            brackets.pop();
                        }
                        Some(_) => {
                            brackets.pop();
                        }
                    },
                    _ => {}
                }
                push(TokKind::Op, op, false, String::new());
            }
        }
    }

    for (open, line) in &brackets {
        sc.issues.push(Issue::syntax(*line, format!("'{open}' was never closed")));
    }
    if let Some(done) = current.take() {
        lines.push(done);
    }
    lines
}
