//! Tokenizer for the Python subset handled by the engine.
//!
//! Produces logical-line tokens with `Indent`/`Dedent` markers the way the
//! reference tokenizer does. Comments are discarded; string literals are kept
//! verbatim (prefix and quotes included) so the emitter can reproduce them.

use super::SyntaxError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokKind {
    Name,
    Number,
    Str,
    Op,
    Newline,
    Indent,
    Dedent,
    EndMarker,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokKind,
    pub text: String,
    pub line: u32,
    pub col: u32,
    pub start: usize,
    pub end: usize,
}

impl Token {
    pub fn is_op(&self, op: &str) -> bool {
        self.kind == TokKind::Op && self.text == op
    }

    pub fn is_name(&self, name: &str) -> bool {
        self.kind == TokKind::Name && self.text == name
    }

    /// Tokens that carry source content (everything but layout markers).
    pub fn is_significant(&self) -> bool {
        matches!(
            self.kind,
            TokKind::Name | TokKind::Number | TokKind::Str | TokKind::Op
        )
    }
}

const OPERATORS: &[&str] = &[
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//", "<<", ">>", "<=", ">=", "==", "!=",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "@=", "+", "-", "*", "/", "%", "@", "&", "|",
    "^", "~", "<", ">", "(", ")", "[", "]", "{", "}", ",", ":", ".", ";", "=",
];

pub fn tokenize(source: &str) -> Result<Vec<Token>, SyntaxError> {
    Lexer::new(source).run()
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    line: u32,
    line_start: usize,
    depth: usize,
    indents: Vec<usize>,
    tokens: Vec<Token>,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            bytes: src.as_bytes(),
            pos: 0,
            line: 1,
            line_start: 0,
            depth: 0,
            indents: vec![0],
            tokens: Vec::new(),
        }
    }

    fn err(&self, message: impl Into<String>) -> SyntaxError {
        SyntaxError {
            line: self.line,
            col: (self.pos - self.line_start) as u32 + 1,
            message: message.into(),
        }
    }

    fn push(&mut self, kind: TokKind, start: usize, end: usize, line: u32, col: u32) {
        self.tokens.push(Token {
            kind,
            text: self.src[start..end].to_string(),
            line,
            col,
            start,
            end,
        });
    }

    fn marker(&mut self, kind: TokKind) {
        let col = (self.pos - self.line_start) as u32 + 1;
        self.tokens.push(Token {
            kind,
            text: String::new(),
            line: self.line,
            col,
            start: self.pos,
            end: self.pos,
        });
    }

    fn peek(&self, off: usize) -> Option<u8> {
        self.bytes.get(self.pos + off).copied()
    }

    fn newline(&mut self) {
        self.line += 1;
        self.line_start = self.pos;
    }

    fn run(mut self) -> Result<Vec<Token>, SyntaxError> {
        let mut at_line_start = true;
        while self.pos < self.bytes.len() {
            if at_line_start && self.depth == 0 {
                if self.handle_indentation()? {
                    continue;
                }
                at_line_start = false;
            }
            let c = self.bytes[self.pos];
            match c {
                b' ' | b'\t' | b'\x0c' => self.pos += 1,
                b'\r' => self.pos += 1,
                b'\n' => {
                    if self.depth == 0 {
                        let line = self.line;
                        let col = (self.pos - self.line_start) as u32 + 1;
                        self.push(TokKind::Newline, self.pos, self.pos + 1, line, col);
                        at_line_start = true;
                    }
                    self.pos += 1;
                    self.newline();
                }
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b'\\' => {
                    // explicit line joining
                    let mut p = self.pos + 1;
                    while p < self.bytes.len() && (self.bytes[p] == b' ' || self.bytes[p] == b'\r') {
                        p += 1;
                    }
                    if p < self.bytes.len() && self.bytes[p] == b'\n' {
                        self.pos = p + 1;
                        self.newline();
                    } else {
                        return Err(self.err("unexpected character after line continuation"));
                    }
                }
                b'0'..=b'9' => self.number()?,
                b'.' if matches!(self.peek(1), Some(b'0'..=b'9')) => self.number()?,
                b'"' | b'\'' => self.string(self.pos)?,
                _ if is_ident_start(c) => {
                    if let Some(quote_at) = self.string_prefix() {
                        let start = self.pos;
                        self.pos = quote_at;
                        self.string(start)?;
                    } else {
                        self.ident();
                    }
                }
                _ => self.operator()?,
            }
        }
        if self.depth > 0 {
            return Err(self.err("unexpected end of input inside brackets"));
        }
        let needs_newline = self
            .tokens
            .last()
            .map(|t| !matches!(t.kind, TokKind::Newline | TokKind::Dedent | TokKind::Indent))
            .unwrap_or(false);
        if needs_newline {
            self.marker(TokKind::Newline);
        }
        while self.indents.len() > 1 {
            self.indents.pop();
            self.marker(TokKind::Dedent);
        }
        self.marker(TokKind::EndMarker);
        Ok(self.tokens)
    }

    /// Measures indentation at the start of a physical line. Returns true when
    /// the line is blank or comment-only (no indentation tokens emitted).
    fn handle_indentation(&mut self) -> Result<bool, SyntaxError> {
        let mut width = 0usize;
        let mut p = self.pos;
        while p < self.bytes.len() {
            match self.bytes[p] {
                b' ' => width += 1,
                b'\t' => width = (width / 8 + 1) * 8,
                b'\x0c' => width = 0,
                _ => break,
            }
            p += 1;
        }
        let rest = self.bytes.get(p).copied();
        if matches!(rest, None | Some(b'\n') | Some(b'#') | Some(b'\r')) {
            // blank line: skip to the newline without emitting NEWLINE
            self.pos = p;
            while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() {
                self.pos += 1;
                self.newline();
            }
            return Ok(true);
        }
        self.pos = p;
        let current = *self.indents.last().unwrap();
        if width > current {
            self.indents.push(width);
            self.marker(TokKind::Indent);
        } else {
            while width < *self.indents.last().unwrap() {
                self.indents.pop();
                self.marker(TokKind::Dedent);
            }
            if width != *self.indents.last().unwrap() {
                return Err(self.err("unindent does not match any outer indentation level"));
            }
        }
        Ok(false)
    }

    fn string_prefix(&self) -> Option<usize> {
        let mut p = self.pos;
        while p < self.bytes.len() && p - self.pos < 3 && matches!(self.bytes[p], b'r' | b'R' | b'b' | b'B' | b'u' | b'U' | b'f' | b'F') {
            p += 1;
        }
        if p > self.pos && p < self.bytes.len() && matches!(self.bytes[p], b'"' | b'\'') {
            Some(p)
        } else {
            None
        }
    }

    fn ident(&mut self) {
        let start = self.pos;
        let col = (start - self.line_start) as u32 + 1;
        while self.pos < self.bytes.len() && is_ident_continue(self.bytes[self.pos]) {
            self.pos += 1;
        }
        self.push(TokKind::Name, start, self.pos, self.line, col);
    }

    fn number(&mut self) -> Result<(), SyntaxError> {
        let start = self.pos;
        let col = (start - self.line_start) as u32 + 1;
        let b = self.bytes;
        if b[self.pos] == b'0' && matches!(self.peek(1), Some(b'x' | b'X' | b'o' | b'O' | b'b' | b'B')) {
            self.pos += 2;
            while self.pos < b.len() && (b[self.pos].is_ascii_hexdigit() || b[self.pos] == b'_') {
                self.pos += 1;
            }
        } else {
            while self.pos < b.len() && (b[self.pos].is_ascii_digit() || b[self.pos] == b'_') {
                self.pos += 1;
            }
            if self.pos < b.len() && b[self.pos] == b'.' {
                self.pos += 1;
                while self.pos < b.len() && (b[self.pos].is_ascii_digit() || b[self.pos] == b'_') {
                    self.pos += 1;
                }
            }
            if self.pos < b.len() && matches!(b[self.pos], b'e' | b'E') {
                let save = self.pos;
                self.pos += 1;
                if self.pos < b.len() && matches!(b[self.pos], b'+' | b'-') {
                    self.pos += 1;
                }
                if self.pos < b.len() && b[self.pos].is_ascii_digit() {
                    while self.pos < b.len() && (b[self.pos].is_ascii_digit() || b[self.pos] == b'_') {
                        self.pos += 1;
                    }
                } else {
                    self.pos = save;
                }
            }
            if self.pos < b.len() && matches!(b[self.pos], b'j' | b'J') {
                self.pos += 1;
            }
        }
        if self.pos < b.len() && is_ident_start(b[self.pos]) {
            return Err(self.err("invalid numeric literal"));
        }
        self.push(TokKind::Number, start, self.pos, self.line, col);
        Ok(())
    }

    fn string(&mut self, start: usize) -> Result<(), SyntaxError> {
        let line = self.line;
        let col = (start - self.line_start) as u32 + 1;
        let b = self.bytes;
        let quote = b[self.pos];
        let triple = self.peek(1) == Some(quote) && self.peek(2) == Some(quote);
        self.pos += if triple { 3 } else { 1 };
        loop {
            if self.pos >= b.len() {
                return Err(SyntaxError {
                    line,
                    col,
                    message: "unterminated string literal".into(),
                });
            }
            let c = b[self.pos];
            if c == b'\\' {
                self.pos += 1;
                if self.pos < b.len() && b[self.pos] == b'\n' {
                    self.pos += 1;
                    self.newline();
                } else {
                    self.pos += 1;
                }
                continue;
            }
            if c == b'\n' {
                if !triple {
                    return Err(SyntaxError {
                        line,
                        col,
                        message: "unterminated string literal".into(),
                    });
                }
                self.pos += 1;
                self.newline();
                continue;
            }
            if c == quote {
                if triple {
                    if self.peek(1) == Some(quote) && self.peek(2) == Some(quote) {
                        self.pos += 3;
                        break;
                    }
                } else {
                    self.pos += 1;
                    break;
                }
            }
            self.pos += 1;
        }
        self.push(TokKind::Str, start, self.pos, line, col);
        Ok(())
    }

    fn operator(&mut self) -> Result<(), SyntaxError> {
        let rest = &self.src[self.pos..];
        let col = (self.pos - self.line_start) as u32 + 1;
        for op in OPERATORS {
            if rest.starts_with(op) {
                match *op {
                    "(" | "[" | "{" => self.depth += 1,
                    ")" | "]" | "}" => {
                        if self.depth == 0 {
                            return Err(self.err(format!("unmatched '{op}'")));
                        }
                        self.depth -= 1
                    }
                    _ => {}
                }
                let start = self.pos;
                self.pos += op.len();
                self.push(TokKind::Op, start, self.pos, self.line, col);
                return Ok(());
            }
        }
        if rest.starts_with('!') {
            // `!` only appears inside f-string replacement fields
            self.pos += 1;
            self.push(TokKind::Op, self.pos - 1, self.pos, self.line, col);
            return Ok(());
        }
        let ch = rest.chars().next().unwrap();
        Err(self.err(format!("invalid character {ch:?}")))
    }
}

fn is_ident_start(c: u8) -> bool {
    c == b'_' || c.is_ascii_alphabetic() || c >= 0x80
}

fn is_ident_continue(c: u8) -> bool {
    is_ident_start(c) || c.is_ascii_digit()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokKind, String)> {
        tokenize(src)
            .unwrap()
            .into_iter()
            .map(|t| (t.kind, t.text))
            .collect()
    }

    #[test]
    fn indentation_markers() {
        let toks = kinds("def f():\n    return 0\n");
        let k: Vec<TokKind> = toks.iter().map(|t| t.0).collect();
        assert_eq!(
            k,
            vec![
                TokKind::Name,
                TokKind::Name,
                TokKind::Op,
                TokKind::Op,
                TokKind::Op,
                TokKind::Newline,
                TokKind::Indent,
                TokKind::Name,
                TokKind::Number,
                TokKind::Newline,
                TokKind::Dedent,
                TokKind::EndMarker
            ]
        );
    }

    #[test]
    fn strings_with_prefixes_and_triples() {
        let toks = kinds("x = rb'a\\'b' + f\"{y}\" + '''a\nb'''\n");
        let strs: Vec<&str> = toks
            .iter()
            .filter(|t| t.0 == TokKind::Str)
            .map(|t| t.1.as_str())
            .collect();
        assert_eq!(strs, vec!["rb'a\\'b'", "f\"{y}\"", "'''a\nb'''"]);
    }

    #[test]
    fn brackets_join_lines_and_comments_dropped() {
        let toks = kinds("x = (1,\n     2)  # c\n");
        assert_eq!(
            toks.iter().filter(|t| t.0 == TokKind::Newline).count(),
            1
        );
        assert!(!toks.iter().any(|t| t.1.contains('#')));
    }

    #[test]
    fn numbers() {
        let toks = kinds("a = 0x1F + 1_000 + 1.5e-3 + .5 + 3j\n");
        let nums: Vec<&str> = toks
            .iter()
            .filter(|t| t.0 == TokKind::Number)
            .map(|t| t.1.as_str())
            .collect();
        assert_eq!(nums, vec!["0x1F", "1_000", "1.5e-3", ".5", "3j"]);
    }

    #[test]
    fn bad_dedent_is_error() {
        assert!(tokenize("if x:\n        y = 1\n    z = 2\n").is_err());
    }

    #[test]
    fn unterminated_string_is_error() {
        let err = tokenize("x = 'abc\n").unwrap_err();
        assert_eq!(err.line, 1);
    }
}
