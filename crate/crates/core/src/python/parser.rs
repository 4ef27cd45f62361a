//! Recursive-descent parser producing [`Module`] trees.

use super::ast::*;
use super::lexer::{tokenize, TokKind, Token};
use super::SyntaxError;

pub fn parse_module(source: &str) -> Result<Module, SyntaxError> {
    let tokens = tokenize(source)?;
    let mut p = Parser {
        src: source,
        toks: tokens,
        pos: 0,
    };
    let body = p.file()?;
    Ok(Module { body })
}

/// Parses a single expression (used for f-string replacement fields and
/// operator templates).
pub fn parse_expression(source: &str) -> Result<Expr, SyntaxError> {
    let tokens = tokenize(source.trim())?;
    let mut p = Parser {
        src: source,
        toks: tokens,
        pos: 0,
    };
    let e = p.testlist_star()?;
    while p.peek().kind == TokKind::Newline {
        p.pos += 1;
    }
    if p.peek().kind != TokKind::EndMarker {
        return Err(p.error("unexpected trailing tokens in expression"));
    }
    Ok(e)
}

const KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue",
    "def", "del", "elif", "else", "except", "finally", "for", "from", "global", "if", "import",
    "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try", "while",
    "with", "yield",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, SyntaxError>;

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn peek_at(&self, off: usize) -> &Token {
        &self.toks[(self.pos + off).min(self.toks.len() - 1)]
    }

    fn next(&mut self) -> Token {
        let t = self.peek().clone();
        if self.pos < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> SyntaxError {
        let t = self.peek();
        SyntaxError {
            line: t.line,
            col: t.col,
            message: message.into(),
        }
    }

    fn at_op(&self, op: &str) -> bool {
        self.peek().is_op(op)
    }

    fn at_kw(&self, kw: &str) -> bool {
        self.peek().is_name(kw)
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.at_op(op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: &str) -> PResult<()> {
        if self.eat_op(op) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{op}', found '{}'", self.peek().text)))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{kw}', found '{}'", self.peek().text)))
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        let t = self.peek();
        if t.kind == TokKind::Name && !is_keyword(&t.text) {
            let t = self.next();
            Ok(Ident::new(t.text))
        } else {
            Err(self.error(format!("expected identifier, found '{}'", t.text)))
        }
    }

    fn file(&mut self) -> PResult<Vec<Stmt>> {
        let mut body = Vec::new();
        loop {
            match self.peek().kind {
                TokKind::EndMarker => break,
                TokKind::Newline => {
                    self.pos += 1;
                }
                TokKind::Indent => return Err(self.error("unexpected indent")),
                _ => body.extend(self.statement()?),
            }
        }
        Ok(body)
    }

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        if self.peek().kind == TokKind::Newline {
            self.pos += 1;
            if self.peek().kind != TokKind::Indent {
                return Err(self.error("expected an indented block"));
            }
            self.pos += 1;
            let mut body = Vec::new();
            while !matches!(self.peek().kind, TokKind::Dedent | TokKind::EndMarker) {
                if self.peek().kind == TokKind::Newline {
                    self.pos += 1;
                    continue;
                }
                body.extend(self.statement()?);
            }
            if self.peek().kind == TokKind::Dedent {
                self.pos += 1;
            }
            Ok(body)
        } else {
            self.simple_statements()
        }
    }

    fn statement(&mut self) -> PResult<Vec<Stmt>> {
        let t = self.peek().clone();
        if t.kind == TokKind::Name {
            let compound = match t.text.as_str() {
                "def" | "class" | "if" | "while" | "for" | "try" | "with" => true,
                "async" => matches!(self.peek_at(1).text.as_str(), "def" | "for" | "with"),
                "match" => self.looks_like_match(),
                _ => false,
            };
            if compound {
                return Ok(vec![self.compound()?]);
            }
        }
        if t.is_op("@") {
            return Ok(vec![self.compound()?]);
        }
        self.simple_statements()
    }

    fn looks_like_match(&self) -> bool {
        let next = self.peek_at(1);
        if next.kind == TokKind::Newline
            || (next.kind == TokKind::Op && !matches!(next.text.as_str(), "(" | "[" | "{" | "-" | "*"))
        {
            return false;
        }
        // a match statement header ends with ':' followed by an indented block
        let mut i = self.pos;
        while i < self.toks.len() && self.toks[i].kind != TokKind::Newline {
            i += 1;
        }
        i > 0
            && self.toks[i - 1].is_op(":")
            && self.toks.get(i + 1).map(|t| t.kind) == Some(TokKind::Indent)
    }

    fn opaque_block(&mut self) -> PResult<Stmt> {
        let first = self.peek().clone();
        let mut depth = 0i32;
        let mut end = first.end;
        loop {
            let t = self.next();
            match t.kind {
                TokKind::EndMarker => break,
                TokKind::Indent => depth += 1,
                TokKind::Dedent => {
                    depth -= 1;
                    if depth <= 0 {
                        break;
                    }
                }
                TokKind::Newline => {
                    end = t.start;
                    if depth == 0 && !self.toks[self.pos - 2].is_op(":") {
                        break;
                    }
                }
                _ => end = t.end,
            }
        }
        let raw = &self.src[first.start..end];
        let strip = (first.col - 1) as usize;
        let text = raw
            .lines()
            .enumerate()
            .map(|(i, l)| {
                if i == 0 {
                    l.to_string()
                } else {
                    let lead = l.len() - l.trim_start_matches(' ').len();
                    l[lead.min(strip)..].to_string()
                }
            })
            .collect::<Vec<_>>()
            .join("\n");
        Ok(Stmt {
            kind: StmtKind::Opaque(text),
            lineage: None,
            line: first.line,
        })
    }

    fn compound(&mut self) -> PResult<Stmt> {
        let line = self.peek().line;
        let kind = if self.at_op("@") {
            let mut decorators = Vec::new();
            while self.eat_op("@") {
                decorators.push(self.named_expr()?);
                self.expect_newline()?;
            }
            let mut s = self.compound()?;
            match &mut s.kind {
                StmtKind::FunctionDef(f) => f.decorators = decorators,
                StmtKind::ClassDef(c) => c.decorators = decorators,
                _ => return Err(self.error("decorator must precede def or class")),
            }
            s.line = line;
            return Ok(s);
        } else if self.at_kw("match") {
            return self.opaque_block();
        } else if self.eat_kw("async") {
            match self.peek().text.as_str() {
                "def" => self.funcdef(true)?,
                "for" => self.for_stmt(true)?,
                "with" => self.with_stmt(true)?,
                _ => return Err(self.error("unexpected token after async")),
            }
        } else {
            match self.peek().text.as_str() {
                "def" => self.funcdef(false)?,
                "class" => self.classdef()?,
                "if" => self.if_stmt()?,
                "while" => self.while_stmt()?,
                "for" => self.for_stmt(false)?,
                "try" => self.try_stmt()?,
                "with" => self.with_stmt(false)?,
                _ => return Err(self.error("expected compound statement")),
            }
        };
        Ok(Stmt {
            kind,
            lineage: None,
            line,
        })
    }

    fn funcdef(&mut self, is_async: bool) -> PResult<StmtKind> {
        self.expect_kw("def")?;
        let name = self.ident()?;
        self.expect_op("(")?;
        let params = self.params(")", true)?;
        self.expect_op(")")?;
        let returns = if self.eat_op("->") {
            Some(self.test()?)
        } else {
            None
        };
        self.expect_op(":")?;
        let body = self.block()?;
        Ok(StmtKind::FunctionDef(FunctionDef {
            name,
            params,
            body,
            decorators: Vec::new(),
            returns,
            is_async,
        }))
    }

    fn params(&mut self, close: &str, annotations: bool) -> PResult<Params> {
        let mut params = Params::default();
        let mut seen_star = false;
        while !self.at_op(close) {
            if self.eat_op("/") {
                params.posonly = std::mem::take(&mut params.args);
            } else if self.eat_op("**") {
                params.kwarg = Some(self.param(annotations, false)?);
            } else if self.eat_op("*") {
                seen_star = true;
                if !self.at_op(",") && !self.at_op(close) {
                    params.vararg = Some(self.param(annotations, false)?);
                }
            } else {
                let p = self.param(annotations, true)?;
                if seen_star {
                    params.kwonly.push(p);
                } else {
                    params.args.push(p);
                }
            }
            if !self.eat_op(",") {
                break;
            }
        }
        Ok(params)
    }

    fn param(&mut self, annotations: bool, defaults: bool) -> PResult<Param> {
        let name = self.ident()?;
        let annotation = if annotations && self.eat_op(":") {
            Some(self.test()?)
        } else {
            None
        };
        let default = if defaults && self.eat_op("=") {
            Some(self.test()?)
        } else {
            None
        };
        Ok(Param {
            name,
            annotation,
            default,
        })
    }

    fn classdef(&mut self) -> PResult<StmtKind> {
        self.expect_kw("class")?;
        let name = self.ident()?;
        let bases = if self.eat_op("(") {
            let a = self.call_args()?;
            self.expect_op(")")?;
            a
        } else {
            Vec::new()
        };
        self.expect_op(":")?;
        let body = self.block()?;
        Ok(StmtKind::ClassDef(ClassDef {
            name,
            bases,
            body,
            decorators: Vec::new(),
        }))
    }

    fn if_stmt(&mut self) -> PResult<StmtKind> {
        // called with `if` or `elif` as current token
        self.pos += 1;
        let test = self.named_expr()?;
        self.expect_op(":")?;
        let body = self.block()?;
        let orelse = if self.at_kw("elif") {
            let line = self.peek().line;
            let kind = self.if_stmt()?;
            vec![Stmt {
                kind,
                lineage: None,
                line,
            }]
        } else if self.eat_kw("else") {
            self.expect_op(":")?;
            self.block()?
        } else {
            Vec::new()
        };
        Ok(StmtKind::If { test, body, orelse })
    }

    fn while_stmt(&mut self) -> PResult<StmtKind> {
        self.expect_kw("while")?;
        let test = self.named_expr()?;
        self.expect_op(":")?;
        let body = self.block()?;
        let orelse = self.else_block()?;
        Ok(StmtKind::While { test, body, orelse })
    }

    fn else_block(&mut self) -> PResult<Vec<Stmt>> {
        if self.eat_kw("else") {
            self.expect_op(":")?;
            self.block()
        } else {
            Ok(Vec::new())
        }
    }

    fn for_stmt(&mut self, is_async: bool) -> PResult<StmtKind> {
        self.expect_kw("for")?;
        let target = self.target_list()?;
        self.expect_kw("in")?;
        let iter = self.testlist_star()?;
        self.expect_op(":")?;
        let body = self.block()?;
        let orelse = self.else_block()?;
        Ok(StmtKind::For {
            target,
            iter,
            body,
            orelse,
            is_async,
        })
    }

    fn try_stmt(&mut self) -> PResult<StmtKind> {
        self.expect_kw("try")?;
        self.expect_op(":")?;
        let body = self.block()?;
        let mut handlers = Vec::new();
        while self.at_kw("except") {
            let line = self.peek().line;
            self.pos += 1;
            let (kind, name) = if self.at_op(":") {
                (None, None)
            } else {
                let k = self.test()?;
                let k = if self.at_op(",") {
                    let mut items = vec![k];
                    while self.eat_op(",") {
                        items.push(self.test()?);
                    }
                    Expr::Tuple(items)
                } else {
                    k
                };
                let n = if self.eat_kw("as") {
                    Some(self.ident()?)
                } else {
                    None
                };
                (Some(k), n)
            };
            self.expect_op(":")?;
            let body = self.block()?;
            handlers.push(ExceptHandler {
                kind,
                name,
                body,
                line,
            });
        }
        let orelse = self.else_block()?;
        let finalbody = if self.eat_kw("finally") {
            self.expect_op(":")?;
            self.block()?
        } else {
            Vec::new()
        };
        if handlers.is_empty() && finalbody.is_empty() {
            return Err(self.error("try statement needs except or finally"));
        }
        Ok(StmtKind::Try {
            body,
            handlers,
            orelse,
            finalbody,
        })
    }

    fn with_stmt(&mut self, is_async: bool) -> PResult<StmtKind> {
        self.expect_kw("with")?;
        let mut items = Vec::new();
        loop {
            let context = self.test()?;
            let target = if self.eat_kw("as") {
                Some(self.target()?)
            } else {
                None
            };
            items.push(WithItem { context, target });
            if !self.eat_op(",") {
                break;
            }
        }
        self.expect_op(":")?;
        let body = self.block()?;
        Ok(StmtKind::With {
            items,
            body,
            is_async,
        })
    }

    fn expect_newline(&mut self) -> PResult<()> {
        match self.peek().kind {
            TokKind::Newline => {
                self.pos += 1;
                Ok(())
            }
            TokKind::EndMarker => Ok(()),
            _ => Err(self.error(format!("expected newline, found '{}'", self.peek().text))),
        }
    }

    fn simple_statements(&mut self) -> PResult<Vec<Stmt>> {
        let mut out = Vec::new();
        loop {
            let line = self.peek().line;
            let kind = self.simple_statement()?;
            out.push(Stmt {
                kind,
                lineage: None,
                line,
            });
            if self.eat_op(";") {
                if matches!(self.peek().kind, TokKind::Newline | TokKind::EndMarker) {
                    break;
                }
                continue;
            }
            break;
        }
        self.expect_newline()?;
        Ok(out)
    }

    fn simple_statement(&mut self) -> PResult<StmtKind> {
        let t = self.peek().clone();
        if t.kind == TokKind::Name {
            match t.text.as_str() {
                "pass" => {
                    self.pos += 1;
                    return Ok(StmtKind::Pass);
                }
                "break" => {
                    self.pos += 1;
                    return Ok(StmtKind::Break);
                }
                "continue" => {
                    self.pos += 1;
                    return Ok(StmtKind::Continue);
                }
                "return" => {
                    self.pos += 1;
                    let v = if self.at_end_of_simple() {
                        None
                    } else {
                        Some(self.testlist_star()?)
                    };
                    return Ok(StmtKind::Return(v));
                }
                "raise" => {
                    self.pos += 1;
                    if self.at_end_of_simple() {
                        return Ok(StmtKind::Raise {
                            exc: None,
                            cause: None,
                        });
                    }
                    let exc = self.test()?;
                    let cause = if self.eat_kw("from") {
                        Some(self.test()?)
                    } else {
                        None
                    };
                    return Ok(StmtKind::Raise {
                        exc: Some(exc),
                        cause,
                    });
                }
                "global" | "nonlocal" => {
                    self.pos += 1;
                    let mut names = vec![self.ident()?];
                    while self.eat_op(",") {
                        names.push(self.ident()?);
                    }
                    return Ok(if t.text == "global" {
                        StmtKind::Global(names)
                    } else {
                        StmtKind::Nonlocal(names)
                    });
                }
                "del" => {
                    self.pos += 1;
                    let mut targets = vec![self.target()?];
                    while self.eat_op(",") {
                        if self.at_end_of_simple() {
                            break;
                        }
                        targets.push(self.target()?);
                    }
                    return Ok(StmtKind::Delete(targets));
                }
                "assert" => {
                    self.pos += 1;
                    let test = self.test()?;
                    let msg = if self.eat_op(",") {
                        Some(self.test()?)
                    } else {
                        None
                    };
                    return Ok(StmtKind::Assert { test, msg });
                }
                "import" => {
                    self.pos += 1;
                    let mut names = Vec::new();
                    loop {
                        let name = self.dotted_name()?;
                        let asname = if self.eat_kw("as") {
                            Some(self.ident()?.name)
                        } else {
                            None
                        };
                        names.push(Alias::new(&name, asname.as_deref()));
                        if !self.eat_op(",") {
                            break;
                        }
                    }
                    return Ok(StmtKind::Import(names));
                }
                "from" => return self.import_from(),
                _ => {}
            }
        }
        self.expr_statement()
    }

    fn at_end_of_simple(&self) -> bool {
        matches!(self.peek().kind, TokKind::Newline | TokKind::EndMarker) || self.at_op(";")
    }

    fn dotted_name(&mut self) -> PResult<String> {
        let mut name = self.ident()?.name;
        while self.eat_op(".") {
            name.push('.');
            name.push_str(&self.ident()?.name);
        }
        Ok(name)
    }

    fn import_from(&mut self) -> PResult<StmtKind> {
        self.expect_kw("from")?;
        let mut level = 0;
        loop {
            if self.eat_op(".") {
                level += 1;
            } else if self.eat_op("...") {
                level += 3;
            } else {
                break;
            }
        }
        let module = if self.at_kw("import") {
            None
        } else {
            Some(self.dotted_name()?)
        };
        self.expect_kw("import")?;
        let mut names = Vec::new();
        if self.eat_op("*") {
            names.push(Alias::new("*", None));
        } else {
            let paren = self.eat_op("(");
            loop {
                if paren && self.at_op(")") {
                    break;
                }
                let name = self.ident()?.name;
                let asname = if self.eat_kw("as") {
                    Some(self.ident()?.name)
                } else {
                    None
                };
                names.push(Alias::new(&name, asname.as_deref()));
                if !self.eat_op(",") {
                    break;
                }
            }
            if paren {
                self.expect_op(")")?;
            }
        }
        Ok(StmtKind::ImportFrom {
            module,
            names,
            level,
        })
    }

    fn expr_statement(&mut self) -> PResult<StmtKind> {
        let first = if self.at_kw("yield") {
            self.yield_expr()?
        } else {
            self.testlist_star()?
        };
        if self.at_op(":") {
            self.pos += 1;
            let annotation = self.test()?;
            let value = if self.eat_op("=") {
                Some(if self.at_kw("yield") {
                    self.yield_expr()?
                } else {
                    self.testlist_star()?
                })
            } else {
                None
            };
            return Ok(StmtKind::AnnAssign {
                target: first,
                annotation,
                value,
            });
        }
        let t = self.peek().clone();
        if t.kind == TokKind::Op && t.text.len() >= 2 && t.text.ends_with('=') {
            if let Some(op) = BinOp::from_symbol(&t.text[..t.text.len() - 1]) {
                if !matches!(t.text.as_str(), "==" | "<=" | ">=" | "!=") {
                    self.pos += 1;
                    let value = if self.at_kw("yield") {
                        self.yield_expr()?
                    } else {
                        self.testlist_star()?
                    };
                    return Ok(StmtKind::AugAssign {
                        target: first,
                        op,
                        value,
                    });
                }
            }
        }
        if self.at_op("=") {
            let mut items = vec![first];
            while self.eat_op("=") {
                items.push(if self.at_kw("yield") {
                    self.yield_expr()?
                } else {
                    self.testlist_star()?
                });
            }
            let value = items.pop().unwrap();
            return Ok(StmtKind::Assign {
                targets: items,
                value,
            });
        }
        Ok(StmtKind::Expr(first))
    }

    fn yield_expr(&mut self) -> PResult<Expr> {
        self.expect_kw("yield")?;
        if self.eat_kw("from") {
            return Ok(Expr::YieldFrom(Box::new(self.test()?)));
        }
        if self.at_end_of_simple() || self.at_op(")") || self.at_op("=") {
            return Ok(Expr::Yield(None));
        }
        Ok(Expr::Yield(Some(Box::new(self.testlist_star()?))))
    }

    /// Comma-separated expressions (with optional starred items); a single
    /// item without a trailing comma is returned bare.
    fn testlist_star(&mut self) -> PResult<Expr> {
        let first = self.star_or_named()?;
        if !self.at_op(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.at_expr_end() {
                break;
            }
            items.push(self.star_or_named()?);
        }
        Ok(Expr::Tuple(items))
    }

    fn at_expr_end(&self) -> bool {
        let t = self.peek();
        match t.kind {
            TokKind::Newline | TokKind::EndMarker | TokKind::Indent | TokKind::Dedent => true,
            TokKind::Op => matches!(
                t.text.as_str(),
                ")" | "]" | "}" | "=" | ":" | ";" | "+=" | "-=" | "*=" | "/=" | "//=" | "%="
                    | "**=" | ">>=" | "<<=" | "&=" | "|=" | "^=" | "@="
            ),
            TokKind::Name => t.text == "in",
            _ => false,
        }
    }

    fn star_or_named(&mut self) -> PResult<Expr> {
        if self.eat_op("*") {
            Ok(Expr::Starred(Box::new(self.bitor()?)))
        } else {
            self.named_expr()
        }
    }

    fn target_list(&mut self) -> PResult<Expr> {
        let first = self.target()?;
        if !self.at_op(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.at_kw("in") || self.at_op("=") {
                break;
            }
            items.push(self.target()?);
        }
        Ok(Expr::Tuple(items))
    }

    fn target(&mut self) -> PResult<Expr> {
        if self.eat_op("*") {
            return Ok(Expr::Starred(Box::new(self.bitor()?)));
        }
        self.bitor()
    }

    fn named_expr(&mut self) -> PResult<Expr> {
        if self.peek().kind == TokKind::Name
            && !is_keyword(&self.peek().text)
            && self.peek_at(1).is_op(":=")
        {
            let target = self.ident()?;
            self.pos += 1;
            let value = self.test()?;
            return Ok(Expr::NamedExpr {
                target,
                value: Box::new(value),
            });
        }
        self.test()
    }

    fn test(&mut self) -> PResult<Expr> {
        if self.at_kw("lambda") {
            return self.lambda();
        }
        let e = self.or_test()?;
        if self.at_kw("if") {
            // conditional expression; `if` inside comprehensions is handled by
            // the comprehension parser before reaching here
            let save = self.pos;
            self.pos += 1;
            let test = self.or_test()?;
            if !self.eat_kw("else") {
                self.pos = save;
                return Ok(e);
            }
            let orelse = self.test()?;
            return Ok(Expr::IfExp {
                test: Box::new(test),
                body: Box::new(e),
                orelse: Box::new(orelse),
            });
        }
        Ok(e)
    }

    fn test_nocond(&mut self) -> PResult<Expr> {
        if self.at_kw("lambda") {
            return self.lambda();
        }
        self.or_test()
    }

    fn lambda(&mut self) -> PResult<Expr> {
        self.expect_kw("lambda")?;
        let params = self.params(":", false)?;
        self.expect_op(":")?;
        let body = self.test()?;
        Ok(Expr::Lambda {
            params: Box::new(params),
            body: Box::new(body),
        })
    }

    fn or_test(&mut self) -> PResult<Expr> {
        let first = self.and_test()?;
        if !self.at_kw("or") {
            return Ok(first);
        }
        let mut values = vec![first];
        while self.eat_kw("or") {
            values.push(self.and_test()?);
        }
        Ok(Expr::BoolOp {
            op: BoolOp::Or,
            values,
        })
    }

    fn and_test(&mut self) -> PResult<Expr> {
        let first = self.not_test()?;
        if !self.at_kw("and") {
            return Ok(first);
        }
        let mut values = vec![first];
        while self.eat_kw("and") {
            values.push(self.not_test()?);
        }
        Ok(Expr::BoolOp {
            op: BoolOp::And,
            values,
        })
    }

    fn not_test(&mut self) -> PResult<Expr> {
        if self.eat_kw("not") {
            let operand = self.not_test()?;
            return Ok(Expr::UnaryOp {
                op: UnaryOp::Not,
                operand: Box::new(operand),
            });
        }
        self.comparison()
    }

    fn comp_op(&mut self) -> Option<CmpOp> {
        let t = self.peek().clone();
        let op = match (t.kind, t.text.as_str()) {
            (TokKind::Op, "==") => CmpOp::Eq,
            (TokKind::Op, "!=") => CmpOp::NotEq,
            (TokKind::Op, "<") => CmpOp::Lt,
            (TokKind::Op, "<=") => CmpOp::LtE,
            (TokKind::Op, ">") => CmpOp::Gt,
            (TokKind::Op, ">=") => CmpOp::GtE,
            (TokKind::Name, "in") => CmpOp::In,
            (TokKind::Name, "is") => {
                if self.peek_at(1).is_name("not") {
                    self.pos += 1;
                    CmpOp::IsNot
                } else {
                    CmpOp::Is
                }
            }
            (TokKind::Name, "not") if self.peek_at(1).is_name("in") => {
                self.pos += 1;
                CmpOp::NotIn
            }
            _ => return None,
        };
        self.pos += 1;
        Some(op)
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let left = self.bitor()?;
        let mut ops = Vec::new();
        let mut comparators = Vec::new();
        while let Some(op) = self.comp_op() {
            ops.push(op);
            comparators.push(self.bitor()?);
        }
        if ops.is_empty() {
            Ok(left)
        } else {
            Ok(Expr::Compare {
                left: Box::new(left),
                ops,
                comparators,
            })
        }
    }

    fn binary_level(
        &mut self,
        ops: &[&str],
        next: fn(&mut Self) -> PResult<Expr>,
    ) -> PResult<Expr> {
        let mut left = next(self)?;
        loop {
            let t = self.peek();
            if t.kind == TokKind::Op && ops.contains(&t.text.as_str()) {
                let op = BinOp::from_symbol(&t.text).unwrap();
                self.pos += 1;
                let right = next(self)?;
                left = Expr::binop(left, op, right);
            } else {
                return Ok(left);
            }
        }
    }

    fn bitor(&mut self) -> PResult<Expr> {
        self.binary_level(&["|"], Self::bitxor)
    }

    fn bitxor(&mut self) -> PResult<Expr> {
        self.binary_level(&["^"], Self::bitand)
    }

    fn bitand(&mut self) -> PResult<Expr> {
        self.binary_level(&["&"], Self::shift)
    }

    fn shift(&mut self) -> PResult<Expr> {
        self.binary_level(&["<<", ">>"], Self::arith)
    }

    fn arith(&mut self) -> PResult<Expr> {
        self.binary_level(&["+", "-"], Self::term)
    }

    fn term(&mut self) -> PResult<Expr> {
        self.binary_level(&["*", "/", "//", "%", "@"], Self::factor)
    }

    fn factor(&mut self) -> PResult<Expr> {
        let op = match self.peek().text.as_str() {
            "-" if self.peek().kind == TokKind::Op => Some(UnaryOp::Neg),
            "+" if self.peek().kind == TokKind::Op => Some(UnaryOp::Pos),
            "~" if self.peek().kind == TokKind::Op => Some(UnaryOp::Invert),
            _ => None,
        };
        if let Some(op) = op {
            self.pos += 1;
            let operand = self.factor()?;
            return Ok(Expr::UnaryOp {
                op,
                operand: Box::new(operand),
            });
        }
        self.power()
    }

    fn power(&mut self) -> PResult<Expr> {
        let base = if self.eat_kw("await") {
            Expr::Await(Box::new(self.primary()?))
        } else {
            self.primary()?
        };
        if self.eat_op("**") {
            let exp = self.factor()?;
            return Ok(Expr::binop(base, BinOp::Pow, exp));
        }
        Ok(base)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let mut e = self.atom()?;
        loop {
            if self.eat_op("(") {
                let args = self.call_args()?;
                self.expect_op(")")?;
                e = Expr::Call {
                    func: Box::new(e),
                    args,
                };
            } else if self.eat_op("[") {
                let index = self.subscript_list()?;
                self.expect_op("]")?;
                e = Expr::subscript(e, index);
            } else if self.at_op(".") {
                self.pos += 1;
                let t = self.next();
                if t.kind != TokKind::Name {
                    return Err(self.error("expected attribute name"));
                }
                e = Expr::attr(e, &t.text);
            } else {
                return Ok(e);
            }
        }
    }

    fn call_args(&mut self) -> PResult<Vec<Arg>> {
        let mut args = Vec::new();
        while !self.at_op(")") {
            if self.eat_op("**") {
                args.push(Arg::DoubleStarred(self.test()?));
            } else if self.eat_op("*") {
                args.push(Arg::Starred(self.test()?));
            } else if self.peek().kind == TokKind::Name
                && self.peek_at(1).is_op("=")
                && !is_keyword(&self.peek().text)
            {
                let name = self.next().text;
                self.pos += 1;
                args.push(Arg::Keyword(name, self.test()?));
            } else {
                let e = self.named_expr()?;
                if self.at_kw("for") || self.at_kw("async") {
                    let generators = self.comp_for()?;
                    args.push(Arg::Positional(Expr::GeneratorExp {
                        elt: Box::new(e),
                        generators,
                    }));
                } else {
                    args.push(Arg::Positional(e));
                }
            }
            if !self.eat_op(",") {
                break;
            }
        }
        Ok(args)
    }

    fn subscript_list(&mut self) -> PResult<Expr> {
        let first = self.subscript_item()?;
        if !self.at_op(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.at_op("]") {
                break;
            }
            items.push(self.subscript_item()?);
        }
        Ok(Expr::Tuple(items))
    }

    fn subscript_item(&mut self) -> PResult<Expr> {
        let lower = if self.at_op(":") {
            None
        } else {
            let e = self.star_or_named()?;
            if !self.at_op(":") {
                return Ok(e);
            }
            Some(Box::new(e))
        };
        self.expect_op(":")?;
        let upper = if self.at_op(":") || self.at_op("]") || self.at_op(",") {
            None
        } else {
            Some(Box::new(self.test()?))
        };
        let step = if self.eat_op(":") {
            if self.at_op("]") || self.at_op(",") {
                None
            } else {
                Some(Box::new(self.test()?))
            }
        } else {
            None
        };
        Ok(Expr::Slice { lower, upper, step })
    }

    fn comp_for(&mut self) -> PResult<Vec<Comprehension>> {
        let mut gens = Vec::new();
        loop {
            let is_async = self.eat_kw("async");
            if !self.eat_kw("for") {
                if is_async {
                    return Err(self.error("expected 'for' after async"));
                }
                break;
            }
            let target = self.target_list()?;
            self.expect_kw("in")?;
            let iter = self.or_test()?;
            let mut ifs = Vec::new();
            while self.eat_kw("if") {
                ifs.push(self.test_nocond()?);
            }
            gens.push(Comprehension {
                target,
                iter,
                ifs,
                is_async,
            });
            if !(self.at_kw("for") || self.at_kw("async")) {
                break;
            }
        }
        Ok(gens)
    }

    fn atom(&mut self) -> PResult<Expr> {
        let t = self.peek().clone();
        match t.kind {
            TokKind::Number => {
                self.pos += 1;
                Ok(Expr::Num(t.text))
            }
            TokKind::Str => {
                let mut pieces = Vec::new();
                while self.peek().kind == TokKind::Str {
                    let tok = self.next();
                    pieces.push(string_piece(&tok)?);
                }
                Ok(Expr::Str(pieces))
            }
            TokKind::Name => match t.text.as_str() {
                "True" => {
                    self.pos += 1;
                    Ok(Expr::Bool(true))
                }
                "False" => {
                    self.pos += 1;
                    Ok(Expr::Bool(false))
                }
                "None" => {
                    self.pos += 1;
                    Ok(Expr::NoneLit)
                }
                _ => Ok(Expr::Name(self.ident()?)),
            },
            TokKind::Op => match t.text.as_str() {
                "(" => self.paren(),
                "[" => self.list_display(),
                "{" => self.brace_display(),
                "..." => {
                    self.pos += 1;
                    Ok(Expr::Ellipsis)
                }
                _ => Err(self.error(format!("unexpected '{}'", t.text))),
            },
            _ => Err(self.error("unexpected end of line")),
        }
    }

    fn paren(&mut self) -> PResult<Expr> {
        self.expect_op("(")?;
        if self.eat_op(")") {
            return Ok(Expr::Tuple(Vec::new()));
        }
        if self.at_kw("yield") {
            let e = self.yield_expr()?;
            self.expect_op(")")?;
            return Ok(e);
        }
        let first = self.star_or_named()?;
        if self.at_kw("for") || self.at_kw("async") {
            let generators = self.comp_for()?;
            self.expect_op(")")?;
            return Ok(Expr::GeneratorExp {
                elt: Box::new(first),
                generators,
            });
        }
        if self.eat_op(")") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.at_op(")") {
                break;
            }
            items.push(self.star_or_named()?);
        }
        self.expect_op(")")?;
        Ok(Expr::Tuple(items))
    }

    fn list_display(&mut self) -> PResult<Expr> {
        self.expect_op("[")?;
        if self.eat_op("]") {
            return Ok(Expr::List(Vec::new()));
        }
        let first = self.star_or_named()?;
        if self.at_kw("for") || self.at_kw("async") {
            let generators = self.comp_for()?;
            self.expect_op("]")?;
            return Ok(Expr::ListComp {
                elt: Box::new(first),
                generators,
            });
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.at_op("]") {
                break;
            }
            items.push(self.star_or_named()?);
        }
        self.expect_op("]")?;
        Ok(Expr::List(items))
    }

    fn brace_display(&mut self) -> PResult<Expr> {
        self.expect_op("{")?;
        if self.eat_op("}") {
            return Ok(Expr::Dict(Vec::new()));
        }
        // dict or set?
        if self.eat_op("**") {
            let v = self.bitor()?;
            return self.dict_rest(None, v);
        }
        let first = self.star_or_named()?;
        if self.eat_op(":") {
            let value = self.test()?;
            if self.at_kw("for") || self.at_kw("async") {
                let generators = self.comp_for()?;
                self.expect_op("}")?;
                return Ok(Expr::DictComp {
                    key: Box::new(first),
                    value: Box::new(value),
                    generators,
                });
            }
            return self.dict_rest(Some(first), value);
        }
        if self.at_kw("for") || self.at_kw("async") {
            let generators = self.comp_for()?;
            self.expect_op("}")?;
            return Ok(Expr::SetComp {
                elt: Box::new(first),
                generators,
            });
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.at_op("}") {
                break;
            }
            items.push(self.star_or_named()?);
        }
        self.expect_op("}")?;
        Ok(Expr::Set(items))
    }

    fn dict_rest(&mut self, key: Option<Expr>, value: Expr) -> PResult<Expr> {
        let mut items = vec![(key, value)];
        while self.eat_op(",") {
            if self.at_op("}") {
                break;
            }
            if self.eat_op("**") {
                items.push((None, self.bitor()?));
            } else {
                let k = self.test()?;
                self.expect_op(":")?;
                let v = self.test()?;
                items.push((Some(k), v));
            }
        }
        self.expect_op("}")?;
        Ok(Expr::Dict(items))
    }
}

fn string_piece(tok: &Token) -> PResult<StrPiece> {
    let text = &tok.text;
    let prefix_len = text.find(['"', '\'']).unwrap_or(0);
    let prefix = &text[..prefix_len];
    if !prefix.contains(['f', 'F']) {
        return Ok(StrPiece::Plain(text.clone()));
    }
    let rest = &text[prefix_len..];
    let quote = if rest.starts_with("\"\"\"") || rest.starts_with("'''") {
        &rest[..3]
    } else {
        &rest[..1]
    };
    let content = &rest[quote.len()..rest.len() - quote.len()];
    let raw = prefix.contains(['r', 'R']);
    let parts = parse_fstring_content(content, raw).map_err(|m| SyntaxError {
        line: tok.line,
        col: tok.col,
        message: m,
    })?;
    Ok(StrPiece::FString {
        prefix: prefix.to_string(),
        quote: quote.to_string(),
        parts,
    })
}

/// Splits f-string body text into literal runs and replacement fields.
pub fn parse_fstring_content(content: &str, raw: bool) -> Result<Vec<FStringPart>, String> {
    let chars: Vec<char> = content.chars().collect();
    let mut parts = Vec::new();
    let mut lit = String::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '\\' && !raw && i + 1 < chars.len() {
            lit.push(c);
            lit.push(chars[i + 1]);
            i += 2;
            continue;
        }
        if c == '{' {
            if chars.get(i + 1) == Some(&'{') {
                lit.push_str("{{");
                i += 2;
                continue;
            }
            if !lit.is_empty() {
                parts.push(FStringPart::Literal(std::mem::take(&mut lit)));
            }
            let (part, next) = parse_field(&chars, i + 1, raw)?;
            parts.push(part);
            i = next;
            continue;
        }
        if c == '}' {
            if chars.get(i + 1) == Some(&'}') {
                lit.push_str("}}");
                i += 2;
                continue;
            }
            return Err("single '}' is not allowed in f-string".into());
        }
        lit.push(c);
        i += 1;
    }
    if !lit.is_empty() {
        parts.push(FStringPart::Literal(lit));
    }
    Ok(parts)
}

fn parse_field(chars: &[char], start: usize, raw: bool) -> Result<(FStringPart, usize), String> {
    // scan expression text up to top-level '!', ':', '=' (debug) or '}'
    let mut depth = 0i32;
    let mut i = start;
    let mut quote: Option<char> = None;
    while i < chars.len() {
        let c = chars[i];
        if let Some(q) = quote {
            if c == q {
                quote = None;
            }
            i += 1;
            continue;
        }
        match c {
            '\'' | '"' => quote = Some(c),
            '(' | '[' | '{' => depth += 1,
            ')' | ']' => depth -= 1,
            '}' if depth > 0 => depth -= 1,
            '}' => break,
            '!' if depth == 0 && chars.get(i + 1) != Some(&'=') => break,
            ':' if depth == 0 => break,
            _ => {}
        }
        i += 1;
    }
    if i >= chars.len() {
        return Err("unterminated f-string field".into());
    }
    let mut expr_text: String = chars[start..i].iter().collect();
    let mut debug = None;
    let trimmed = expr_text.trim_end();
    if trimmed.ends_with('=')
        && !trimmed.ends_with("==")
        && !trimmed.ends_with("!=")
        && !trimmed.ends_with("<=")
        && !trimmed.ends_with(">=")
    {
        debug = Some(expr_text.clone());
        expr_text = trimmed[..trimmed.len() - 1].to_string();
    }
    let expr = parse_expression(&expr_text).map_err(|e| e.message)?;
    let mut conversion = None;
    if chars[i] == '!' {
        conversion = chars.get(i + 1).copied();
        i += 2;
    }
    let mut spec = Vec::new();
    if chars.get(i) == Some(&':') {
        // format spec runs to the matching '}' and may hold nested fields
        let mut depth = 0;
        let mut j = i + 1;
        while j < chars.len() {
            match chars[j] {
                '{' => depth += 1,
                '}' if depth == 0 => break,
                '}' => depth -= 1,
                _ => {}
            }
            j += 1;
        }
        let spec_text: String = chars[i + 1..j.min(chars.len())].iter().collect();
        spec = parse_fstring_content(&spec_text, raw)?;
        i = j;
    }
    if chars.get(i) != Some(&'}') {
        return Err("expected '}' in f-string".into());
    }
    Ok((
        FStringPart::Field {
            expr: Box::new(expr),
            debug,
            conversion,
            spec,
        },
        i + 1,
    ))
}
