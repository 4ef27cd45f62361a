//! Deterministic source emission.
//!
//! Output uses four-space indentation, one statement per line and the
//! minimal parentheses required by operator precedence. String literals are
//! reproduced verbatim; comments are not retained by the parser.

use super::ast::*;
use super::parser::parse_expression;

pub fn emit_module(module: &Module) -> String {
    let mut e = Emitter::default();
    e.block(&module.body, 0, true);
    let mut out = e.out;
    if !out.is_empty() && !out.ends_with('\n') {
        out.push('\n');
    }
    out
}

pub fn emit_stmts(body: &[Stmt]) -> String {
    let mut e = Emitter::default();
    e.block(body, 0, false);
    e.out
}

pub fn emit_expr(expr: &Expr) -> String {
    expr_str(expr, P_YIELD)
}

// precedence levels
const P_YIELD: i32 = -1;
const P_TUPLE: i32 = 0;
const P_LAMBDA: i32 = 1;
const P_IFEXP: i32 = 2;
const P_OR: i32 = 3;
const P_AND: i32 = 4;
const P_NOT: i32 = 5;
const P_CMP: i32 = 6;
const P_BITOR: i32 = 7;
const P_BITXOR: i32 = 8;
const P_BITAND: i32 = 9;
const P_SHIFT: i32 = 10;
const P_ARITH: i32 = 11;
const P_TERM: i32 = 12;
const P_UNARY: i32 = 13;
const P_POWER: i32 = 14;
const P_AWAIT: i32 = 15;
const P_PRIMARY: i32 = 16;
const P_ATOM: i32 = 17;

fn binop_prec(op: BinOp) -> i32 {
    match op {
        BinOp::BitOr => P_BITOR,
        BinOp::BitXor => P_BITXOR,
        BinOp::BitAnd => P_BITAND,
        BinOp::LShift | BinOp::RShift => P_SHIFT,
        BinOp::Add | BinOp::Sub => P_ARITH,
        BinOp::Mult | BinOp::MatMult | BinOp::Div | BinOp::FloorDiv | BinOp::Mod => P_TERM,
        BinOp::Pow => P_POWER,
    }
}

fn prec(e: &Expr) -> i32 {
    match e {
        Expr::Yield(_) | Expr::YieldFrom(_) => P_YIELD,
        Expr::Tuple(items) if items.len() > 1 => P_TUPLE,
        Expr::Lambda { .. } => P_LAMBDA,
        // walrus always gets parentheses; see `expr_str`
        Expr::NamedExpr { .. } => P_ATOM,
        Expr::IfExp { .. } => P_IFEXP,
        Expr::BoolOp { op: BoolOp::Or, .. } => P_OR,
        Expr::BoolOp { op: BoolOp::And, .. } => P_AND,
        Expr::UnaryOp {
            op: UnaryOp::Not, ..
        } => P_NOT,
        Expr::Compare { .. } => P_CMP,
        Expr::BinOp { op, .. } => binop_prec(*op),
        Expr::UnaryOp { .. } => P_UNARY,
        Expr::Await(_) => P_AWAIT,
        Expr::Call { .. } | Expr::Attribute { .. } | Expr::Subscript { .. } => P_PRIMARY,
        // starred items are only valid inside displays, calls and targets
        Expr::Starred(_) => P_ATOM,
        _ => P_ATOM,
    }
}

fn expr_str(e: &Expr, min: i32) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, min);
    s
}

fn write_expr(out: &mut String, e: &Expr, min: i32) {
    let p = prec(e);
    if p < min {
        out.push('(');
        write_inner(out, e);
        out.push(')');
    } else {
        write_inner(out, e);
    }
}

fn write_list(out: &mut String, items: &[Expr], min: i32) {
    for (i, it) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(out, it, min);
    }
}

fn write_inner(out: &mut String, e: &Expr) {
    match e {
        Expr::Name(id) => out.push_str(&id.name),
        Expr::Num(n) => out.push_str(n),
        Expr::Str(pieces) => {
            for (i, p) in pieces.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                write_str_piece(out, p);
            }
        }
        Expr::Bool(true) => out.push_str("True"),
        Expr::Bool(false) => out.push_str("False"),
        Expr::NoneLit => out.push_str("None"),
        Expr::Ellipsis => out.push_str("..."),
        Expr::BinOp { left, op, right } => {
            let p = binop_prec(*op);
            if *op == BinOp::Pow {
                write_expr(out, left, P_AWAIT);
                out.push_str(" ** ");
                write_expr(out, right, P_UNARY);
            } else {
                write_expr(out, left, p);
                out.push(' ');
                out.push_str(op.symbol());
                out.push(' ');
                write_expr(out, right, p + 1);
            }
        }
        Expr::UnaryOp { op, operand } => match op {
            UnaryOp::Not => {
                out.push_str("not ");
                write_expr(out, operand, P_NOT);
            }
            UnaryOp::Neg | UnaryOp::Pos | UnaryOp::Invert => {
                out.push_str(match op {
                    UnaryOp::Neg => "-",
                    UnaryOp::Pos => "+",
                    _ => "~",
                });
                write_expr(out, operand, P_UNARY);
            }
        },
        Expr::BoolOp { op, values } => {
            let (word, p) = match op {
                BoolOp::And => (" and ", P_AND),
                BoolOp::Or => (" or ", P_OR),
            };
            for (i, v) in values.iter().enumerate() {
                if i > 0 {
                    out.push_str(word);
                }
                write_expr(out, v, p + 1);
            }
        }
        Expr::Compare {
            left,
            ops,
            comparators,
        } => {
            write_expr(out, left, P_BITOR);
            for (op, c) in ops.iter().zip(comparators) {
                out.push(' ');
                out.push_str(op.symbol());
                out.push(' ');
                write_expr(out, c, P_BITOR);
            }
        }
        Expr::Call { func, args } => {
            write_expr(out, func, P_PRIMARY);
            out.push('(');
            if let [Arg::Positional(Expr::GeneratorExp { elt, generators })] = args.as_slice() {
                write_comp_body(out, elt, None, generators);
            } else {
                write_args(out, args);
            }
            out.push(')');
        }
        Expr::Attribute { value, attr } => {
            let needs_parens = matches!(&**value, Expr::Num(n)
                if !n.contains(['.', 'e', 'E', 'j', 'J', 'x', 'X', 'o', 'O', 'b', 'B']));
            if needs_parens {
                out.push('(');
                write_inner(out, value);
                out.push(')');
            } else {
                write_expr(out, value, P_PRIMARY);
            }
            out.push('.');
            out.push_str(attr);
        }
        Expr::Subscript { value, index } => {
            write_expr(out, value, P_PRIMARY);
            out.push('[');
            match &**index {
                Expr::Tuple(items) if !items.is_empty() => {
                    write_list(out, items, P_LAMBDA);
                    if items.len() == 1 {
                        out.push(',');
                    }
                }
                other => write_expr(out, other, P_LAMBDA),
            }
            out.push(']');
        }
        Expr::Slice { lower, upper, step } => {
            if let Some(l) = lower {
                write_expr(out, l, P_LAMBDA);
            }
            out.push(':');
            if let Some(u) = upper {
                write_expr(out, u, P_LAMBDA);
            }
            if let Some(s) = step {
                out.push(':');
                write_expr(out, s, P_LAMBDA);
            }
        }
        Expr::List(items) => {
            out.push('[');
            write_list(out, items, P_LAMBDA);
            out.push(']');
        }
        Expr::Tuple(items) => {
            // bare form; callers needing parentheses get them via precedence
            match items.as_slice() {
                [] => out.push_str("()"),
                [one] => {
                    out.push('(');
                    write_expr(out, one, P_LAMBDA);
                    out.push_str(",)");
                }
                _ => write_list(out, items, P_LAMBDA),
            }
        }
        Expr::Set(items) => {
            out.push('{');
            write_list(out, items, P_LAMBDA);
            out.push('}');
        }
        Expr::Dict(items) => {
            out.push('{');
            for (i, (k, v)) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                match k {
                    Some(k) => {
                        write_expr(out, k, P_LAMBDA);
                        out.push_str(": ");
                        write_expr(out, v, P_LAMBDA);
                    }
                    None => {
                        out.push_str("**");
                        write_expr(out, v, P_BITOR);
                    }
                }
            }
            out.push('}');
        }
        Expr::ListComp { elt, generators } => {
            out.push('[');
            write_comp_body(out, elt, None, generators);
            out.push(']');
        }
        Expr::SetComp { elt, generators } => {
            out.push('{');
            write_comp_body(out, elt, None, generators);
            out.push('}');
        }
        Expr::DictComp {
            key,
            value,
            generators,
        } => {
            out.push('{');
            write_comp_body(out, key, Some(value), generators);
            out.push('}');
        }
        Expr::GeneratorExp { elt, generators } => {
            out.push('(');
            write_comp_body(out, elt, None, generators);
            out.push(')');
        }
        Expr::Lambda { params, body } => {
            out.push_str("lambda");
            if !params.is_empty() {
                out.push(' ');
                write_params(out, params);
            }
            out.push_str(": ");
            write_expr(out, body, P_LAMBDA);
        }
        Expr::IfExp { test, body, orelse } => {
            write_expr(out, body, P_OR);
            out.push_str(" if ");
            write_expr(out, test, P_OR);
            out.push_str(" else ");
            write_expr(out, orelse, P_IFEXP);
        }
        Expr::Starred(inner) => {
            out.push('*');
            write_expr(out, inner, P_BITOR);
        }
        Expr::NamedExpr { target, value } => {
            out.push('(');
            out.push_str(&target.name);
            out.push_str(" := ");
            write_expr(out, value, P_LAMBDA);
            out.push(')');
        }
        Expr::Yield(v) => {
            out.push_str("yield");
            if let Some(v) = v {
                out.push(' ');
                write_expr(out, v, P_TUPLE);
            }
        }
        Expr::YieldFrom(v) => {
            out.push_str("yield from ");
            write_expr(out, v, P_LAMBDA);
        }
        Expr::Await(v) => {
            out.push_str("await ");
            write_expr(out, v, P_PRIMARY);
        }
    }
}

fn write_comp_body(out: &mut String, elt: &Expr, value: Option<&Expr>, gens: &[Comprehension]) {
    write_expr(out, elt, P_LAMBDA);
    if let Some(v) = value {
        out.push_str(": ");
        write_expr(out, v, P_LAMBDA);
    }
    for g in gens {
        out.push_str(if g.is_async { " async for " } else { " for " });
        write_expr(out, &g.target, P_TUPLE);
        out.push_str(" in ");
        write_expr(out, &g.iter, P_OR);
        for cond in &g.ifs {
            out.push_str(" if ");
            write_expr(out, cond, P_OR);
        }
    }
}

fn write_args(out: &mut String, args: &[Arg]) {
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        match a {
            Arg::Positional(e) => write_expr(out, e, P_LAMBDA),
            Arg::Starred(e) => {
                out.push('*');
                write_expr(out, e, P_LAMBDA);
            }
            Arg::Keyword(k, e) => {
                out.push_str(k);
                out.push('=');
                write_expr(out, e, P_LAMBDA);
            }
            Arg::DoubleStarred(e) => {
                out.push_str("**");
                write_expr(out, e, P_LAMBDA);
            }
        }
    }
}

fn write_param(out: &mut String, p: &Param) {
    out.push_str(&p.name.name);
    if let Some(a) = &p.annotation {
        out.push_str(": ");
        write_expr(out, a, P_LAMBDA);
    }
    if let Some(d) = &p.default {
        out.push_str(if p.annotation.is_some() { " = " } else { "=" });
        write_expr(out, d, P_LAMBDA);
    }
}

fn write_params(out: &mut String, params: &Params) {
    let mut parts: Vec<String> = Vec::new();
    let one = |p: &Param| {
        let mut s = String::new();
        write_param(&mut s, p);
        s
    };
    for p in &params.posonly {
        parts.push(one(p));
    }
    if !params.posonly.is_empty() {
        parts.push("/".into());
    }
    for p in &params.args {
        parts.push(one(p));
    }
    if let Some(v) = &params.vararg {
        parts.push(format!("*{}", one(v)));
    } else if !params.kwonly.is_empty() {
        parts.push("*".into());
    }
    for p in &params.kwonly {
        parts.push(one(p));
    }
    if let Some(k) = &params.kwarg {
        parts.push(format!("**{}", one(k)));
    }
    out.push_str(&parts.join(", "));
}

fn write_str_piece(out: &mut String, p: &StrPiece) {
    match p {
        StrPiece::Plain(text) => out.push_str(text),
        StrPiece::FString {
            prefix,
            quote,
            parts,
        } => {
            out.push_str(prefix);
            out.push_str(quote);
            write_fstring_parts(out, parts);
            out.push_str(quote);
        }
    }
}

fn write_fstring_parts(out: &mut String, parts: &[FStringPart]) {
    for part in parts {
        match part {
            FStringPart::Literal(text) => out.push_str(text),
            FStringPart::Field {
                expr,
                debug,
                conversion,
                spec,
            } => {
                out.push('{');
                let raw = debug.as_ref().filter(|raw| {
                    let text = raw.trim_end();
                    parse_expression(&text[..text.len() - 1]).ok().as_ref() == Some(&**expr)
                });
                match raw {
                    Some(raw) => out.push_str(raw),
                    None => {
                        let text = expr_str(expr, P_LAMBDA);
                        if text.starts_with('{') {
                            out.push(' ');
                        }
                        out.push_str(&text);
                        if debug.is_some() {
                            out.push('=');
                        }
                    }
                }
                if let Some(c) = conversion {
                    out.push('!');
                    out.push(*c);
                }
                if !spec.is_empty() {
                    out.push(':');
                    write_fstring_parts(out, spec);
                }
                out.push('}');
            }
        }
    }
}

#[derive(Default)]
struct Emitter {
    out: String,
}

impl Emitter {
    fn line(&mut self, depth: usize, text: &str) {
        for _ in 0..depth {
            self.out.push_str("    ");
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn blank(&mut self) {
        self.out.push('\n');
    }

    fn block(&mut self, body: &[Stmt], depth: usize, top: bool) {
        if body.is_empty() {
            if !top {
                self.line(depth, "pass");
            }
            return;
        }
        let gap = if top { 2 } else { 1 };
        for (i, s) in body.iter().enumerate() {
            let is_def = matches!(s.kind, StmtKind::FunctionDef(_) | StmtKind::ClassDef(_));
            if i > 0 {
                let prev_def = matches!(
                    body[i - 1].kind,
                    StmtKind::FunctionDef(_) | StmtKind::ClassDef(_)
                );
                if is_def || (prev_def && (top || depth == 0)) {
                    for _ in 0..gap {
                        self.blank();
                    }
                }
            }
            self.stmt(s, depth);
        }
    }

    fn stmt(&mut self, s: &Stmt, depth: usize) {
        match &s.kind {
            StmtKind::FunctionDef(f) => {
                for d in &f.decorators {
                    self.line(depth, &format!("@{}", expr_str(d, P_LAMBDA)));
                }
                let mut h = String::new();
                if f.is_async {
                    h.push_str("async ");
                }
                h.push_str("def ");
                h.push_str(&f.name.name);
                h.push('(');
                write_params(&mut h, &f.params);
                h.push(')');
                if let Some(r) = &f.returns {
                    h.push_str(" -> ");
                    write_expr(&mut h, r, P_LAMBDA);
                }
                h.push(':');
                self.line(depth, &h);
                self.block(&f.body, depth + 1, false);
            }
            StmtKind::ClassDef(c) => {
                for d in &c.decorators {
                    self.line(depth, &format!("@{}", expr_str(d, P_LAMBDA)));
                }
                let mut h = format!("class {}", c.name.name);
                if !c.bases.is_empty() {
                    h.push('(');
                    write_args(&mut h, &c.bases);
                    h.push(')');
                }
                h.push(':');
                self.line(depth, &h);
                self.block(&c.body, depth + 1, false);
            }
            StmtKind::Return(v) => match v {
                Some(v) => self.line(depth, &format!("return {}", expr_str(v, P_TUPLE))),
                None => self.line(depth, "return"),
            },
            StmtKind::Delete(targets) => {
                let mut t = String::from("del ");
                write_list(&mut t, targets, P_LAMBDA);
                self.line(depth, &t);
            }
            StmtKind::Assign { targets, value } => {
                let mut t = String::new();
                for target in targets {
                    write_expr(&mut t, target, P_TUPLE);
                    t.push_str(" = ");
                }
                write_expr(&mut t, value, P_YIELD);
                self.line(depth, &t);
            }
            StmtKind::AugAssign { target, op, value } => {
                let t = format!(
                    "{} {}= {}",
                    expr_str(target, P_LAMBDA),
                    op.symbol(),
                    expr_str(value, P_YIELD)
                );
                self.line(depth, &t);
            }
            StmtKind::AnnAssign {
                target,
                annotation,
                value,
            } => {
                let mut t = format!(
                    "{}: {}",
                    expr_str(target, P_LAMBDA),
                    expr_str(annotation, P_LAMBDA)
                );
                if let Some(v) = value {
                    t.push_str(" = ");
                    write_expr(&mut t, v, P_YIELD);
                }
                self.line(depth, &t);
            }
            StmtKind::For {
                target,
                iter,
                body,
                orelse,
                is_async,
            } => {
                let h = format!(
                    "{}for {} in {}:",
                    if *is_async { "async " } else { "" },
                    expr_str(target, P_TUPLE),
                    expr_str(iter, P_TUPLE)
                );
                self.line(depth, &h);
                self.block(body, depth + 1, false);
                self.else_block(orelse, depth);
            }
            StmtKind::While { test, body, orelse } => {
                self.line(depth, &format!("while {}:", expr_str(test, P_LAMBDA)));
                self.block(body, depth + 1, false);
                self.else_block(orelse, depth);
            }
            StmtKind::If { test, body, orelse } => {
                self.line(depth, &format!("if {}:", expr_str(test, P_LAMBDA)));
                self.block(body, depth + 1, false);
                let mut orelse = orelse;
                loop {
                    match orelse.as_slice() {
                        [Stmt {
                            kind:
                                StmtKind::If {
                                    test,
                                    body,
                                    orelse: next,
                                },
                            ..
                        }] => {
                            self.line(depth, &format!("elif {}:", expr_str(test, P_LAMBDA)));
                            self.block(body, depth + 1, false);
                            orelse = next;
                        }
                        _ => break,
                    }
                }
                self.else_block(orelse, depth);
            }
            StmtKind::With {
                items,
                body,
                is_async,
            } => {
                let mut h = String::from(if *is_async { "async with " } else { "with " });
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        h.push_str(", ");
                    }
                    write_expr(&mut h, &it.context, P_LAMBDA);
                    if let Some(t) = &it.target {
                        h.push_str(" as ");
                        write_expr(&mut h, t, P_LAMBDA);
                    }
                }
                h.push(':');
                self.line(depth, &h);
                self.block(body, depth + 1, false);
            }
            StmtKind::Raise { exc, cause } => {
                let mut t = String::from("raise");
                if let Some(e) = exc {
                    t.push(' ');
                    write_expr(&mut t, e, P_LAMBDA);
                }
                if let Some(c) = cause {
                    t.push_str(" from ");
                    write_expr(&mut t, c, P_LAMBDA);
                }
                self.line(depth, &t);
            }
            StmtKind::Try {
                body,
                handlers,
                orelse,
                finalbody,
            } => {
                self.line(depth, "try:");
                self.block(body, depth + 1, false);
                for h in handlers {
                    let mut t = String::from("except");
                    if let Some(k) = &h.kind {
                        t.push(' ');
                        write_expr(&mut t, k, P_LAMBDA);
                        if let Some(n) = &h.name {
                            t.push_str(" as ");
                            t.push_str(&n.name);
                        }
                    }
                    t.push(':');
                    self.line(depth, &t);
                    self.block(&h.body, depth + 1, false);
                }
                self.else_block(orelse, depth);
                if !finalbody.is_empty() {
                    self.line(depth, "finally:");
                    self.block(finalbody, depth + 1, false);
                }
            }
            StmtKind::Assert { test, msg } => {
                let mut t = format!("assert {}", expr_str(test, P_LAMBDA));
                if let Some(m) = msg {
                    t.push_str(", ");
                    write_expr(&mut t, m, P_LAMBDA);
                }
                self.line(depth, &t);
            }
            StmtKind::Import(names) => {
                let list: Vec<String> = names.iter().map(alias_str).collect();
                self.line(depth, &format!("import {}", list.join(", ")));
            }
            StmtKind::ImportFrom {
                module,
                names,
                level,
            } => {
                let list: Vec<String> = names.iter().map(alias_str).collect();
                let dots = ".".repeat(*level as usize);
                self.line(
                    depth,
                    &format!(
                        "from {}{} import {}",
                        dots,
                        module.as_deref().unwrap_or(""),
                        list.join(", ")
                    ),
                );
            }
            StmtKind::Global(names) | StmtKind::Nonlocal(names) => {
                let kw = if matches!(s.kind, StmtKind::Global(_)) {
                    "global"
                } else {
                    "nonlocal"
                };
                let list: Vec<&str> = names.iter().map(|n| n.name.as_str()).collect();
                self.line(depth, &format!("{} {}", kw, list.join(", ")));
            }
            StmtKind::Expr(e) => self.line(depth, &expr_str(e, P_YIELD)),
            StmtKind::Pass => self.line(depth, "pass"),
            StmtKind::Break => self.line(depth, "break"),
            StmtKind::Continue => self.line(depth, "continue"),
            StmtKind::Opaque(text) => {
                for l in text.lines() {
                    if l.trim().is_empty() {
                        self.blank();
                    } else {
                        self.line(depth, l);
                    }
                }
            }
        }
    }

    fn else_block(&mut self, orelse: &[Stmt], depth: usize) {
        if !orelse.is_empty() {
            self.line(depth, "else:");
            self.block(orelse, depth + 1, false);
        }
    }
}

fn alias_str(a: &Alias) -> String {
    let default_bound = a.name.split('.').next().unwrap_or(&a.name);
    if a.aliased || a.bound.name != default_bound {
        format!("{} as {}", a.name, a.bound.name)
    } else {
        a.name.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_module;
    use super::*;

    fn roundtrip(src: &str) -> String {
        let m = parse_module(src).unwrap();
        let out = emit_module(&m);
        let again = parse_module(&out).unwrap();
        assert_eq!(m, again, "reparse differs for:\n{out}");
        out
    }

    #[test]
    fn precedence_parentheses_are_minimal() {
        assert_eq!(roundtrip("x = (a + b) * c\n"), "x = (a + b) * c\n");
        assert_eq!(roundtrip("x = a + (b * c)\n"), "x = a + b * c\n");
        assert_eq!(roundtrip("x = a - (b - c)\n"), "x = a - (b - c)\n");
        assert_eq!(roundtrip("x = (-2) ** 2\n"), "x = (-2) ** 2\n");
        assert_eq!(roundtrip("x = 2 ** -1\n"), "x = 2 ** -1\n");
        assert_eq!(roundtrip("x = not (a and b)\n"), "x = not (a and b)\n");
        assert_eq!(roundtrip("x = (a or b) and c\n"), "x = (a or b) and c\n");
        assert_eq!(roundtrip("x = (1).real\n"), "x = (1).real\n");
    }

    #[test]
    fn tuples_and_elif() {
        let src = "a, b = b, a\nfor i, j in pairs:\n    pass\nif a:\n    x = 1\nelif b:\n    x = 2\nelse:\n    x = (1,)\n";
        assert_eq!(roundtrip(src), src);
    }

    #[test]
    fn fstrings_keep_fields_and_specs() {
        let src = "s = f\"{x!r:>{width}} and {{braces}} {y['k']}\"\n";
        assert_eq!(roundtrip(src), src);
        let dbg = "s = f'{x + 1 = }'\n";
        assert_eq!(roundtrip(dbg), dbg);
    }

    #[test]
    fn functions_classes_and_blank_lines() {
        let src = "import os\n\n\nclass A(Base, metaclass=M):\n    x: int = 0\n\n    @staticmethod\n    def f(a, /, b=1, *args, c, **kw) -> int:\n        return a\n\n\ndef g(*, key=None):\n    yield key\n    y = yield\n    return [i for i in range(3) if i]\n\n\nprint(g)\n";
        assert_eq!(roundtrip(src), src);
    }

    #[test]
    fn generator_as_sole_argument() {
        assert_eq!(roundtrip("s = sum(x for x in y)\n"), "s = sum(x for x in y)\n");
        assert_eq!(roundtrip("s = f((x for x in y), 1)\n"), "s = f((x for x in y), 1)\n");
    }

    #[test]
    fn subscripts_and_slices() {
        let src = "y = a[1:2, ::3]\nz = b[i][j:]\nw = c[(1, 2)]\n";
        let out = roundtrip(src);
        assert!(out.contains("a[1:2, ::3]"));
        assert!(out.contains("c[1, 2]"));
    }

    #[test]
    fn walrus_lambda_ifexp() {
        let src = "if (n := len(a)) > 10:\n    f = lambda x, y=2: x if y else -x\n";
        assert_eq!(roundtrip(src), src);
    }

    #[test]
    fn match_is_kept_verbatim() {
        let src = "def f(x):\n    match x:\n        case 1:\n            return 'one'\n        case _:\n            return 'other'\n    return None\n";
        let out = roundtrip(src);
        assert_eq!(out, src);
    }

    #[test]
    fn try_with_and_imports() {
        let src = "from . import mod as m\nfrom ..pkg.sub import (a, b as c)\nimport os.path\ntry:\n    with open(p) as fh, lock:\n        pass\nexcept (ValueError, KeyError) as err:\n    raise RuntimeError('x') from err\nelse:\n    pass\nfinally:\n    del a, b\n";
        let out = roundtrip(src);
        assert!(out.contains("from ..pkg.sub import a, b as c"));
        assert!(out.contains("except (ValueError, KeyError) as err:"));
    }
}
