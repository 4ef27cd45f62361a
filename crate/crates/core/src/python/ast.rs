//! Syntax tree for the supported Python subset.
//!
//! Statements carry an optional lineage id so that statements can be tracked
//! from an original program into its transformed descendants. Identifiers
//! carry a numeric occurrence id, refreshed by [`number_idents`], which the
//! scope resolver uses to address individual occurrences.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Stable identity of a statement across transformations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LineageId(pub u32);

impl fmt::Display for LineageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Ident {
    pub name: String,
    pub id: u32,
}

impl Ident {
    pub fn new(name: impl Into<String>) -> Self {
        Ident {
            name: name.into(),
            id: 0,
        }
    }
}

impl PartialEq for Ident {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Module {
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone)]
pub struct Stmt {
    pub kind: StmtKind,
    pub lineage: Option<LineageId>,
    /// First source line, 0 for synthesized statements.
    pub line: u32,
}

/// Structural equality ignores lineage and positions.
impl PartialEq for Stmt {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Stmt {
    pub fn new(kind: StmtKind) -> Self {
        Stmt {
            kind,
            lineage: None,
            line: 0,
        }
    }

    /// Child statement blocks in source order.
    pub fn blocks(&self) -> Vec<&Vec<Stmt>> {
        match &self.kind {
            StmtKind::FunctionDef(f) => vec![&f.body],
            StmtKind::ClassDef(c) => vec![&c.body],
            StmtKind::For { body, orelse, .. } | StmtKind::While { body, orelse, .. } => {
                vec![body, orelse]
            }
            StmtKind::If { body, orelse, .. } => vec![body, orelse],
            StmtKind::With { body, .. } => vec![body],
            StmtKind::Try {
                body,
                handlers,
                orelse,
                finalbody,
            } => {
                let mut v = vec![body];
                for h in handlers {
                    v.push(&h.body);
                }
                v.push(orelse);
                v.push(finalbody);
                v
            }
            _ => Vec::new(),
        }
    }

    pub fn blocks_mut(&mut self) -> Vec<&mut Vec<Stmt>> {
        match &mut self.kind {
            StmtKind::FunctionDef(f) => vec![&mut f.body],
            StmtKind::ClassDef(c) => vec![&mut c.body],
            StmtKind::For { body, orelse, .. } | StmtKind::While { body, orelse, .. } => {
                vec![body, orelse]
            }
            StmtKind::If { body, orelse, .. } => vec![body, orelse],
            StmtKind::With { body, .. } => vec![body],
            StmtKind::Try {
                body,
                handlers,
                orelse,
                finalbody,
            } => {
                let mut v = vec![body];
                for h in handlers.iter_mut() {
                    v.push(&mut h.body);
                }
                v.push(orelse);
                v.push(finalbody);
                v
            }
            _ => Vec::new(),
        }
    }

    pub fn is_compound(&self) -> bool {
        matches!(
            self.kind,
            StmtKind::FunctionDef(_)
                | StmtKind::ClassDef(_)
                | StmtKind::For { .. }
                | StmtKind::While { .. }
                | StmtKind::If { .. }
                | StmtKind::With { .. }
                | StmtKind::Try { .. }
        )
    }

    pub fn is_docstring(&self) -> bool {
        matches!(&self.kind, StmtKind::Expr(Expr::Str(_)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    FunctionDef(FunctionDef),
    ClassDef(ClassDef),
    Return(Option<Expr>),
    Delete(Vec<Expr>),
    Assign {
        targets: Vec<Expr>,
        value: Expr,
    },
    AugAssign {
        target: Expr,
        op: BinOp,
        value: Expr,
    },
    AnnAssign {
        target: Expr,
        annotation: Expr,
        value: Option<Expr>,
    },
    For {
        target: Expr,
        iter: Expr,
        body: Vec<Stmt>,
        orelse: Vec<Stmt>,
        is_async: bool,
    },
    While {
        test: Expr,
        body: Vec<Stmt>,
        orelse: Vec<Stmt>,
    },
    /// An `elif` is an `If` that is the sole statement of `orelse`.
    If {
        test: Expr,
        body: Vec<Stmt>,
        orelse: Vec<Stmt>,
    },
    With {
        items: Vec<WithItem>,
        body: Vec<Stmt>,
        is_async: bool,
    },
    Raise {
        exc: Option<Expr>,
        cause: Option<Expr>,
    },
    Try {
        body: Vec<Stmt>,
        handlers: Vec<ExceptHandler>,
        orelse: Vec<Stmt>,
        finalbody: Vec<Stmt>,
    },
    Assert {
        test: Expr,
        msg: Option<Expr>,
    },
    Import(Vec<Alias>),
    ImportFrom {
        module: Option<String>,
        names: Vec<Alias>,
        level: u32,
    },
    Global(Vec<Ident>),
    Nonlocal(Vec<Ident>),
    Expr(Expr),
    Pass,
    Break,
    Continue,
    /// Unsupported construct kept verbatim (dedented source text).
    Opaque(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDef {
    pub name: Ident,
    pub params: Params,
    pub body: Vec<Stmt>,
    pub decorators: Vec<Expr>,
    pub returns: Option<Expr>,
    pub is_async: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassDef {
    pub name: Ident,
    pub bases: Vec<Arg>,
    pub body: Vec<Stmt>,
    pub decorators: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Params {
    pub posonly: Vec<Param>,
    pub args: Vec<Param>,
    pub vararg: Option<Param>,
    pub kwonly: Vec<Param>,
    pub kwarg: Option<Param>,
}

impl Params {
    pub fn all(&self) -> impl Iterator<Item = &Param> {
        self.posonly
            .iter()
            .chain(self.args.iter())
            .chain(self.vararg.iter())
            .chain(self.kwonly.iter())
            .chain(self.kwarg.iter())
    }

    pub fn all_mut(&mut self) -> impl Iterator<Item = &mut Param> {
        self.posonly
            .iter_mut()
            .chain(self.args.iter_mut())
            .chain(self.vararg.iter_mut())
            .chain(self.kwonly.iter_mut())
            .chain(self.kwarg.iter_mut())
    }

    pub fn is_empty(&self) -> bool {
        self.all().next().is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: Ident,
    pub annotation: Option<Expr>,
    pub default: Option<Expr>,
}

impl Param {
    pub fn plain(name: &str) -> Self {
        Param {
            name: Ident::new(name),
            annotation: None,
            default: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WithItem {
    pub context: Expr,
    pub target: Option<Expr>,
}

#[derive(Debug, Clone)]
pub struct ExceptHandler {
    pub kind: Option<Expr>,
    pub name: Option<Ident>,
    pub body: Vec<Stmt>,
    /// Source line of the `except` clause.
    pub line: u32,
}

impl PartialEq for ExceptHandler {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.name == other.name && self.body == other.body
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alias {
    /// Dotted module or member name being imported.
    pub name: String,
    /// Name bound in the importing scope. For `import a.b` without an alias
    /// this is `a`.
    pub bound: Ident,
    /// Whether the source spells an explicit `as` clause.
    pub aliased: bool,
}

impl Alias {
    pub fn new(name: &str, asname: Option<&str>) -> Self {
        let bound = match asname {
            Some(a) => a.to_string(),
            None => name.split('.').next().unwrap_or(name).to_string(),
        };
        Alias {
            name: name.to_string(),
            bound: Ident::new(bound),
            aliased: asname.is_some(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Arg {
    Positional(Expr),
    Starred(Expr),
    Keyword(String, Expr),
    DoubleStarred(Expr),
}

impl Arg {
    pub fn expr(&self) -> &Expr {
        match self {
            Arg::Positional(e) | Arg::Starred(e) | Arg::Keyword(_, e) | Arg::DoubleStarred(e) => e,
        }
    }

    pub fn expr_mut(&mut self) -> &mut Expr {
        match self {
            Arg::Positional(e) | Arg::Starred(e) | Arg::Keyword(_, e) | Arg::DoubleStarred(e) => e,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comprehension {
    pub target: Expr,
    pub iter: Expr,
    pub ifs: Vec<Expr>,
    pub is_async: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FStringPart {
    Literal(String),
    Field {
        expr: Box<Expr>,
        /// For `=` debug fields, the field text as written up to and
        /// including the `=` and any whitespace after it.
        debug: Option<String>,
        conversion: Option<char>,
        spec: Vec<FStringPart>,
    },
}

/// One literal piece of a (possibly implicitly concatenated) string.
#[derive(Debug, Clone, PartialEq)]
pub enum StrPiece {
    /// Verbatim literal text including prefix and quotes.
    Plain(String),
    FString {
        prefix: String,
        quote: String,
        parts: Vec<FStringPart>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mult,
    MatMult,
    Div,
    FloorDiv,
    Mod,
    Pow,
    LShift,
    RShift,
    BitOr,
    BitXor,
    BitAnd,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mult => "*",
            BinOp::MatMult => "@",
            BinOp::Div => "/",
            BinOp::FloorDiv => "//",
            BinOp::Mod => "%",
            BinOp::Pow => "**",
            BinOp::LShift => "<<",
            BinOp::RShift => ">>",
            BinOp::BitOr => "|",
            BinOp::BitXor => "^",
            BinOp::BitAnd => "&",
        }
    }

    pub fn from_symbol(s: &str) -> Option<BinOp> {
        Some(match s {
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mult,
            "@" => BinOp::MatMult,
            "/" => BinOp::Div,
            "//" => BinOp::FloorDiv,
            "%" => BinOp::Mod,
            "**" => BinOp::Pow,
            "<<" => BinOp::LShift,
            ">>" => BinOp::RShift,
            "|" => BinOp::BitOr,
            "^" => BinOp::BitXor,
            "&" => BinOp::BitAnd,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Not,
    Neg,
    Pos,
    Invert,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoolOp {
    And,
    Or,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    NotEq,
    Lt,
    LtE,
    Gt,
    GtE,
    Is,
    IsNot,
    In,
    NotIn,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::NotEq => "!=",
            CmpOp::Lt => "<",
            CmpOp::LtE => "<=",
            CmpOp::Gt => ">",
            CmpOp::GtE => ">=",
            CmpOp::Is => "is",
            CmpOp::IsNot => "is not",
            CmpOp::In => "in",
            CmpOp::NotIn => "not in",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Name(Ident),
    /// Integer, float or imaginary literal, verbatim.
    Num(String),
    Str(Vec<StrPiece>),
    Bool(bool),
    NoneLit,
    Ellipsis,
    BinOp {
        left: Box<Expr>,
        op: BinOp,
        right: Box<Expr>,
    },
    UnaryOp {
        op: UnaryOp,
        operand: Box<Expr>,
    },
    BoolOp {
        op: BoolOp,
        values: Vec<Expr>,
    },
    Compare {
        left: Box<Expr>,
        ops: Vec<CmpOp>,
        comparators: Vec<Expr>,
    },
    Call {
        func: Box<Expr>,
        args: Vec<Arg>,
    },
    Attribute {
        value: Box<Expr>,
        attr: String,
    },
    Subscript {
        value: Box<Expr>,
        index: Box<Expr>,
    },
    Slice {
        lower: Option<Box<Expr>>,
        upper: Option<Box<Expr>>,
        step: Option<Box<Expr>>,
    },
    List(Vec<Expr>),
    Tuple(Vec<Expr>),
    Set(Vec<Expr>),
    /// `None` key marks a `**mapping` entry.
    Dict(Vec<(Option<Expr>, Expr)>),
    ListComp {
        elt: Box<Expr>,
        generators: Vec<Comprehension>,
    },
    SetComp {
        elt: Box<Expr>,
        generators: Vec<Comprehension>,
    },
    DictComp {
        key: Box<Expr>,
        value: Box<Expr>,
        generators: Vec<Comprehension>,
    },
    GeneratorExp {
        elt: Box<Expr>,
        generators: Vec<Comprehension>,
    },
    Lambda {
        params: Box<Params>,
        body: Box<Expr>,
    },
    IfExp {
        test: Box<Expr>,
        body: Box<Expr>,
        orelse: Box<Expr>,
    },
    Starred(Box<Expr>),
    NamedExpr {
        target: Ident,
        value: Box<Expr>,
    },
    Yield(Option<Box<Expr>>),
    YieldFrom(Box<Expr>),
    Await(Box<Expr>),
}

impl Expr {
    pub fn name(n: &str) -> Expr {
        Expr::Name(Ident::new(n))
    }

    pub fn int(v: i64) -> Expr {
        if v < 0 {
            Expr::UnaryOp {
                op: UnaryOp::Neg,
                operand: Box::new(Expr::Num((-v).to_string())),
            }
        } else {
            Expr::Num(v.to_string())
        }
    }

    pub fn string(text: &str) -> Expr {
        Expr::Str(vec![StrPiece::Plain(format!("{text:?}").replace("\\'", "'"))])
    }

    pub fn call(func: Expr, args: Vec<Expr>) -> Expr {
        Expr::Call {
            func: Box::new(func),
            args: args.into_iter().map(Arg::Positional).collect(),
        }
    }

    pub fn attr(value: Expr, attr: &str) -> Expr {
        Expr::Attribute {
            value: Box::new(value),
            attr: attr.to_string(),
        }
    }

    pub fn subscript(value: Expr, index: Expr) -> Expr {
        Expr::Subscript {
            value: Box::new(value),
            index: Box::new(index),
        }
    }

    pub fn binop(left: Expr, op: BinOp, right: Expr) -> Expr {
        Expr::BinOp {
            left: Box::new(left),
            op,
            right: Box::new(right),
        }
    }

    pub fn compare(left: Expr, op: CmpOp, right: Expr) -> Expr {
        Expr::Compare {
            left: Box::new(left),
            ops: vec![op],
            comparators: vec![right],
        }
    }

    pub fn as_name(&self) -> Option<&str> {
        match self {
            Expr::Name(id) => Some(&id.name),
            _ => None,
        }
    }

    /// Immediate sub-expressions in evaluation order. Comprehension and
    /// lambda internals are included.
    pub fn children(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        match self {
            Expr::Name(_) | Expr::Num(_) | Expr::Bool(_) | Expr::NoneLit | Expr::Ellipsis => {}
            Expr::Str(pieces) => {
                for p in pieces {
                    if let StrPiece::FString { parts, .. } = p {
                        fstring_children(parts, &mut out);
                    }
                }
            }
            Expr::BinOp { left, right, .. } => {
                out.push(&**left);
                out.push(&**right);
            }
            Expr::UnaryOp { operand, .. } => out.push(&**operand),
            Expr::BoolOp { values, .. } => out.extend(values.iter()),
            Expr::Compare {
                left, comparators, ..
            } => {
                out.push(&**left);
                out.extend(comparators.iter());
            }
            Expr::Call { func, args } => {
                out.push(&**func);
                out.extend(args.iter().map(Arg::expr));
            }
            Expr::Attribute { value, .. } => out.push(&**value),
            Expr::Subscript { value, index } => {
                out.push(&**value);
                out.push(&**index);
            }
            Expr::Slice { lower, upper, step } => {
                out.extend(lower.iter().map(|b| &**b));
                out.extend(upper.iter().map(|b| &**b));
                out.extend(step.iter().map(|b| &**b));
            }
            Expr::List(v) | Expr::Tuple(v) | Expr::Set(v) => out.extend(v.iter()),
            Expr::Dict(items) => {
                for (k, v) in items {
                    if let Some(k) = k {
                        out.push(k);
                    }
                    out.push(v);
                }
            }
            Expr::ListComp { elt, generators }
            | Expr::SetComp { elt, generators }
            | Expr::GeneratorExp { elt, generators } => {
                comp_children(generators, &mut out);
                out.push(&**elt);
            }
            Expr::DictComp {
                key,
                value,
                generators,
            } => {
                comp_children(generators, &mut out);
                out.push(&**key);
                out.push(&**value);
            }
            Expr::Lambda { params, body } => {
                for p in params.all() {
                    if let Some(d) = &p.default {
                        out.push(d);
                    }
                }
                out.push(&**body);
            }
            Expr::IfExp { test, body, orelse } => {
                out.push(&**test);
                out.push(&**body);
                out.push(&**orelse);
            }
            Expr::Starred(e) | Expr::YieldFrom(e) | Expr::Await(e) => out.push(&**e),
            Expr::NamedExpr { value, .. } => out.push(&**value),
            Expr::Yield(e) => out.extend(e.iter().map(|b| &**b)),
        }
        out
    }

    /// Depth-first pre-order walk over this expression and all descendants.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    /// Mutable pre-order walk. The callback sees a node before its children.
    pub fn walk_mut(&mut self, f: &mut dyn FnMut(&mut Expr)) {
        f(self);
        for_each_child_mut(self, &mut |c| c.walk_mut(f));
    }

    /// Mutable post-order walk: children are rewritten before their parent.
    pub fn walk_post_mut(&mut self, f: &mut dyn FnMut(&mut Expr)) {
        for_each_child_mut(self, &mut |c| c.walk_post_mut(f));
        f(self);
    }

    pub fn any(&self, pred: &mut dyn FnMut(&Expr) -> bool) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            if !found && pred(e) {
                found = true;
            }
        });
        found
    }
}

fn fstring_children<'a>(parts: &'a [FStringPart], out: &mut Vec<&'a Expr>) {
    for p in parts {
        if let FStringPart::Field { expr, spec, .. } = p {
            out.push(&**expr);
            fstring_children(spec, out);
        }
    }
}

fn fstring_children_mut(parts: &mut [FStringPart], f: &mut dyn FnMut(&mut Expr)) {
    for p in parts {
        if let FStringPart::Field { expr, spec, .. } = p {
            f(expr);
            fstring_children_mut(spec, f);
        }
    }
}

fn comp_children<'a>(generators: &'a [Comprehension], out: &mut Vec<&'a Expr>) {
    for g in generators {
        out.push(&g.iter);
        out.push(&g.target);
        out.extend(g.ifs.iter());
    }
}

pub fn for_each_child_mut(e: &mut Expr, f: &mut dyn FnMut(&mut Expr)) {
    match e {
        Expr::Name(_) | Expr::Num(_) | Expr::Bool(_) | Expr::NoneLit | Expr::Ellipsis => {}
        Expr::Str(pieces) => {
            for p in pieces {
                if let StrPiece::FString { parts, .. } = p {
                    fstring_children_mut(parts, f);
                }
            }
        }
        Expr::BinOp { left, right, .. } => {
            f(left);
            f(right);
        }
        Expr::UnaryOp { operand, .. } => f(operand),
        Expr::BoolOp { values, .. } => values.iter_mut().for_each(f),
        Expr::Compare {
            left, comparators, ..
        } => {
            f(left);
            comparators.iter_mut().for_each(f);
        }
        Expr::Call { func, args } => {
            f(func);
            for a in args {
                f(a.expr_mut());
            }
        }
        Expr::Attribute { value, .. } => f(value),
        Expr::Subscript { value, index } => {
            f(value);
            f(index);
        }
        Expr::Slice { lower, upper, step } => {
            for b in [lower, upper, step].into_iter().flatten() {
                f(b);
            }
        }
        Expr::List(v) | Expr::Tuple(v) | Expr::Set(v) => v.iter_mut().for_each(f),
        Expr::Dict(items) => {
            for (k, v) in items {
                if let Some(k) = k {
                    f(k);
                }
                f(v);
            }
        }
        Expr::ListComp { elt, generators }
        | Expr::SetComp { elt, generators }
        | Expr::GeneratorExp { elt, generators } => {
            for g in generators.iter_mut() {
                f(&mut g.iter);
                f(&mut g.target);
                g.ifs.iter_mut().for_each(&mut *f);
            }
            f(elt);
        }
        Expr::DictComp {
            key,
            value,
            generators,
        } => {
            for g in generators.iter_mut() {
                f(&mut g.iter);
                f(&mut g.target);
                g.ifs.iter_mut().for_each(&mut *f);
            }
            f(key);
            f(value);
        }
        Expr::Lambda { params, body } => {
            for p in params.all_mut() {
                if let Some(d) = &mut p.default {
                    f(d);
                }
            }
            f(body);
        }
        Expr::IfExp { test, body, orelse } => {
            f(test);
            f(body);
            f(orelse);
        }
        Expr::Starred(x) | Expr::YieldFrom(x) | Expr::Await(x) => f(x),
        Expr::NamedExpr { value, .. } => f(value),
        Expr::Yield(x) => {
            if let Some(x) = x {
                f(x);
            }
        }
    }
}

impl StmtKind {
    /// Expressions owned directly by this statement (headers only, nested
    /// statement blocks excluded), in evaluation order.
    pub fn header_exprs(&self) -> Vec<&Expr> {
        let mut out: Vec<&Expr> = Vec::new();
        match self {
            StmtKind::FunctionDef(f) => {
                out.extend(f.decorators.iter());
                for p in f.params.all() {
                    if let Some(d) = &p.default {
                        out.push(d);
                    }
                    if let Some(a) = &p.annotation {
                        out.push(a);
                    }
                }
                out.extend(f.returns.iter());
            }
            StmtKind::ClassDef(c) => {
                out.extend(c.decorators.iter());
                out.extend(c.bases.iter().map(Arg::expr));
            }
            StmtKind::Return(v) => out.extend(v.iter()),
            StmtKind::Delete(v) => out.extend(v.iter()),
            StmtKind::Assign { targets, value } => {
                out.push(value);
                out.extend(targets.iter());
            }
            StmtKind::AugAssign { target, value, .. } => {
                out.push(target);
                out.push(value);
            }
            StmtKind::AnnAssign {
                target,
                annotation,
                value,
            } => {
                out.extend(value.iter());
                out.push(target);
                out.push(annotation);
            }
            StmtKind::For { target, iter, .. } => {
                out.push(iter);
                out.push(target);
            }
            StmtKind::While { test, .. } | StmtKind::If { test, .. } => out.push(test),
            StmtKind::With { items, .. } => {
                for it in items {
                    out.push(&it.context);
                    out.extend(it.target.iter());
                }
            }
            StmtKind::Raise { exc, cause } => {
                out.extend(exc.iter());
                out.extend(cause.iter());
            }
            StmtKind::Try { handlers, .. } => {
                for h in handlers {
                    out.extend(h.kind.iter());
                }
            }
            StmtKind::Assert { test, msg } => {
                out.push(test);
                out.extend(msg.iter());
            }
            StmtKind::Expr(e) => out.push(e),
            StmtKind::Import(_)
            | StmtKind::ImportFrom { .. }
            | StmtKind::Global(_)
            | StmtKind::Nonlocal(_)
            | StmtKind::Pass
            | StmtKind::Break
            | StmtKind::Continue
            | StmtKind::Opaque(_) => {}
        }
        out
    }

    pub fn header_exprs_mut(&mut self) -> Vec<&mut Expr> {
        let mut out: Vec<&mut Expr> = Vec::new();
        match self {
            StmtKind::FunctionDef(f) => {
                out.extend(f.decorators.iter_mut());
                for p in f.params.all_mut() {
                    if let Some(d) = &mut p.default {
                        out.push(d);
                    }
                    if let Some(a) = &mut p.annotation {
                        out.push(a);
                    }
                }
                out.extend(f.returns.iter_mut());
            }
            StmtKind::ClassDef(c) => {
                out.extend(c.decorators.iter_mut());
                out.extend(c.bases.iter_mut().map(Arg::expr_mut));
            }
            StmtKind::Return(v) => out.extend(v.iter_mut()),
            StmtKind::Delete(v) => out.extend(v.iter_mut()),
            StmtKind::Assign { targets, value } => {
                out.push(value);
                out.extend(targets.iter_mut());
            }
            StmtKind::AugAssign { target, value, .. } => {
                out.push(target);
                out.push(value);
            }
            StmtKind::AnnAssign {
                target,
                annotation,
                value,
            } => {
                out.extend(value.iter_mut());
                out.push(target);
                out.push(annotation);
            }
            StmtKind::For { target, iter, .. } => {
                out.push(iter);
                out.push(target);
            }
            StmtKind::While { test, .. } | StmtKind::If { test, .. } => out.push(test),
            StmtKind::With { items, .. } => {
                for it in items {
                    out.push(&mut it.context);
                    out.extend(it.target.iter_mut());
                }
            }
            StmtKind::Raise { exc, cause } => {
                out.extend(exc.iter_mut());
                out.extend(cause.iter_mut());
            }
            StmtKind::Try { handlers, .. } => {
                for h in handlers {
                    out.extend(h.kind.iter_mut());
                }
            }
            StmtKind::Assert { test, msg } => {
                out.push(test);
                out.extend(msg.iter_mut());
            }
            StmtKind::Expr(e) => out.push(e),
            _ => {}
        }
        out
    }
}

/// Visits every statement in the block tree, pre-order.
pub fn walk_stmts<'a>(body: &'a [Stmt], f: &mut dyn FnMut(&'a Stmt)) {
    for s in body {
        f(s);
        for b in s.blocks() {
            walk_stmts(b, f);
        }
    }
}

pub fn walk_stmts_mut(body: &mut [Stmt], f: &mut dyn FnMut(&mut Stmt)) {
    for s in body.iter_mut() {
        f(s);
        for b in s.blocks_mut() {
            walk_stmts_mut(b, f);
        }
    }
}

/// Visits every expression reachable from the block tree.
pub fn walk_exprs<'a>(body: &'a [Stmt], f: &mut dyn FnMut(&'a Expr)) {
    walk_stmts(body, &mut |s| {
        for e in s.kind.header_exprs() {
            e.walk(f);
        }
    });
}

pub fn walk_exprs_mut(body: &mut [Stmt], f: &mut dyn FnMut(&mut Expr)) {
    walk_stmts_mut(body, &mut |s| {
        for e in s.kind.header_exprs_mut() {
            e.walk_mut(f);
        }
    });
}

/// Finds the statement carrying `id` anywhere in the tree.
pub fn find_stmt(body: &[Stmt], id: LineageId) -> Option<&Stmt> {
    let mut found = None;
    walk_stmts(body, &mut |s| {
        if found.is_none() && s.lineage == Some(id) {
            found = Some(s);
        }
    });
    found
}

/// Path of block indices locating a statement: alternating (statement index,
/// block index) pairs ending with the statement's index in its block.
pub type StmtPath = Vec<usize>;

pub fn find_path(body: &[Stmt], id: LineageId) -> Option<StmtPath> {
    for (i, s) in body.iter().enumerate() {
        if s.lineage == Some(id) {
            return Some(vec![i]);
        }
        for (bi, b) in s.blocks().into_iter().enumerate() {
            if let Some(mut rest) = find_path(b, id) {
                let mut p = vec![i, bi];
                p.append(&mut rest);
                return Some(p);
            }
        }
    }
    None
}

/// Resolves a path to the block containing the statement plus its index.
pub fn block_at_mut<'a>(body: &'a mut Vec<Stmt>, path: &[usize]) -> Option<(&'a mut Vec<Stmt>, usize)> {
    if path.len() == 1 {
        return Some((body, path[0]));
    }
    let stmt = body.get_mut(path[0])?;
    let block = stmt.blocks_mut().into_iter().nth(path[1])?;
    block_at_mut(block, &path[2..])
}

pub fn block_at<'a>(body: &'a Vec<Stmt>, path: &[usize]) -> Option<(&'a Vec<Stmt>, usize)> {
    if path.len() == 1 {
        return Some((body, path[0]));
    }
    let stmt = body.get(path[0])?;
    let block = stmt.blocks().into_iter().nth(path[1])?;
    block_at(block, &path[2..])
}

/// Statements enclosing the statement at `path`, outermost first.
pub fn ancestors<'a>(body: &'a [Stmt], path: &[usize]) -> Vec<&'a Stmt> {
    let mut out = Vec::new();
    let mut block = body;
    let mut i = 0;
    while i + 1 < path.len() {
        let s = &block[path[i]];
        out.push(s);
        block = s.blocks()[path[i + 1]];
        i += 2;
    }
    out
}

/// Assigns fresh occurrence ids to every identifier in the module.
pub fn number_idents(module: &mut Module) -> u32 {
    let mut next = 0u32;
    let mut bump = |id: &mut Ident| {
        next += 1;
        id.id = next;
    };
    visit_idents_mut(&mut module.body, &mut bump);
    next
}

/// Calls `f` on every identifier that names a variable binding or reference:
/// `Name` expressions, def/class names, parameters, import bindings,
/// `global`/`nonlocal` names, walrus targets and `except ... as` names.
pub fn visit_idents_mut(body: &mut [Stmt], f: &mut dyn FnMut(&mut Ident)) {
    for s in body.iter_mut() {
        visit_stmt_idents_mut(s, f);
    }
}

fn visit_params_mut(params: &mut Params, f: &mut dyn FnMut(&mut Ident)) {
    for p in params.all_mut() {
        f(&mut p.name);
    }
}

fn visit_expr_idents_mut(e: &mut Expr, f: &mut dyn FnMut(&mut Ident)) {
    match e {
        Expr::Name(id) => f(id),
        Expr::NamedExpr { target, value } => {
            visit_expr_idents_mut(value, f);
            f(target);
        }
        Expr::Lambda { params, body } => {
            for p in params.all_mut() {
                if let Some(d) = &mut p.default {
                    visit_expr_idents_mut(d, f);
                }
            }
            visit_params_mut(params, f);
            visit_expr_idents_mut(body, f);
        }
        _ => for_each_child_mut(e, &mut |c| visit_expr_idents_mut(c, f)),
    }
}

fn visit_stmt_idents_mut(s: &mut Stmt, f: &mut dyn FnMut(&mut Ident)) {
    match &mut s.kind {
        StmtKind::FunctionDef(func) => {
            for d in &mut func.decorators {
                visit_expr_idents_mut(d, f);
            }
            for p in func.params.all_mut() {
                if let Some(d) = &mut p.default {
                    visit_expr_idents_mut(d, f);
                }
                if let Some(a) = &mut p.annotation {
                    visit_expr_idents_mut(a, f);
                }
            }
            if let Some(r) = &mut func.returns {
                visit_expr_idents_mut(r, f);
            }
            f(&mut func.name);
            visit_params_mut(&mut func.params, f);
            visit_idents_mut(&mut func.body, f);
        }
        StmtKind::ClassDef(c) => {
            for d in &mut c.decorators {
                visit_expr_idents_mut(d, f);
            }
            for b in &mut c.bases {
                visit_expr_idents_mut(b.expr_mut(), f);
            }
            f(&mut c.name);
            visit_idents_mut(&mut c.body, f);
        }
        StmtKind::Import(names) | StmtKind::ImportFrom { names, .. } => {
            for a in names {
                f(&mut a.bound);
            }
        }
        StmtKind::Global(names) | StmtKind::Nonlocal(names) => {
            for n in names {
                f(n);
            }
        }
        StmtKind::Try {
            body,
            handlers,
            orelse,
            finalbody,
        } => {
            visit_idents_mut(body, f);
            for h in handlers {
                if let Some(k) = &mut h.kind {
                    visit_expr_idents_mut(k, f);
                }
                if let Some(n) = &mut h.name {
                    f(n);
                }
                visit_idents_mut(&mut h.body, f);
            }
            visit_idents_mut(orelse, f);
            visit_idents_mut(finalbody, f);
        }
        _ => {
            for e in s.kind.header_exprs_mut() {
                visit_expr_idents_mut(e, f);
            }
            for b in s.blocks_mut() {
                visit_idents_mut(b, f);
            }
        }
    }
}
