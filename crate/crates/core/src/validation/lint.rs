//! Linter score used by the non-degradation gate.
//!
//! The built-in linter reports a fixed subset of the usual Python checks and
//! scores a unit with the common 0–10 formula
//! `10 - 10 * (5E + W + R + C) / statements`. An external command can be
//! configured instead; its score is read from a "rated at X/10" line.

use std::collections::{BTreeMap, BTreeSet};
use std::process::Command;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::python::ast::*;
use crate::python::scope::{analyze, BindKind, Resolution, ScopeKind, ScopeTable};
use crate::python::{emit_module, is_builtin, parse_module};
use crate::unit::ProgramUnit;

pub const MAX_LINE_LENGTH: usize = 100;
pub const MAX_NESTED_BLOCKS: usize = 5;
pub const MAX_BRANCHES: usize = 12;
pub const MAX_STATEMENTS: usize = 50;
pub const MAX_LOCALS: usize = 15;
pub const MAX_ARGUMENTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    #[serde(rename = "E")]
    Error,
    #[serde(rename = "W")]
    Warning,
    #[serde(rename = "R")]
    Refactor,
    #[serde(rename = "C")]
    Convention,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LintMessage {
    pub file: String,
    pub line: u32,
    pub category: Category,
    pub symbol: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LintReport {
    pub score: f64,
    pub statements: usize,
    pub messages: Vec<LintMessage>,
}

#[derive(Debug, Error)]
pub enum LintError {
    #[error("linter invocation failed: {0}")]
    Invocation(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinterConfig {
    /// External linter command; `{dir}` is replaced by the materialized unit
    /// directory and `{files}` by its source paths. The built-in linter is
    /// used when unset.
    #[serde(default)]
    pub command: Option<String>,
    /// Fail instead of passing the gate when the external linter cannot run.
    #[serde(default)]
    pub strict: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Linter {
    pub config: LinterConfig,
}

impl Linter {
    pub fn new(config: LinterConfig) -> Self {
        Linter { config }
    }

    /// The unit's score; `Ok(None)` when an external linter is configured
    /// but unavailable and strict mode is off.
    pub fn score(&self, unit: &ProgramUnit) -> Result<Option<f64>, LintError> {
        let Some(cmd) = &self.config.command else {
            return Ok(Some(lint_unit(unit).score));
        };
        match run_external(cmd, unit) {
            Ok(s) => Ok(Some(s)),
            Err(e) if self.config.strict => Err(e),
            Err(e) => {
                log::warn!("{e}; lint gate passes");
                Ok(None)
            }
        }
    }
}

fn run_external(cmd: &str, unit: &ProgramUnit) -> Result<f64, LintError> {
    let fail = |m: String| LintError::Invocation(m);
    let dir = tempfile::tempdir().map_err(|e| fail(e.to_string()))?;
    unit.write_to(dir.path()).map_err(|e| fail(e.to_string()))?;
    let files: Vec<String> = unit
        .manifest
        .source_files
        .iter()
        .map(|f| dir.path().join(f).display().to_string())
        .collect();
    let mut parts = cmd.split_whitespace().flat_map(|w| match w {
        "{files}" => files.clone(),
        other => vec![other.replace("{dir}", &dir.path().display().to_string())],
    });
    let program = parts.next().ok_or_else(|| fail("empty linter command".into()))?;
    let out = Command::new(&program)
        .args(parts)
        .current_dir(dir.path())
        .output()
        .map_err(|e| fail(format!("{program}: {e}")))?;
    let text = String::from_utf8_lossy(&out.stdout);
    parse_rating(&text).ok_or_else(|| fail(format!("{program}: no 'rated at' line in output")))
}

/// Extracts the score from a "Your code has been rated at 9.62/10" line.
pub fn parse_rating(text: &str) -> Option<f64> {
    let at = text.find("rated at ")? + "rated at ".len();
    let rest = &text[at..];
    let end = rest.find('/')?;
    rest[..end].trim().parse().ok()
}

/// Runs the built-in checks over every source file of the unit.
pub fn lint_unit(unit: &ProgramUnit) -> LintReport {
    let mut messages = Vec::new();
    let mut statements = 0;
    for (path, f) in unit.files() {
        let text = emit_module(&f.module);
        let mut module = parse_module(&text).expect("emitted source parses");
        number_idents(&mut module);
        walk_stmts(&module.body, &mut |_| statements += 1);
        messages.extend(lint_module(path, &module, &text));
    }
    messages.sort_by(|a, b| (&a.file, a.line, &a.symbol).cmp(&(&b.file, b.line, &b.symbol)));
    LintReport {
        score: score(&messages, statements),
        statements,
        messages,
    }
}

pub fn score(messages: &[LintMessage], statements: usize) -> f64 {
    if statements == 0 {
        return 10.0;
    }
    let weight: usize = messages
        .iter()
        .map(|m| if m.category == Category::Error { 5 } else { 1 })
        .sum();
    10.0 - 10.0 * weight as f64 / statements as f64
}

struct Ctx<'a> {
    file: &'a str,
    out: Vec<LintMessage>,
}

impl Ctx<'_> {
    fn push(&mut self, line: u32, category: Category, symbol: &str, message: String) {
        self.out.push(LintMessage {
            file: self.file.to_string(),
            line,
            category,
            symbol: symbol.to_string(),
            message,
        });
    }
}

fn lint_module(file: &str, module: &Module, text: &str) -> Vec<LintMessage> {
    let table = analyze(module);
    let mut cx = Ctx { file, out: Vec::new() };
    for (i, l) in text.lines().enumerate() {
        let n = l.chars().count();
        if n > MAX_LINE_LENGTH {
            cx.push(i as u32 + 1, Category::Convention, "line-too-long", format!("Line too long ({n}/{MAX_LINE_LENGTH})"));
        }
    }
    let star = has_star_import(module);
    let lines = binding_lines(module);
    let used = used_names(module, &table);
    if !star {
        undefined_names(module, &table, &mut cx);
    }
    unused_imports(module, &table, &used, &lines, &mut cx);
    scope_checks(&table, &used, &lines, &mut cx);
    statement_checks(&module.body, &mut cx);
    cx.out
}

fn has_star_import(module: &Module) -> bool {
    let mut star = false;
    walk_stmts(&module.body, &mut |s| {
        if let StmtKind::ImportFrom { names, .. } = &s.kind {
            star |= names.iter().any(|a| a.name == "*");
        }
    });
    star
}

/// Line of the statement containing each identifier occurrence.
fn binding_lines(module: &Module) -> BTreeMap<u32, u32> {
    let mut out = BTreeMap::new();
    walk_stmts(&module.body, &mut |s| {
        for_stmt_idents(s, &mut |id| {
            out.insert(id.id, s.line);
        });
    });
    out
}

/// Identifiers of a statement's own header (nested blocks excluded),
/// including the name and parameters of a `def` and the names of imports.
fn for_stmt_idents<'a>(s: &'a Stmt, f: &mut dyn FnMut(&'a Ident)) {
    let single = std::slice::from_ref(s);
    let mut header: Vec<&Ident> = Vec::new();
    crate::python::scope::walk_stmt_idents(single, &mut |id| header.push(id));
    let mut nested: BTreeSet<u32> = BTreeSet::new();
    for b in s.blocks() {
        crate::python::scope::walk_stmt_idents(b, &mut |id| {
            nested.insert(id.id);
        });
    }
    for id in header {
        if !nested.contains(&id.id) {
            f(id);
        }
    }
}

/// (scope, name) pairs that are read somewhere: loads and augmented
/// assignment targets.
fn used_names(module: &Module, table: &ScopeTable) -> BTreeSet<(usize, String)> {
    let mut out = BTreeSet::new();
    for o in table.occurrences.values() {
        if let (None, Resolution::Scope(s)) = (o.binding, o.resolved) {
            out.insert((s, o.name.clone()));
        }
    }
    walk_stmts(&module.body, &mut |s| {
        if let StmtKind::AugAssign { target: Expr::Name(id), .. } = &s.kind {
            if let Resolution::Scope(sc) = table.resolve(id) {
                out.insert((sc, id.name.clone()));
            }
        }
    });
    // names exported through __all__ count as used at module level
    for s in &module.body {
        if let StmtKind::Assign { targets, value } = &s.kind {
            if targets.iter().any(|t| t.as_name() == Some("__all__")) {
                value.walk(&mut |e| {
                    if let Expr::Str(pieces) = e {
                        if let Some(text) = str_value(pieces) {
                            out.insert((0, text));
                        }
                    }
                });
            }
        }
    }
    out
}

fn str_value(pieces: &[StrPiece]) -> Option<String> {
    let mut out = String::new();
    for p in pieces {
        let StrPiece::Plain(raw) = p else {
            return None;
        };
        let body = raw.trim_start_matches(|c: char| c.is_ascii_alphabetic());
        out.push_str(body.trim_matches(|c| c == '"' || c == '\''));
    }
    Some(out)
}

fn undefined_names(module: &Module, table: &ScopeTable, cx: &mut Ctx) {
    walk_stmts(&module.body, &mut |s| {
        for_stmt_idents(s, &mut |id| {
            let Some(o) = table.occurrence(id) else {
                return;
            };
            let dunder = id.name.starts_with("__") && id.name.ends_with("__");
            if o.binding.is_none() && o.resolved == Resolution::Unresolved && !dunder && !is_builtin(&id.name) {
                cx.push(s.line, Category::Error, "undefined-variable", format!("Undefined variable '{}'", id.name));
            }
        });
    });
}

fn unused_imports(
    module: &Module,
    table: &ScopeTable,
    used: &BTreeSet<(usize, String)>,
    lines: &BTreeMap<u32, u32>,
    cx: &mut Ctx,
) {
    walk_stmts(&module.body, &mut |s| {
        let aliases = match &s.kind {
            StmtKind::Import(names) => names,
            StmtKind::ImportFrom { module: Some(m), .. } if m == "__future__" => return,
            StmtKind::ImportFrom { names, .. } => names,
            _ => return,
        };
        for a in aliases {
            if a.name == "*" {
                continue;
            }
            let Some(o) = table.occurrence(&a.bound) else {
                continue;
            };
            let Resolution::Scope(sc) = o.resolved else {
                continue;
            };
            if !used.contains(&(sc, a.bound.name.clone())) {
                let line = lines.get(&a.bound.id).copied().unwrap_or(s.line);
                cx.push(line, Category::Warning, "unused-import", format!("Unused import {}", a.name));
            }
        }
    });
}

fn is_snake(name: &str) -> bool {
    let t = name.trim_start_matches('_');
    name == "_"
        || (t.starts_with(|c: char| c.is_ascii_lowercase())
            && t.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_'))
        || (name.starts_with("__") && name.ends_with("__"))
}

fn is_pascal(name: &str) -> bool {
    let t = name.trim_start_matches('_');
    t.starts_with(|c: char| c.is_ascii_uppercase()) && t.chars().all(|c| c.is_ascii_alphanumeric())
}

/// Per-scope checks: unused variables and arguments, shadowed module names,
/// naming conventions and local counts.
fn scope_checks(table: &ScopeTable, used: &BTreeSet<(usize, String)>, lines: &BTreeMap<u32, u32>, cx: &mut Ctx) {
    let module_names: BTreeSet<&String> = table.scopes[0].bindings.keys().collect();
    let first_line = |scope: usize, name: &str| {
        table
            .occurrences
            .iter()
            .filter(|(_, o)| o.scope == scope && o.name == name && o.binding.is_some())
            .filter_map(|(id, _)| lines.get(id).copied())
            .min()
            .unwrap_or(table.scopes[scope].line)
    };
    for (sid, scope) in table.scopes.iter().enumerate() {
        if scope.kind != ScopeKind::Function {
            continue;
        }
        let is_method = scope
            .parent
            .is_some_and(|p| table.scopes[p].kind == ScopeKind::Class);
        let mut locals = 0;
        for (name, kinds) in &scope.bindings {
            if scope.globals.contains(name) || scope.nonlocals.contains(name) {
                continue;
            }
            locals += 1;
            let line = first_line(sid, name);
            let read = used.contains(&(sid, name.clone()));
            let param = kinds.contains(&BindKind::Param);
            let receiver = is_method && (name == "self" || name == "cls");
            if name.starts_with('_') || receiver {
                continue;
            }
            if param && !read {
                cx.push(line, Category::Warning, "unused-argument", format!("Unused argument '{name}'"));
            } else if !read
                && kinds
                    .iter()
                    .all(|k| matches!(k, BindKind::Assign | BindKind::With | BindKind::Except | BindKind::Walrus))
            {
                cx.push(line, Category::Warning, "unused-variable", format!("Unused variable '{name}'"));
            }
            if module_names.contains(name)
                && kinds.iter().any(|k| matches!(k, BindKind::Param | BindKind::Assign | BindKind::Loop | BindKind::With | BindKind::Except))
            {
                cx.push(line, Category::Warning, "redefined-outer-name", format!("Redefining name '{name}' from outer scope"));
            }
            let variable = kinds.iter().all(|k| !matches!(k, BindKind::Function | BindKind::Class | BindKind::Import));
            if variable && !is_snake(name) {
                cx.push(line, Category::Convention, "invalid-name", format!("Variable name \"{name}\" doesn't conform to snake_case naming style"));
            }
        }
        if locals > MAX_LOCALS {
            cx.push(scope.line, Category::Refactor, "too-many-locals", format!("Too many local variables ({locals}/{MAX_LOCALS})"));
        }
    }
}

/// Statement-shaped checks: definitions, nesting, branches, comparisons,
/// pointless expressions and `global`.
fn statement_checks(body: &[Stmt], cx: &mut Ctx) {
    walk_stmts(body, &mut |s| match &s.kind {
        StmtKind::FunctionDef(f) => {
            if !is_snake(&f.name.name) {
                cx.push(s.line, Category::Convention, "invalid-name", format!("Function name \"{}\" doesn't conform to snake_case naming style", f.name.name));
            }
            let nargs = f.params.all().count();
            if nargs > MAX_ARGUMENTS {
                cx.push(s.line, Category::Refactor, "too-many-arguments", format!("Too many arguments ({nargs}/{MAX_ARGUMENTS})"));
            }
            let branches = count_branches(&f.body);
            if branches > MAX_BRANCHES {
                cx.push(s.line, Category::Refactor, "too-many-branches", format!("Too many branches ({branches}/{MAX_BRANCHES})"));
            }
            let stmts = count_statements(&f.body);
            if stmts > MAX_STATEMENTS {
                cx.push(s.line, Category::Refactor, "too-many-statements", format!("Too many statements ({stmts}/{MAX_STATEMENTS})"));
            }
            for st in &f.body {
                let depth = nesting(st);
                if depth > MAX_NESTED_BLOCKS {
                    cx.push(st.line, Category::Refactor, "too-many-nested-blocks", format!("Too many nested blocks ({depth}/{MAX_NESTED_BLOCKS})"));
                }
            }
        }
        StmtKind::ClassDef(c) => {
            if !is_pascal(&c.name.name) {
                cx.push(s.line, Category::Convention, "invalid-name", format!("Class name \"{}\" doesn't conform to PascalCase naming style", c.name.name));
            }
        }
        StmtKind::Global(_) => {
            cx.push(s.line, Category::Warning, "global-statement", "Using the global statement".into());
        }
        StmtKind::Expr(e) => {
            let pointless = matches!(
                e,
                Expr::Name(_)
                    | Expr::Num(_)
                    | Expr::Bool(_)
                    | Expr::NoneLit
                    | Expr::Attribute { .. }
                    | Expr::Compare { .. }
                    | Expr::BinOp { .. }
                    | Expr::Tuple(_)
                    | Expr::List(_)
                    | Expr::Subscript { .. }
            );
            if pointless {
                cx.push(s.line, Category::Warning, "pointless-statement", "Statement seems to have no effect".into());
            }
        }
        _ => {
            for h in s.kind.header_exprs() {
                h.walk(&mut |e| {
                    if let Expr::Compare { left, comparators, .. } = e {
                        let mut prev = &**left;
                        for c in comparators {
                            if is_literal(prev) && is_literal(c) {
                                cx.push(s.line, Category::Refactor, "comparison-of-constants", "Comparison between constants".into());
                            } else if prev == c && matches!(c, Expr::Name(_) | Expr::Attribute { .. }) {
                                cx.push(s.line, Category::Refactor, "comparison-with-itself", "Redundant comparison".into());
                            }
                            prev = c;
                        }
                    }
                });
            }
        }
    });
}

fn is_literal(e: &Expr) -> bool {
    matches!(e, Expr::Num(_) | Expr::Str(_) | Expr::Bool(_) | Expr::NoneLit)
}

/// Nesting depth of block statements, not descending into nested
/// definitions; an `elif` continues its `if`.
fn nesting(s: &Stmt) -> usize {
    let inner = |body: &[Stmt]| body.iter().map(nesting).max().unwrap_or(0);
    match &s.kind {
        StmtKind::FunctionDef(_) | StmtKind::ClassDef(_) => 0,
        StmtKind::If { body, orelse, .. } => {
            let else_depth = match orelse.as_slice() {
                [only] if matches!(only.kind, StmtKind::If { .. }) => nesting(only).saturating_sub(1),
                other => inner(other),
            };
            1 + inner(body).max(else_depth)
        }
        _ if s.is_compound() => 1 + s.blocks().into_iter().map(|b| inner(b)).max().unwrap_or(0),
        _ => 0,
    }
}

fn count_branches(body: &[Stmt]) -> usize {
    let mut n = 0;
    for s in body {
        match &s.kind {
            StmtKind::FunctionDef(_) | StmtKind::ClassDef(_) => continue,
            StmtKind::If { body, orelse, .. } => {
                n += 1;
                n += count_branches(body);
                match orelse.as_slice() {
                    [] => {}
                    [only] if matches!(only.kind, StmtKind::If { .. }) => n += count_branches(orelse),
                    _ => n += 1 + count_branches(orelse),
                }
            }
            StmtKind::For { body, orelse, .. } | StmtKind::While { body, orelse, .. } => {
                n += 1 + usize::from(!orelse.is_empty());
                n += count_branches(body) + count_branches(orelse);
            }
            StmtKind::Try { body, handlers, orelse, finalbody } => {
                n += handlers.len() + usize::from(!orelse.is_empty()) + usize::from(!finalbody.is_empty());
                n += count_branches(body) + count_branches(orelse) + count_branches(finalbody);
                for h in handlers {
                    n += count_branches(&h.body);
                }
            }
            StmtKind::With { body, .. } => n += count_branches(body),
            _ => {}
        }
    }
    n
}

fn count_statements(body: &[Stmt]) -> usize {
    body.iter()
        .map(|s| match &s.kind {
            StmtKind::FunctionDef(_) | StmtKind::ClassDef(_) => 1,
            _ => 1 + s.blocks().into_iter().map(|b| count_statements(b)).sum::<usize>(),
        })
        .sum()
}

/// Lints a single file's text; used by tests and the CLI.
pub fn lint_source(file: &str, text: &str) -> Result<Vec<LintMessage>, crate::python::SyntaxError> {
    let mut module = parse_module(&emit_module(&parse_module(text)?))?;
    number_idents(&mut module);
    let emitted = emit_module(&module);
    Ok(lint_module(file, &module, &emitted))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn symbols(src: &str) -> Vec<String> {
        lint_source("m.py", src).unwrap().into_iter().map(|m| m.symbol).collect()
    }

    #[test]
    fn clean_code_has_no_messages() {
        let src = "import math\n\n\ndef area(radius):\n    \"\"\"Area.\"\"\"\n    total = math.pi * radius ** 2\n    return total\n";
        assert!(symbols(src).is_empty(), "{:?}", symbols(src));
    }

    #[test]
    fn each_check_fires() {
        assert_eq!(symbols("import os\n"), ["unused-import"]);
        assert_eq!(symbols("def f(x):\n    y = 1\n    return 2\n"), ["unused-argument", "unused-variable"]);
        assert_eq!(symbols("def f():\n    return zz\n"), ["undefined-variable"]);
        assert_eq!(symbols("def F():\n    return 1\n"), ["invalid-name"]);
        assert_eq!(symbols("class my_cls:\n    pass\n"), ["invalid-name"]);
        assert_eq!(symbols("x = 1\nx\n"), ["pointless-statement"]);
        assert_eq!(symbols("x = 1\n\n\ndef f():\n    x = 2\n    return x\n"), ["redefined-outer-name"]);
        assert_eq!(symbols("def f(a):\n    if a == a:\n        return 1\n    return 2\n"), ["comparison-with-itself"]);
        assert_eq!(symbols("if 1 == 2:\n    pass\n"), ["comparison-of-constants"]);
        assert_eq!(symbols("x = 1\n\n\ndef f():\n    global x\n    x = 2\n"), ["global-statement"]);
        let long = format!("x = '{}'\n", "a".repeat(100));
        assert_eq!(symbols(&long), ["line-too-long"]);
        assert_eq!(symbols("def f(a, b, c, d, e, g):\n    return a + b + c + d + e + g\n"), ["too-many-arguments"]);
    }

    #[test]
    fn nesting_and_branches() {
        let mut src = String::from("def f(x):\n");
        let mut indent = String::from("    ");
        for _ in 0..6 {
            src.push_str(&format!("{indent}if x:\n"));
            indent.push_str("    ");
        }
        src.push_str(&format!("{indent}return 1\n    return 0\n"));
        assert_eq!(symbols(&src), ["too-many-nested-blocks"]);
        let elifs: String = (0..13).map(|i| format!("    elif x == {i}:\n        return {i}\n")).collect();
        let src = format!("def f(x):\n    if x:\n        return -1\n{elifs}    return 0\n");
        assert_eq!(symbols(&src), ["too-many-branches"]);
    }

    #[test]
    fn score_formula() {
        let m = |c| LintMessage {
            file: "m.py".into(),
            line: 1,
            category: c,
            symbol: "x".into(),
            message: String::new(),
        };
        assert_eq!(score(&[], 10), 10.0);
        assert_eq!(score(&[m(Category::Error)], 10), 5.0);
        assert_eq!(score(&[m(Category::Warning), m(Category::Convention)], 20), 9.0);
        assert_eq!(parse_rating("Your code has been rated at 9.62/10 (previous"), Some(9.62));
    }

    #[test]
    fn unused_import_respects_all_and_future() {
        assert!(symbols("from __future__ import annotations\nimport os\n__all__ = ['os']\n").is_empty());
    }
}
