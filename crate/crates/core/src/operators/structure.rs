//! Structure operators S1–S12: control-flow nesting, threads, exception
//! handling, extraction into functions and modules, decorators, numpy calls,
//! assignment desugaring, loop-to-recursion and primitive-to-container.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use super::util::*;
use super::{Location, NameKind, OpRng, OperatorError, OperatorId, SyntheticName};
use crate::metrics::readability::is_compound_value;
use crate::python::ast::*;
use crate::python::emit::emit_stmts;
use crate::python::scope::{analyze, walk_stmt_idents, BindKind, Occurrence, Resolution, ScopeId, ScopeTable};
use crate::python::parse_module;
use crate::unit::ProgramUnit;

type Names = Vec<SyntheticName>;

/// First line of a statement's canonical text, for location descriptions.
pub(crate) fn header_text(s: &Stmt) -> String {
    let mut head = Stmt::new(s.kind.clone());
    for b in head.blocks_mut() {
        b.clear();
    }
    let text = emit_stmts(&[head]);
    let line = text.lines().next().unwrap_or("").trim().to_string();
    if line.chars().count() > 60 {
        line.chars().take(57).collect::<String>() + "..."
    } else {
        line
    }
}

fn fail(op: OperatorId, msg: impl Into<String>) -> OperatorError {
    OperatorError::TransformFailed(op, msg.into())
}

fn loc(file: &str, s: &Stmt) -> Option<Location> {
    s.lineage.map(|l| Location::new(file, l, header_text(s)))
}

fn parse_stmt(text: &str) -> Stmt {
    parse_module(text)
        .expect("template parses")
        .body
        .remove(0)
}

/// Block and index of the anchor statement, marking the file modified.
fn anchor<'a>(
    unit: &'a mut ProgramUnit,
    op: OperatorId,
    loc: &Location,
) -> Result<(&'a mut Vec<Stmt>, usize), OperatorError> {
    let module = unit
        .module_mut(&loc.file)
        .ok_or_else(|| fail(op, format!("no file {}", loc.file)))?;
    locate(&mut module.body, loc.lineage).ok_or_else(|| fail(op, "anchor statement vanished"))
}

fn info_for(body: &[Stmt], id: LineageId) -> Option<StmtInfo<'_>> {
    statements(body).into_iter().find(|i| i.stmt.lineage == Some(id))
}

pub fn locations(op: OperatorId, unit: &ProgramUnit, cx: &Cx) -> Vec<Location> {
    let mut out = Vec::new();
    for file in &unit.manifest.source_files {
        let Some(module) = unit.module(file) else {
            continue;
        };
        let Some(table) = cx.tables.get(file) else {
            continue;
        };
        let site = Site {
            file,
            module,
            table,
        };
        match op {
            OperatorId::S1 => s1_locations(&site, &mut out),
            OperatorId::S2 => s2_locations(&site, &mut out),
            OperatorId::S3 => s3_locations(&site, &mut out),
            OperatorId::S4 => s4_locations(&site, &mut out),
            OperatorId::S5 => s5_locations(&site, &mut out),
            OperatorId::S6 => s6_locations(&site, &mut out),
            OperatorId::S7 => s7_locations(&site, &mut out),
            OperatorId::S8 => s8_locations(&site, &mut out),
            OperatorId::S9 => s9_locations(&site, &mut out),
            OperatorId::S10 => s10_locations(&site, &mut out),
            OperatorId::S11 => s11_locations(&site, &mut out),
            OperatorId::S12 => s12_locations(&site, &mut out),
            _ => {}
        }
    }
    out
}

pub fn apply(
    op: OperatorId,
    unit: &mut ProgramUnit,
    cx: &Cx,
    loc: &Location,
    rng: &mut OpRng,
) -> Result<Names, OperatorError> {
    let mut fresh = cx.fresh();
    let table = cx
        .tables
        .get(&loc.file)
        .ok_or_else(|| fail(op, format!("no file {}", loc.file)))?;
    match op {
        OperatorId::S1 => s1_apply(unit, loc, &mut fresh),
        OperatorId::S2 => s2_apply(unit, loc, &mut fresh, rng),
        OperatorId::S3 => s3_apply(unit, loc, &mut fresh),
        OperatorId::S4 => s4_apply(unit, loc, &mut fresh),
        OperatorId::S5 => s5_apply(unit, loc, &mut fresh, rng),
        OperatorId::S6 => s6_apply(unit, table, loc, &mut fresh),
        OperatorId::S7 => s7_apply(unit, cx, table, loc, rng),
        OperatorId::S8 => s8_apply(unit, loc, &mut fresh),
        OperatorId::S9 => s9_apply(unit, table, loc),
        OperatorId::S10 => s10_apply(unit, loc),
        OperatorId::S11 => s11_apply(unit, table, loc, &mut fresh),
        OperatorId::S12 => s12_apply(unit, table, loc),
        _ => Err(OperatorError::NotApplicable(op, "not a structure operator".into())),
    }
}

struct Site<'a> {
    file: &'a str,
    module: &'a Module,
    table: &'a ScopeTable,
}

fn owner_is_class(info: &StmtInfo) -> bool {
    matches!(info.owner().map(|s| &s.kind), Some(StmtKind::ClassDef(_)))
}

// ---- S1: wrap a loop in a single-iteration outer loop

fn s1_locations(site: &Site, out: &mut Vec<Location>) {
    for info in statements(&site.module.body) {
        if let StmtKind::For { is_async: false, .. } = info.stmt.kind {
            out.extend(loc(site.file, info.stmt));
        }
    }
}

fn s1_apply(unit: &mut ProgramUnit, loc: &Location, fresh: &mut Fresh) -> Result<Names, OperatorError> {
    let op = OperatorId::S1;
    let (block, i) = anchor(unit, op, loc)?;
    let StmtKind::For {
        target,
        iter,
        body,
        orelse,
        ..
    } = block[i].kind.clone()
    else {
        return Err(fail(op, "anchor is not a for loop"));
    };
    let batch = fresh.name("batch");
    let hints = hints_of(&iter);
    let inner = Stmt {
        kind: StmtKind::For {
            target,
            iter: Expr::name(&batch),
            body,
            orelse,
            is_async: false,
        },
        lineage: block[i].lineage,
        line: block[i].line,
    };
    block[i] = Stmt::new(StmtKind::For {
        target: Expr::name(&batch),
        iter: Expr::List(vec![iter]),
        body: vec![inner],
        orelse: Vec::new(),
        is_async: false,
    });
    Ok(vec![SyntheticName::new(&batch, NameKind::Variable, "batch", hints)])
}

// ---- S2: guard an if body with an always-true compound condition

fn s2_locations(site: &Site, out: &mut Vec<Location>) {
    for info in statements(&site.module.body) {
        if matches!(info.stmt.kind, StmtKind::If { .. }) && !owner_is_class(&info) {
            out.extend(loc(site.file, info.stmt));
        }
    }
}

fn s2_apply(
    unit: &mut ProgramUnit,
    loc: &Location,
    fresh: &mut Fresh,
    rng: &mut OpRng,
) -> Result<Names, OperatorError> {
    let op = OperatorId::S2;
    let (block, i) = anchor(unit, op, loc)?;
    let StmtKind::If { test, body, .. } = &mut block[i].kind else {
        return Err(fail(op, "anchor is not an if statement"));
    };
    let hints = hints_of(test);
    let a = fresh.name("condition");
    let b = fresh.name("condition");
    let inner = std::mem::take(body);
    *body = vec![
        assign(&a, Expr::int(rng.gen_range(1..=99))),
        assign(&b, Expr::int(rng.gen_range(1..=99))),
        Stmt::new(StmtKind::If {
            test: Expr::BoolOp {
                op: BoolOp::And,
                values: vec![Expr::name(&a), Expr::name(&b)],
            },
            body: inner,
            orelse: Vec::new(),
        }),
    ];
    Ok(vec![
        SyntheticName::new(&a, NameKind::Variable, "condition", hints.clone()),
        SyntheticName::new(&b, NameKind::Variable, "condition", hints),
    ])
}

// ---- S3: run a loop body inside a single-iteration while loop

fn s3_locations(site: &Site, out: &mut Vec<Location>) {
    for info in statements(&site.module.body) {
        let body = match &info.stmt.kind {
            StmtKind::For { body, .. } | StmtKind::While { body, .. } => body,
            _ => continue,
        };
        if !owner_is_class(&info) && !has_loop_jump(body) {
            out.extend(loc(site.file, info.stmt));
        }
    }
}

fn s3_apply(unit: &mut ProgramUnit, loc: &Location, fresh: &mut Fresh) -> Result<Names, OperatorError> {
    let op = OperatorId::S3;
    let (block, i) = anchor(unit, op, loc)?;
    let body = match &mut block[i].kind {
        StmtKind::For { body, .. } | StmtKind::While { body, .. } => body,
        _ => return Err(fail(op, "anchor is not a loop")),
    };
    let flag = fresh.name("running");
    let mut inner = vec![assign(&flag, Expr::Bool(false))];
    inner.append(body);
    *body = vec![
        assign(&flag, Expr::Bool(true)),
        Stmt::new(StmtKind::While {
            test: Expr::name(&flag),
            body: inner,
            orelse: Vec::new(),
        }),
    ];
    Ok(vec![SyntheticName::new(&flag, NameKind::Variable, "flag", Vec::new())])
}

// ---- S4: compute an assigned value on a worker thread

fn thread_imports() -> [Stmt; 2] {
    [parse_stmt("import threading\n"), parse_stmt("import queue\n")]
}

fn s4_locations(site: &Site, out: &mut Vec<Location>) {
    let imports = thread_imports();
    for info in statements(&site.module.body) {
        let StmtKind::Assign { targets, value } = &info.stmt.kind else {
            continue;
        };
        if info.function().is_none() || targets.len() != 1 || targets[0].as_name().is_none() {
            continue;
        }
        if expr_blocks_move(value) {
            continue;
        }
        let scope = info.scope(site.table);
        if imports
            .iter()
            .all(|imp| import_usable(site.module, site.table, scope, imp))
        {
            out.extend(loc(site.file, info.stmt));
        }
    }
}

fn s4_apply(unit: &mut ProgramUnit, loc: &Location, fresh: &mut Fresh) -> Result<Names, OperatorError> {
    let op = OperatorId::S4;
    let (block, i) = anchor(unit, op, loc)?;
    let StmtKind::Assign { targets, value } = block[i].kind.clone() else {
        return Err(fail(op, "anchor is not an assignment"));
    };
    let target = targets[0].as_name().unwrap_or("value").to_string();
    let hints = vec![target.clone()];
    let q = fresh.name("result_queue");
    let worker = fresh.name("worker");
    let param = fresh.name("output_queue");
    let t = fresh.name("thread");
    let put = expr_stmt(Expr::call(Expr::attr(Expr::name(&param), "put"), vec![value]));
    let thread = Expr::Call {
        func: Box::new(Expr::attr(Expr::name("threading"), "Thread")),
        args: vec![
            Arg::Keyword("target".into(), Expr::name(&worker)),
            Arg::Keyword("args".into(), Expr::Tuple(vec![Expr::name(&q)])),
        ],
    };
    let stmts = vec![
        assign(&q, Expr::call(Expr::attr(Expr::name("queue"), "Queue"), vec![])),
        func_def(&worker, vec![Param::plain(&param)], vec![put]),
        assign(&t, thread),
        expr_stmt(Expr::call(Expr::attr(Expr::name(&t), "start"), vec![])),
        expr_stmt(Expr::call(Expr::attr(Expr::name(&t), "join"), vec![])),
        Stmt {
            kind: StmtKind::Assign {
                targets,
                value: Expr::call(Expr::attr(Expr::name(&q), "get_nowait"), vec![]),
            },
            lineage: block[i].lineage,
            line: block[i].line,
        },
    ];
    block.splice(i..=i, stmts);
    let module = unit.module_mut(&loc.file).expect("file exists");
    ensure_imports(module, &thread_imports());
    Ok(vec![
        SyntheticName::new(&q, NameKind::Variable, "queue", hints.clone()),
        SyntheticName::new(&worker, NameKind::Function, "worker", hints.clone()),
        SyntheticName::new(&param, NameKind::Variable, "queue", hints.clone()),
        SyntheticName::new(&t, NameKind::Variable, "thread", hints),
    ])
}

// ---- S5: wrap statements in a try block that re-raises a custom error

fn s5_eligible(s: &Stmt, index: usize, info_fn_body: bool) -> bool {
    if info_fn_body && index == 0 && s.is_docstring() {
        return false;
    }
    !matches!(
        s.kind,
        StmtKind::Global(_) | StmtKind::Nonlocal(_) | StmtKind::Import(_) | StmtKind::ImportFrom { .. }
    )
}

fn s5_locations(site: &Site, out: &mut Vec<Location>) {
    for info in statements(&site.module.body) {
        if info.function().is_none() {
            continue;
        }
        let index = *info.path.last().expect("non-empty path");
        if s5_eligible(info.stmt, index, info.directly_in_function()) {
            out.extend(loc(site.file, info.stmt));
        }
    }
}

fn error_class(name: &str) -> Stmt {
    Stmt::new(StmtKind::ClassDef(ClassDef {
        name: Ident::new(name),
        bases: vec![Arg::Positional(Expr::name("Exception"))],
        body: vec![Stmt::new(StmtKind::Pass)],
        decorators: Vec::new(),
    }))
}

/// An existing top-level empty exception class, before `limit`, that is
/// only ever named in `except` clauses.
fn reusable_error_class(module: &Module, limit: usize) -> Option<String> {
    let mut handler_names: Vec<&str> = Vec::new();
    walk_stmts(&module.body, &mut |s| {
        if let StmtKind::Try { handlers, .. } = &s.kind {
            for h in handlers {
                if let Some(Expr::Name(id)) = &h.kind {
                    handler_names.push(&id.name);
                }
            }
        }
    });
    module.body[..limit].iter().find_map(|s| {
        let StmtKind::ClassDef(c) = &s.kind else {
            return None;
        };
        if *s != error_class(&c.name.name) {
            return None;
        }
        let mut uses = 0;
        walk_stmt_idents(&module.body, &mut |id| {
            if id.name == c.name.name {
                uses += 1;
            }
        });
        let in_handlers = handler_names.iter().filter(|n| **n == c.name.name).count();
        (uses == 1 + in_handlers).then(|| c.name.name.clone())
    })
}

fn s5_apply(
    unit: &mut ProgramUnit,
    loc: &Location,
    fresh: &mut Fresh,
    rng: &mut OpRng,
) -> Result<Names, OperatorError> {
    let op = OperatorId::S5;
    let module = unit.module(&loc.file).ok_or_else(|| fail(op, "no file"))?;
    let info = info_for(&module.body, loc.lineage).ok_or_else(|| fail(op, "anchor vanished"))?;
    let top = info.path[0];
    let limit = top.min(def_insert_index(&module.body));
    let existing = reusable_error_class(module, top);
    let direct = info.directly_in_function();
    let (block, i) = anchor(unit, op, loc)?;
    let mut max = 0;
    while max < 3 && i + max < block.len() && s5_eligible(&block[i + max], i + max, direct) {
        max += 1;
    }
    let count = rng.gen_range(1..=max.max(1));
    let (class, created) = match existing {
        Some(name) => (name, false),
        None => (fresh.name("CustomError"), true),
    };
    let wrapped: Vec<Stmt> = block.drain(i..i + count).collect();
    block.insert(
        i,
        Stmt::new(StmtKind::Try {
            body: wrapped,
            handlers: vec![ExceptHandler {
                kind: Some(Expr::name(&class)),
                name: None,
                body: vec![Stmt::new(StmtKind::Raise {
                    exc: None,
                    cause: None,
                })],
                line: 0,
            }],
            orelse: Vec::new(),
            finalbody: Vec::new(),
        }),
    );
    if !created {
        return Ok(Vec::new());
    }
    let module = unit.module_mut(&loc.file).expect("file exists");
    module.body.insert(limit, error_class(&class));
    Ok(vec![SyntheticName::new(&class, NameKind::Class, "error", Vec::new())])
}

// ---- S6: extract an assigned expression into a module-level function

fn is_literal(e: &Expr) -> bool {
    matches!(
        e,
        Expr::Num(_) | Expr::Str(_) | Expr::Bool(_) | Expr::NoneLit | Expr::Ellipsis
    )
}

fn s6_locations(site: &Site, out: &mut Vec<Location>) {
    for info in statements(&site.module.body) {
        let StmtKind::Assign { targets, value } = &info.stmt.kind else {
            continue;
        };
        if targets.len() != 1 || is_literal(value) || expr_blocks_move(value) {
            continue;
        }
        if owner_is_class(&info) {
            continue;
        }
        out.extend(loc(site.file, info.stmt));
    }
}

fn s6_apply(
    unit: &mut ProgramUnit,
    table: &ScopeTable,
    loc: &Location,
    fresh: &mut Fresh,
) -> Result<Names, OperatorError> {
    let op = OperatorId::S6;
    let module = unit.module(&loc.file).ok_or_else(|| fail(op, "no file"))?;
    let info = info_for(&module.body, loc.lineage).ok_or_else(|| fail(op, "anchor vanished"))?;
    let top = info.path[0];
    let StmtKind::Assign { targets, value } = &info.stmt.kind else {
        return Err(fail(op, "anchor is not an assignment"));
    };
    let params = free_locals(value, table);
    let base = match targets[0].as_name() {
        Some(n) => format!("compute_{}", n.trim_start_matches('_')),
        None => "compute_value".to_string(),
    };
    let mut hints: Vec<String> = targets[0].as_name().map(|n| vec![n.to_string()]).unwrap_or_default();
    hints.extend(hints_of(value));
    let name = fresh.name(&base);
    let def = func_def(
        &name,
        params.iter().map(|p| Param::plain(p)).collect(),
        vec![Stmt::new(StmtKind::Return(Some(value.clone())))],
    );
    let (block, i) = anchor(unit, op, loc)?;
    if let StmtKind::Assign { value, .. } = &mut block[i].kind {
        *value = call(&name, params.iter().map(|p| Expr::name(p)).collect());
    }
    let module = unit.module_mut(&loc.file).expect("file exists");
    module.body.insert(top, def);
    Ok(vec![SyntheticName::new(&name, NameKind::Function, "compute", hints)])
}

// ---- S7: move a function into a new module of the unit

const MODULE_SUFFIXES: &[&str] = &["helpers", "utils", "lib", "core", "ops", "tools"];

/// Module-scope names a top-level function reads, provided all are imports.
fn movable_function(module: &Module, table: &ScopeTable, s: &Stmt) -> Option<BTreeSet<String>> {
    let StmtKind::FunctionDef(f) = &s.kind else {
        return None;
    };
    if !f.decorators.is_empty() || f.is_async || is_mangled(&f.name.name) {
        return None;
    }
    let mut blocked = false;
    walk_stmts(&f.body, &mut |s| {
        if matches!(s.kind, StmtKind::Global(_) | StmtKind::Opaque(_)) {
            blocked = true;
        }
    });
    walk_exprs(std::slice::from_ref(s), &mut |e| {
        if let Expr::Call { func, .. } = e {
            if matches!(func.as_name(), Some("globals" | "eval" | "exec")) {
                blocked = true;
            }
        }
    });
    if blocked {
        return None;
    }
    let mut needed = BTreeSet::new();
    let mut ok = true;
    let mut first = true;
    walk_stmt_idents(std::slice::from_ref(s), &mut |id| {
        // the def's own name comes first
        if std::mem::take(&mut first) {
            return;
        }
        if table.resolve(id) != Resolution::Scope(0) || id.name == f.name.name {
            return;
        }
        match table.scopes[0].bindings.get(&id.name) {
            Some(kinds) if kinds.iter().all(|k| *k == BindKind::Import) => {
                needed.insert(id.name.clone());
            }
            _ => ok = false,
        }
    });
    // the function must be used elsewhere in its module
    let mut referenced = false;
    let own_uses: usize = {
        let mut n = 0;
        walk_stmt_idents(std::slice::from_ref(s), &mut |id| {
            if id.name == f.name.name && table.resolve(id) == Resolution::Scope(0) {
                n += 1;
            }
        });
        n
    };
    let mut all_uses = 0;
    walk_stmt_idents(&module.body, &mut |id| {
        if id.name == f.name.name && table.resolve(id) == Resolution::Scope(0) {
            all_uses += 1;
        }
    });
    if all_uses > own_uses {
        referenced = true;
    }
    let single_binding = table.scopes[0]
        .bindings
        .get(&f.name.name)
        .is_some_and(|k| k.len() == 1);
    (ok && referenced && single_binding).then_some(needed)
}

fn s7_locations(site: &Site, out: &mut Vec<Location>) {
    if site.file.contains('/') {
        return;
    }
    for s in &site.module.body {
        if movable_function(site.module, site.table, s).is_some() {
            out.extend(loc(site.file, s));
        }
    }
}

fn import_subset(s: &Stmt, keep: &dyn Fn(&str) -> bool) -> Option<Stmt> {
    let mut out = Stmt::new(s.kind.clone());
    match &mut out.kind {
        StmtKind::Import(names) | StmtKind::ImportFrom { names, .. } => {
            names.retain(|a| keep(&a.bound.name));
            (!names.is_empty()).then_some(out)
        }
        _ => None,
    }
}

fn is_future(s: &Stmt) -> bool {
    matches!(&s.kind, StmtKind::ImportFrom { module: Some(m), .. } if m == "__future__")
}

fn s7_apply(
    unit: &mut ProgramUnit,
    cx: &Cx,
    table: &ScopeTable,
    loc: &Location,
    rng: &mut OpRng,
) -> Result<Names, OperatorError> {
    let op = OperatorId::S7;
    let module = unit.module(&loc.file).ok_or_else(|| fail(op, "no file"))?;
    let index = module
        .body
        .iter()
        .position(|s| s.lineage == Some(loc.lineage))
        .ok_or_else(|| fail(op, "anchor is not top-level"))?;
    let stmt = module.body[index].clone();
    let needed = movable_function(module, table, &stmt).ok_or_else(|| fail(op, "function cannot move"))?;
    let StmtKind::FunctionDef(f) = &stmt.kind else {
        unreachable!()
    };
    let fname = f.name.name.clone();
    let mut new_body: Vec<Stmt> = Vec::new();
    for s in &module.body {
        if is_future(s) {
            new_body.push(Stmt::new(s.kind.clone()));
        } else if let Some(sub) = import_subset(s, &|n| needed.contains(n)) {
            new_body.push(sub);
        }
    }
    new_body.push(stmt);

    let suffix = MODULE_SUFFIXES.choose(rng).expect("non-empty");
    let taken_modules = unit.module_names();
    let mut stem = format!("{fname}_{suffix}");
    let mut n = 1;
    while taken_modules.contains(&stem) || cx.taken.contains(&stem) || unit.sources.contains_key(&format!("{stem}.py")) {
        n += 1;
        stem = format!("{fname}_{suffix}_{n}");
    }
    let path = format!("{stem}.py");

    let module = unit.module_mut(&loc.file).expect("file exists");
    module.body.remove(index);
    let at = import_insert_index(&module.body);
    module.body.insert(
        at,
        Stmt::new(StmtKind::ImportFrom {
            module: Some(stem.clone()),
            names: vec![Alias::new(&fname, None)],
            level: 0,
        }),
    );
    // drop imports only the moved function used
    number_idents(module);
    let after = analyze(module);
    let unused: BTreeSet<String> = needed
        .iter()
        .filter(|n| !cx.test_names.contains(*n))
        .filter(|n| {
            !after
                .occurrences
                .values()
                .any(|o| &o.name == *n && o.binding.is_none() && o.resolved == Resolution::Scope(0))
        })
        .cloned()
        .collect();
    let mut kept = Vec::new();
    for s in std::mem::take(&mut module.body) {
        match &s.kind {
            StmtKind::Import(_) | StmtKind::ImportFrom { .. } if !is_future(&s) => {
                if let Some(mut sub) = import_subset(&s, &|n| !unused.contains(n)) {
                    if sub.kind == s.kind {
                        kept.push(s);
                    } else {
                        sub.lineage = None;
                        kept.push(sub);
                    }
                }
            }
            _ => kept.push(s),
        }
    }
    module.body = kept;
    unit.add_file(&path, Module { body: new_body });
    Ok(Vec::new())
}

// ---- S8: apply an identity decorator

fn decorator_def(name: &str) -> Stmt {
    parse_stmt(&format!(
        "def {name}(func):\n    def dec_result(*args, **kwargs):\n        res = func(*args, **kwargs)\n        return res\n    return dec_result\n"
    ))
}

/// Top-level identity decorators: (index, name).
fn identity_decorators(module: &Module) -> Vec<(usize, String)> {
    module
        .body
        .iter()
        .enumerate()
        .filter_map(|(i, s)| match &s.kind {
            StmtKind::FunctionDef(f) if *s == decorator_def(&f.name.name) => Some((i, f.name.name.clone())),
            _ => None,
        })
        .collect()
}

fn s8_locations(site: &Site, out: &mut Vec<Location>) {
    let decorators = identity_decorators(site.module);
    let names: Vec<&str> = decorators.iter().map(|(_, n)| n.as_str()).collect();
    for info in statements(&site.module.body) {
        let StmtKind::FunctionDef(f) = &info.stmt.kind else {
            continue;
        };
        if f.is_async || names.contains(&f.name.name.as_str()) {
            continue;
        }
        let inside_decorator = decorators.iter().any(|(i, _)| info.path[0] == *i);
        let decorated = f
            .decorators
            .iter()
            .any(|d| d.as_name().is_some_and(|n| names.contains(&n)));
        if !inside_decorator && !decorated {
            out.extend(loc(site.file, info.stmt));
        }
    }
}

fn s8_apply(unit: &mut ProgramUnit, loc: &Location, fresh: &mut Fresh) -> Result<Names, OperatorError> {
    let op = OperatorId::S8;
    let module = unit.module(&loc.file).ok_or_else(|| fail(op, "no file"))?;
    let top = find_path(&module.body, loc.lineage).ok_or_else(|| fail(op, "anchor vanished"))?[0];
    let existing = identity_decorators(module)
        .into_iter()
        .find(|(i, _)| *i < top)
        .map(|(_, n)| n);
    let limit = top.min(def_insert_index(&module.body));
    let mut names = Vec::new();
    let name = match existing {
        Some(n) => n,
        None => {
            let n = fresh.name("my_decorator");
            let module = unit.module_mut(&loc.file).expect("file exists");
            module.body.insert(limit, decorator_def(&n));
            names.push(SyntheticName::new(&n, NameKind::Function, "decorator", Vec::new()));
            n
        }
    };
    let (block, i) = anchor(unit, op, loc)?;
    let StmtKind::FunctionDef(f) = &mut block[i].kind else {
        return Err(fail(op, "anchor is not a function"));
    };
    f.decorators.push(Expr::name(&name));
    Ok(names)
}

// ---- S9: builtin sum/min/max over literals to numpy

fn numpy_import() -> Stmt {
    parse_stmt("import numpy as np\n")
}

fn int_literal(e: &Expr) -> bool {
    let e = match e {
        Expr::UnaryOp {
            op: UnaryOp::Neg,
            operand,
        } => operand,
        other => other,
    };
    matches!(e, Expr::Num(n) if n.len() <= 15 && n.bytes().all(|b| b.is_ascii_digit()))
}

fn float_literal(e: &Expr) -> bool {
    let e = match e {
        Expr::UnaryOp {
            op: UnaryOp::Neg,
            operand,
        } => operand,
        other => other,
    };
    matches!(e, Expr::Num(n) if n.len() <= 15 && n.contains('.') && n.bytes().all(|b| b.is_ascii_digit() || b == b'.'))
}

/// `sum`/`min`/`max` on a non-empty literal sequence of plain numbers.
fn numpy_candidate(e: &Expr, table: &ScopeTable) -> bool {
    let Expr::Call { func, args } = e else {
        return false;
    };
    let Expr::Name(id) = &**func else {
        return false;
    };
    if table.resolve(id) != Resolution::Builtin || args.len() != 1 {
        return false;
    }
    let Arg::Positional(Expr::List(items) | Expr::Tuple(items)) = &args[0] else {
        return false;
    };
    if items.is_empty() || items.len() > 50 {
        return false;
    }
    match id.name.as_str() {
        "sum" => items.iter().all(int_literal),
        "min" | "max" => items.iter().all(int_literal) || items.iter().all(float_literal),
        _ => false,
    }
}

fn s9_locations(site: &Site, out: &mut Vec<Location>) {
    let import = numpy_import();
    for info in statements(&site.module.body) {
        let mut k = 0;
        for e in info.stmt.kind.header_exprs() {
            e.walk(&mut |x| {
                if numpy_candidate(x, site.table) {
                    if let Some(l) = loc(site.file, info.stmt) {
                        out.push(l.with_path(vec![k]));
                    }
                    k += 1;
                }
            });
        }
        if k > 0 {
            let scope = info.scope(site.table);
            if !import_usable(site.module, site.table, scope, &import) {
                let n = out.len() - k;
                out.truncate(n);
            }
        }
    }
}

fn s9_apply(unit: &mut ProgramUnit, table: &ScopeTable, loc: &Location) -> Result<Names, OperatorError> {
    let op = OperatorId::S9;
    let want = *loc.path.first().ok_or_else(|| fail(op, "missing call index"))?;
    let (block, i) = anchor(unit, op, loc)?;
    let mut k = 0;
    let mut done = false;
    for e in block[i].kind.header_exprs_mut() {
        e.walk_mut(&mut |x| {
            if done || !numpy_candidate(x, table) {
                return;
            }
            if k == want {
                let Expr::Call { func, args } = x else { unreachable!() };
                let fname = func.as_name().expect("name call").to_string();
                let arg = args[0].expr().clone();
                let np_call = Expr::call(Expr::attr(Expr::name("np"), &fname), vec![arg]);
                *x = Expr::call(Expr::attr(np_call, "item"), vec![]);
                done = true;
            }
            k += 1;
        });
    }
    if !done {
        return Err(fail(op, "call not found"));
    }
    let module = unit.module_mut(&loc.file).expect("file exists");
    ensure_imports(module, &[numpy_import()]);
    Ok(Vec::new())
}

// ---- S10: augmented assignment to plain assignment

fn pure(e: &Expr) -> bool {
    match e {
        Expr::Name(_) | Expr::Num(_) | Expr::Str(_) | Expr::Bool(_) | Expr::NoneLit => true,
        Expr::Attribute { value, .. } => pure(value),
        Expr::UnaryOp { operand, .. } => pure(operand),
        Expr::BinOp { left, right, .. } => pure(left) && pure(right),
        Expr::Tuple(v) => v.iter().all(pure),
        _ => false,
    }
}

fn pure_target(e: &Expr) -> bool {
    match e {
        Expr::Name(_) => true,
        Expr::Attribute { value, .. } => pure(value),
        Expr::Subscript { value, index } => pure(value) && pure(index),
        _ => false,
    }
}

/// Names bound to containers somewhere in the module; `x += y` on those
/// mutates in place, unlike `x = x + y`.
fn container_names(module: &Module) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    walk_stmts(&module.body, &mut |s| match &s.kind {
        StmtKind::Assign { targets, value } if is_compound_value(value) => {
            for t in targets {
                if let Some(n) = t.as_name() {
                    out.insert(n.to_string());
                }
            }
        }
        StmtKind::AnnAssign { target, .. } => {
            if let Some(n) = target.as_name() {
                out.insert(n.to_string());
            }
        }
        _ => {}
    });
    out
}

fn s10_locations(site: &Site, out: &mut Vec<Location>) {
    let containers = container_names(site.module);
    for info in statements(&site.module.body) {
        let StmtKind::AugAssign { target, value, .. } = &info.stmt.kind else {
            continue;
        };
        if !pure_target(target)
            || matches!(value, Expr::List(_) | Expr::ListComp { .. } | Expr::Tuple(_))
            || target.as_name().is_some_and(|n| containers.contains(n))
        {
            continue;
        }
        out.extend(loc(site.file, info.stmt));
    }
}

fn s10_apply(unit: &mut ProgramUnit, loc: &Location) -> Result<Names, OperatorError> {
    let op = OperatorId::S10;
    let (block, i) = anchor(unit, op, loc)?;
    let StmtKind::AugAssign { target, op: bop, value } = block[i].kind.clone() else {
        return Err(fail(op, "anchor is not an augmented assignment"));
    };
    block[i] = Stmt {
        kind: StmtKind::Assign {
            targets: vec![target.clone()],
            value: Expr::binop(target, bop, value),
        },
        lineage: block[i].lineage,
        line: block[i].line,
    };
    Ok(Vec::new())
}

// ---- S11: for loop to a recursive inner function

fn target_is_names(e: &Expr) -> bool {
    match e {
        Expr::Name(_) => true,
        Expr::Tuple(v) | Expr::List(v) => v.iter().all(target_is_names),
        _ => false,
    }
}

fn iter_root(e: &Expr) -> Option<&str> {
    match e {
        Expr::Name(id) => Some(&id.name),
        Expr::Attribute { value, .. } | Expr::Subscript { value, .. } => iter_root(value),
        _ => None,
    }
}

/// Iterables that may be materialized up front: data references, views and
/// common wrappers around them.
fn materializable(e: &Expr) -> bool {
    match e {
        Expr::Name(_) | Expr::Attribute { .. } | Expr::Subscript { .. } => pure_target(e),
        Expr::Call { func, args } => match &**func {
            Expr::Name(id) => {
                matches!(id.name.as_str(), "enumerate" | "zip" | "sorted" | "reversed")
                    && args.iter().all(|a| matches!(a, Arg::Positional(x) if materializable(x)) || matches!(a, Arg::Keyword(..)))
            }
            Expr::Attribute { value, attr } => {
                matches!(attr.as_str(), "items" | "keys" | "values" | "split") && pure(value)
            }
            _ => false,
        },
        Expr::List(_) | Expr::Tuple(_) => pure(e),
        _ => false,
    }
}

const MUTATORS: &[&str] = &[
    "append", "extend", "insert", "pop", "remove", "clear", "sort", "reverse", "update", "add",
    "discard", "popitem", "setdefault",
];

/// Whether `body` may mutate the container named `root`.
fn mutates(body: &[Stmt], root: &str) -> bool {
    let mut found = false;
    walk_exprs(body, &mut |e| {
        if let Expr::Call { func, .. } = e {
            if let Expr::Attribute { value, attr } = &**func {
                if MUTATORS.contains(&attr.as_str()) && iter_root(value) == Some(root) {
                    found = true;
                }
            }
        }
    });
    walk_stmts(body, &mut |s| {
        let targets: Vec<&Expr> = match &s.kind {
            StmtKind::Assign { targets, .. } => targets.iter().collect(),
            StmtKind::AugAssign { target, .. } => vec![target],
            StmtKind::Delete(t) => t.iter().collect(),
            _ => Vec::new(),
        };
        if targets.iter().any(|t| iter_root(t) == Some(root)) {
            found = true;
        }
    });
    found
}

fn rebinds_builtins(table: &ScopeTable) -> bool {
    table
        .scopes
        .iter()
        .any(|s| ["len", "list", "range"].iter().any(|n| s.bindings.contains_key(*n)))
}

fn is_range(e: &Expr, table: &ScopeTable) -> bool {
    matches!(e, Expr::Call { func, args } if matches!(&**func, Expr::Name(id) if id.name == "range" && table.resolve(id) == Resolution::Builtin)
        && args.iter().all(|a| matches!(a, Arg::Positional(_))))
}

struct LoopBindings {
    nonlocal_names: Vec<String>,
    global_names: Vec<String>,
}

/// Splits the names a `for` statement binds in `scope` into those the inner
/// function must declare `nonlocal` or `global`. Names bound only by the loop
/// become locals of the inner function; `None` when such a name is also read
/// outside the loop, since it would then be unbound there.
fn loop_bindings(table: &ScopeTable, scope: ScopeId, stmt: &Stmt) -> Option<LoopBindings> {
    let mut inside = BTreeSet::new();
    let mut bound: Vec<String> = Vec::new();
    walk_stmt_idents(std::slice::from_ref(stmt), &mut |id: &Ident| {
        inside.insert(id.id);
        if let Some(o) = table.occurrence(id) {
            if o.binding.is_some() && o.scope == scope && !bound.contains(&id.name) {
                bound.push(id.name.clone());
            }
        }
    });
    let globals = &table.scopes[scope].globals;
    let mut out = LoopBindings {
        nonlocal_names: Vec::new(),
        global_names: Vec::new(),
    };
    for name in bound {
        if globals.contains(&name) {
            out.global_names.push(name);
            continue;
        }
        let outside: Vec<&Occurrence> = table
            .occurrences_of(scope, &name)
            .into_iter()
            .filter(|id| !inside.contains(id))
            .filter_map(|id| table.occurrences.get(&id))
            .collect();
        if outside.iter().any(|o| o.binding.is_some() && o.scope == scope) {
            out.nonlocal_names.push(name);
        } else if !outside.is_empty() {
            return None;
        }
    }
    Some(out)
}

fn s11_locations(site: &Site, out: &mut Vec<Location>) {
    if rebinds_builtins(site.table) {
        return;
    }
    for info in statements(&site.module.body) {
        let StmtKind::For {
            target,
            iter,
            body,
            orelse,
            is_async: false,
        } = &info.stmt.kind
        else {
            continue;
        };
        if info.function().is_none() || !orelse.is_empty() || !target_is_names(target) {
            continue;
        }
        if has_loop_jump(body) || has_return(body) || stmts_block_move(body) || expr_blocks_move(iter) {
            continue;
        }
        let ok_iter = is_range(iter, site.table)
            || (materializable(iter) && iter_root_of_call(iter).is_none_or(|r| !mutates(body, r)));
        if ok_iter && loop_bindings(site.table, info.scope(site.table), info.stmt).is_some() {
            out.extend(loc(site.file, info.stmt));
        }
    }
}

/// The data root of an iterable expression, looking through wrapper calls.
fn iter_root_of_call(e: &Expr) -> Option<&str> {
    match e {
        Expr::Call { func, args } => match &**func {
            Expr::Attribute { value, .. } => iter_root(value),
            _ => args.first().and_then(|a| iter_root_of_call(a.expr())),
        },
        other => iter_root(other),
    }
}

fn s11_apply(
    unit: &mut ProgramUnit,
    table: &ScopeTable,
    loc: &Location,
    fresh: &mut Fresh,
) -> Result<Names, OperatorError> {
    let op = OperatorId::S11;
    let module = unit.module(&loc.file).ok_or_else(|| fail(op, "no file"))?;
    let info = info_for(&module.body, loc.lineage).ok_or_else(|| fail(op, "anchor vanished"))?;
    let scope = info.scope(table);
    let StmtKind::For { target, iter, body, .. } = &info.stmt.kind else {
        return Err(fail(op, "anchor is not a for loop"));
    };
    let LoopBindings {
        nonlocal_names,
        global_names,
    } = loop_bindings(table, scope, info.stmt).ok_or_else(|| fail(op, "loop-only name escapes the loop"))?;

    let items_value = if is_range(iter, table) {
        iter.clone()
    } else {
        call("list", vec![iter.clone()])
    };
    let mut hints = hints_of(iter);
    hints.extend(expr_names(target));
    let items = fresh.name("items");
    let func = fresh.name("loop_fn");
    let index = fresh.name("index");
    let mut fn_body = Vec::new();
    if !nonlocal_names.is_empty() {
        fn_body.push(Stmt::new(StmtKind::Nonlocal(nonlocal_names.iter().map(Ident::new).collect())));
    }
    if !global_names.is_empty() {
        fn_body.push(Stmt::new(StmtKind::Global(global_names.iter().map(Ident::new).collect())));
    }
    let mut step = vec![Stmt::new(StmtKind::Assign {
        targets: vec![target.clone()],
        value: Expr::subscript(Expr::name(&items), Expr::name(&index)),
    })];
    step.extend(body.iter().cloned());
    step.push(expr_stmt(call(
        &func,
        vec![Expr::binop(Expr::name(&index), BinOp::Add, Expr::int(1))],
    )));
    fn_body.push(Stmt::new(StmtKind::If {
        test: Expr::compare(Expr::name(&index), CmpOp::Lt, call("len", vec![Expr::name(&items)])),
        body: step,
        orelse: Vec::new(),
    }));
    let stmts = vec![
        assign(&items, items_value),
        func_def(&func, vec![Param::plain(&index)], fn_body),
        expr_stmt(call(&func, vec![Expr::int(0)])),
    ];
    let (block, i) = anchor(unit, op, loc)?;
    block.splice(i..=i, stmts);
    Ok(vec![
        SyntheticName::new(&items, NameKind::Variable, "items", hints.clone()),
        SyntheticName::new(&func, NameKind::Function, "loop", hints.clone()),
        SyntheticName::new(&index, NameKind::Variable, "index", Vec::new()),
    ])
}

// ---- S12: primitive local to a one-element list

/// Names used inside f-string `=` debug fields, whose text must not change.
pub(crate) fn debug_field_names(body: &[Stmt]) -> BTreeSet<String> {
    fn parts(ps: &[FStringPart], out: &mut BTreeSet<String>) {
        for p in ps {
            if let FStringPart::Field { expr, debug, spec, .. } = p {
                if debug.is_some() {
                    crate::python::scope::walk_expr_idents(expr, &mut |id| {
                        out.insert(id.name.clone());
                    });
                }
                parts(spec, out);
            }
        }
    }
    let mut out = BTreeSet::new();
    walk_exprs(body, &mut |e| {
        if let Expr::Str(pieces) = e {
            for p in pieces {
                if let StrPiece::FString { parts: ps, .. } = p {
                    parts(ps, &mut out);
                }
            }
        }
    });
    out
}

/// Whether the function body calls frame-introspecting builtins.
pub(crate) fn uses_frame(body: &[Stmt]) -> bool {
    let mut found = false;
    walk_exprs(body, &mut |e| {
        if let Expr::Call { func, .. } = e {
            if matches!(func.as_name(), Some("locals" | "vars" | "eval" | "exec")) {
                found = true;
            }
        }
    });
    found
}

/// Names declared `global` or `nonlocal` anywhere in the module.
pub(crate) fn declared_names(module: &Module) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    walk_stmts(&module.body, &mut |s| {
        if let StmtKind::Global(v) | StmtKind::Nonlocal(v) = &s.kind {
            out.extend(v.iter().map(|i| i.name.clone()));
        }
    });
    out
}

fn s12_candidates(f: &FunctionDef, scope: ScopeId, table: &ScopeTable, declared: &BTreeSet<String>) -> Vec<String> {
    if uses_frame(&f.body) {
        return Vec::new();
    }
    let debug = debug_field_names(&f.body);
    let mut ok_bindings: std::collections::BTreeMap<String, usize> = Default::default();
    let mut bad: BTreeSet<String> = BTreeSet::new();
    walk_stmts(&f.body, &mut |s| match &s.kind {
        StmtKind::Assign { targets, value } => {
            if let [Expr::Name(id)] = targets.as_slice() {
                if table.resolve(id) == Resolution::Scope(scope) {
                    *ok_bindings.entry(id.name.clone()).or_default() += 1;
                    if is_compound_value(value) {
                        bad.insert(id.name.clone());
                    }
                }
            }
        }
        StmtKind::AugAssign { target: Expr::Name(id), .. } => {
            if table.resolve(id) == Resolution::Scope(scope) {
                *ok_bindings.entry(id.name.clone()).or_default() += 1;
            }
        }
        _ => {}
    });
    let mut all_bindings: std::collections::BTreeMap<String, usize> = Default::default();
    for o in table.occurrences.values() {
        if o.binding.is_some() && o.resolved == Resolution::Scope(scope) {
            *all_bindings.entry(o.name.clone()).or_default() += 1;
        }
    }
    ok_bindings
        .into_iter()
        .filter(|(n, k)| {
            all_bindings.get(n) == Some(k)
                && !bad.contains(n)
                && !declared.contains(n)
                && !debug.contains(n)
                && table.scopes[scope]
                    .bindings
                    .get(n)
                    .is_some_and(|kinds| kinds.iter().all(|k| *k == BindKind::Assign))
        })
        .map(|(n, _)| n)
        .collect()
}

fn s12_locations(site: &Site, out: &mut Vec<Location>) {
    let declared = declared_names(site.module);
    for info in statements(&site.module.body) {
        let StmtKind::FunctionDef(f) = &info.stmt.kind else {
            continue;
        };
        let Some(scope) = site.table.def_scope(&f.name) else {
            continue;
        };
        for name in s12_candidates(f, scope, site.table, &declared) {
            if let Some(l) = loc(site.file, info.stmt) {
                let desc = format!("{} in {}", name, f.name.name);
                out.push(Location { description: desc, ..l.with_target(&name) });
            }
        }
    }
}

fn s12_apply(unit: &mut ProgramUnit, table: &ScopeTable, loc: &Location) -> Result<Names, OperatorError> {
    let op = OperatorId::S12;
    let name = loc.target.clone().ok_or_else(|| fail(op, "missing variable"))?;
    let (block, i) = anchor(unit, op, loc)?;
    let StmtKind::FunctionDef(f) = &mut block[i].kind else {
        return Err(fail(op, "anchor is not a function"));
    };
    let scope = table.def_scope(&f.name).ok_or_else(|| fail(op, "unknown scope"))?;
    // the first statement mentioning the variable, if it is a plain
    // top-level binding whose value does not read it
    let first_binding = f.body.iter().position(|s| {
        let mut mentions = false;
        walk_stmt_idents(std::slice::from_ref(s), &mut |id| {
            if id.name == name && table.resolve(id) == Resolution::Scope(scope) {
                mentions = true;
            }
        });
        mentions
    });
    let init = first_binding.filter(|&k| match &f.body[k].kind {
        StmtKind::Assign { targets, value } => {
            matches!(targets.as_slice(), [Expr::Name(id)] if id.name == name)
                && !value.any(&mut |e| e.as_name() == Some(name.as_str()))
        }
        _ => false,
    });
    // fresh nodes carry occurrence id 0 and are not visited again
    walk_exprs_mut(&mut f.body, &mut |x| {
        if let Expr::Name(id) = x {
            if id.name == name && id.id != 0 && table.resolve(id) == Resolution::Scope(scope) {
                *x = Expr::subscript(Expr::name(&name), Expr::int(0));
            }
        }
    });
    match init {
        Some(k) => {
            if let StmtKind::Assign { targets, value } = &mut f.body[k].kind {
                targets[0] = Expr::name(&name);
                *value = Expr::List(vec![value.clone()]);
            }
        }
        None => {
            let at = body_start(&f.body);
            f.body.insert(at, assign(&name, Expr::List(vec![Expr::NoneLit])));
        }
    }
    Ok(Vec::new())
}

#[cfg(test)]
mod tests {
    use super::super::{apply_operator, operator_locations};
    use super::*;
    use crate::metrics::complexity_vector;

    fn unit(src: &str) -> ProgramUnit {
        ProgramUnit::from_source("u", src).unwrap()
    }

    fn apply_first(src: &str, op: OperatorId) -> ProgramUnit {
        let u = unit(src);
        let locs = operator_locations(&u, op);
        assert!(!locs.is_empty(), "{op} has no locations");
        apply_operator(&u, op, &locs[0], 7).unwrap().0
    }

    fn text(u: &ProgramUnit) -> String {
        u.source_texts()["solution.py"].clone()
    }

    #[test]
    fn s1_nests_loop() {
        let u = apply_first("def f(xs):\n    t = 0\n    for x in xs:\n        t += x\n    return t\n", OperatorId::S1);
        assert!(text(&u).contains("for batch in [xs]:\n        for x in batch:"), "{}", text(&u));
    }

    #[test]
    fn s2_guards_if_body() {
        let u = apply_first("def f(x):\n    if x:\n        return 1\n    return 0\n", OperatorId::S2);
        let t = text(&u);
        assert!(t.contains("if condition and condition_2:"), "{t}");
        assert!(complexity_vector(&u).c2 > 0);
    }

    #[test]
    fn s3_skips_loops_with_continue() {
        let u = unit("def f(xs):\n    for x in xs:\n        if x:\n            continue\n    while xs:\n        xs.pop()\n");
        let locs = operator_locations(&u, OperatorId::S3);
        assert_eq!(locs.len(), 1);
        let out = apply_operator(&u, OperatorId::S3, &locs[0], 1).unwrap().0;
        assert!(text(&out).contains("running = True\n        while running:\n            running = False"), "{}", text(&out));
    }

    #[test]
    fn s4_adds_thread_and_imports() {
        let u = apply_first("def f(x):\n    y = x * 2\n    return y\n", OperatorId::S4);
        let t = text(&u);
        assert!(t.starts_with("import threading\nimport queue\n"), "{t}");
        assert!(t.contains("threading.Thread(target=worker, args=(result_queue,))"), "{t}");
        assert!(t.contains("y = result_queue.get_nowait()"), "{t}");
    }

    #[test]
    fn s4_respects_shadowed_module_names() {
        let u = unit("def f(queue):\n    y = queue * 2\n    return y\n");
        assert!(operator_locations(&u, OperatorId::S4).is_empty());
    }

    #[test]
    fn s5_wraps_and_reuses_class() {
        let u = apply_first("def f(x):\n    y = x + 1\n    return y\n", OperatorId::S5);
        let t = text(&u);
        assert!(t.contains("class CustomError(Exception):\n    pass"), "{t}");
        assert!(t.contains("except CustomError:\n        raise"), "{t}");
        let locs = operator_locations(&u, OperatorId::S5);
        let again = apply_operator(&u, OperatorId::S5, locs.last().unwrap(), 3).unwrap().0;
        assert_eq!(text(&again).matches("class ").count(), 1);
    }

    #[test]
    fn s6_extracts_with_free_locals() {
        let u = apply_first("K = 3\n\n\ndef f(a, b):\n    c = a * b + K\n    return c\n", OperatorId::S6);
        let t = text(&u);
        assert!(t.contains("def compute_c(a, b):\n    return a * b + K"), "{t}");
        assert!(t.contains("c = compute_c(a, b)"), "{t}");
    }

    #[test]
    fn s7_moves_helper_into_module() {
        let src = "import math\n\n\ndef helper(x):\n    return math.sqrt(x)\n\n\ndef f(x):\n    return helper(x) + 1\n";
        let u = unit(src);
        let locs = operator_locations(&u, OperatorId::S7);
        assert_eq!(locs.len(), 1);
        let (out, _) = apply_operator(&u, OperatorId::S7, &locs[0], 0).unwrap();
        assert_eq!(out.manifest.source_files.len(), 2);
        let main = text(&out);
        assert!(!main.contains("import math"), "{main}");
        assert!(main.contains("from helper_"), "{main}");
        let other = out.manifest.source_files[1].clone();
        assert!(out.source_texts()[&other].contains("import math\n\n\ndef helper(x):"));
        assert!(complexity_vector(&out).c6 > complexity_vector(&u).c6);
    }

    #[test]
    fn s8_decorates_once() {
        let u = apply_first("def f(x):\n    return x\n", OperatorId::S8);
        let t = text(&u);
        assert!(t.contains("@my_decorator\ndef f(x):"), "{t}");
        let locs = operator_locations(&u, OperatorId::S8);
        assert!(locs.is_empty(), "{locs:?}");
    }

    #[test]
    fn s9_replaces_literal_sum() {
        let u = apply_first("def f():\n    return sum([1, 2, 3]) + max(xs)\n", OperatorId::S9);
        let t = text(&u);
        assert!(t.contains("np.sum([1, 2, 3]).item() + max(xs)"), "{t}");
        assert!(t.starts_with("import numpy as np\n"), "{t}");
    }

    #[test]
    fn s10_parenthesizes_right_operand() {
        let u = apply_first("def f(self, a, b):\n    self.total -= a - b\n", OperatorId::S10);
        assert!(text(&u).contains("self.total = self.total - (a - b)"), "{}", text(&u));
        let u = unit("def f(a):\n    xs = []\n    xs += a\n");
        assert!(operator_locations(&u, OperatorId::S10).is_empty());
    }

    #[test]
    fn s11_range_loop_to_recursion() {
        let u = apply_first("def f(n):\n    total = 0\n    for i in range(n):\n        total += i\n    return total\n", OperatorId::S11);
        let t = text(&u);
        assert!(t.contains("items = range(n)"), "{t}");
        assert!(t.contains("nonlocal total\n"), "{t}");
        assert!(t.contains("loop_fn(index + 1)"), "{t}");
        assert!(complexity_vector(&u).c4 > 0);
    }

    #[test]
    fn s11_keeps_loop_variable_read_after_the_loop() {
        let u = apply_first("def f(n):\n    i = -1\n    for i in range(n):\n        pass\n    return i\n", OperatorId::S11);
        assert!(text(&u).contains("nonlocal i\n"), "{}", text(&u));
        let u = unit("def f(n):\n    for i in range(n):\n        pass\n    return i\n");
        assert!(operator_locations(&u, OperatorId::S11).is_empty());
    }

    #[test]
    fn s11_rejects_mutated_iterables() {
        let u = unit("def f(xs):\n    for x in xs:\n        xs.append(x)\n");
        assert!(operator_locations(&u, OperatorId::S11).is_empty());
    }

    #[test]
    fn s12_wraps_primitive() {
        let u = apply_first("def f(a):\n    c = a + 1\n    c += 2\n    return c\n", OperatorId::S12);
        let t = text(&u);
        assert!(t.contains("c = [a + 1]\n    c[0] += 2\n    return c[0]"), "{t}");
    }

    #[test]
    fn s12_initializes_when_first_use_is_nested() {
        let u = apply_first("def f(a):\n    if a:\n        c = 1\n    else:\n        c = 2\n    return c\n", OperatorId::S12);
        let t = text(&u);
        assert!(t.contains("c = [None]\n    if a:\n        c[0] = 1"), "{t}");
    }

    #[test]
    fn s12_skips_params_and_containers() {
        let u = unit("def f(a):\n    a = a + 1\n    xs = []\n    return a, xs\n");
        assert!(operator_locations(&u, OperatorId::S12).is_empty());
    }
}
