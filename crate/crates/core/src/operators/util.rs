//! Shared analysis and tree-editing helpers for the operator recipes.

use std::collections::{BTreeMap, BTreeSet};

use crate::python::ast::*;
use crate::python::scope::{analyze, walk_stmt_idents, ScopeId, ScopeKind, ScopeTable};
use crate::python::{is_keyword, BUILTINS};
use crate::unit::{module_name, ProgramUnit};

/// Names an operator may import later; never handed out as fresh names.
const RESERVED: &[&str] = &[
    "np", "numpy", "threading", "queue", "base64", "time", "datetime", "http", "Fernet",
    "ttest_ind", "shuffle", "relativedelta", "self", "cls",
];

/// Per-application analysis of a unit whose identifiers have been numbered.
pub struct Cx {
    pub tables: BTreeMap<String, ScopeTable>,
    /// Every identifier in use anywhere in the unit or its tests.
    pub taken: BTreeSet<String>,
    pub test_names: BTreeSet<String>,
    /// Keyword-argument names used at call sites in the unit's sources.
    pub keyword_args: BTreeSet<String>,
}

impl Cx {
    /// Numbers identifiers of every source module in place and resolves
    /// scopes. Source texts are unaffected.
    pub fn prepare(unit: &mut ProgramUnit) -> Cx {
        let mut tables = BTreeMap::new();
        let mut taken: BTreeSet<String> = unit.test_names.clone();
        let mut keyword_args = BTreeSet::new();
        for path in unit.manifest.source_files.clone() {
            let Some(f) = unit.sources.get_mut(&path) else {
                continue;
            };
            number_idents(&mut f.module);
            let table = analyze(&f.module);
            walk_stmt_idents(&f.module.body, &mut |id| {
                taken.insert(id.name.clone());
            });
            walk_exprs(&f.module.body, &mut |e| match e {
                Expr::Attribute { attr, .. } => {
                    taken.insert(attr.clone());
                }
                Expr::Call { args, .. } => {
                    for a in args {
                        if let Arg::Keyword(k, _) = a {
                            keyword_args.insert(k.clone());
                        }
                    }
                }
                _ => {}
            });
            tables.insert(path.clone(), table);
            taken.insert(module_name(&path));
        }
        taken.extend(BUILTINS.iter().map(|s| s.to_string()));
        taken.extend(RESERVED.iter().map(|s| s.to_string()));
        Cx {
            tables,
            taken,
            test_names: unit.test_names.clone(),
            keyword_args,
        }
    }

    pub fn table(&self, file: &str) -> &ScopeTable {
        &self.tables[file]
    }

    pub fn fresh(&self) -> Fresh {
        Fresh {
            taken: self.taken.clone(),
        }
    }
}

/// Generator of identifiers unused anywhere in the unit.
pub struct Fresh {
    taken: BTreeSet<String>,
}

impl Fresh {
    pub fn name(&mut self, base: &str) -> String {
        let base = if base.is_empty() { "value" } else { base };
        let mut candidate = base.to_string();
        let mut n = 1;
        while self.taken.contains(&candidate) || is_keyword(&candidate) {
            n += 1;
            candidate = format!("{base}_{n}");
        }
        self.taken.insert(candidate.clone());
        candidate
    }

    pub fn is_free(&self, name: &str) -> bool {
        !self.taken.contains(name) && !is_keyword(name)
    }

    pub fn reserve(&mut self, name: &str) {
        self.taken.insert(name.to_string());
    }
}

/// A statement with its position in the tree.
pub struct StmtInfo<'a> {
    pub stmt: &'a Stmt,
    pub path: StmtPath,
    /// Enclosing statements, outermost first.
    pub ancestors: Vec<&'a Stmt>,
}

impl<'a> StmtInfo<'a> {
    /// Innermost enclosing `def` or `class` statement.
    pub fn owner(&self) -> Option<&'a Stmt> {
        self.ancestors
            .iter()
            .rev()
            .find(|s| matches!(s.kind, StmtKind::FunctionDef(_) | StmtKind::ClassDef(_)))
            .copied()
    }

    /// The function whose body (possibly nested in blocks) holds the
    /// statement.
    pub fn function(&self) -> Option<&'a FunctionDef> {
        match self.owner().map(|s| &s.kind) {
            Some(StmtKind::FunctionDef(f)) => Some(f),
            _ => None,
        }
    }

    /// Whether the statement sits directly in its function's body block.
    pub fn directly_in_function(&self) -> bool {
        matches!(
            self.ancestors.last().map(|s| &s.kind),
            Some(StmtKind::FunctionDef(_))
        )
    }

    /// Scope in which the statement executes.
    pub fn scope(&self, table: &ScopeTable) -> ScopeId {
        match self.owner().map(|s| &s.kind) {
            Some(StmtKind::FunctionDef(f)) => table.def_scope(&f.name).unwrap_or(0),
            Some(StmtKind::ClassDef(c)) => table.def_scope(&c.name).unwrap_or(0),
            _ => 0,
        }
    }

}

/// All statements in pre-order with positions.
pub fn statements(body: &[Stmt]) -> Vec<StmtInfo<'_>> {
    fn go<'a>(
        body: &'a [Stmt],
        prefix: &mut Vec<usize>,
        ancestors: &mut Vec<&'a Stmt>,
        out: &mut Vec<StmtInfo<'a>>,
    ) {
        for (i, s) in body.iter().enumerate() {
            let mut path = prefix.clone();
            path.push(i);
            out.push(StmtInfo {
                stmt: s,
                path: path.clone(),
                ancestors: ancestors.clone(),
            });
            ancestors.push(s);
            for (bi, b) in s.blocks().into_iter().enumerate() {
                let mut p = path.clone();
                p.push(bi);
                go(b, &mut p, ancestors, out);
            }
            ancestors.pop();
        }
    }
    let mut out = Vec::new();
    go(body, &mut Vec::new(), &mut Vec::new(), &mut out);
    out
}

/// Locates a statement by lineage: its block and index.
pub fn locate<'a>(body: &'a mut Vec<Stmt>, id: LineageId) -> Option<(&'a mut Vec<Stmt>, usize)> {
    let path = find_path(body, id)?;
    block_at_mut(body, &path)
}

/// Whether `name` is private-mangled inside classes (`__x` but not `__x__`).
pub fn is_mangled(name: &str) -> bool {
    name.starts_with("__") && !name.ends_with("__")
}

/// Calls that depend on the executing frame and break when code moves into
/// another function.
const FRAME_SENSITIVE: &[&str] = &["super", "locals", "vars", "globals", "eval", "exec", "dir"];

/// Expressions that cannot move into a different function body.
pub fn expr_blocks_move(e: &Expr) -> bool {
    e.any(&mut |x| match x {
        Expr::Yield(_) | Expr::YieldFrom(_) | Expr::Await(_) | Expr::NamedExpr { .. } => true,
        Expr::Call { func, .. } => func.as_name().is_some_and(|n| FRAME_SENSITIVE.contains(&n)),
        Expr::Name(id) => is_mangled(&id.name),
        Expr::Attribute { attr, .. } => is_mangled(attr),
        _ => false,
    })
}

/// Statements that cannot move into a nested function.
pub fn stmts_block_move(body: &[Stmt]) -> bool {
    let mut bad = false;
    walk_stmts(body, &mut |s| {
        if matches!(
            s.kind,
            StmtKind::Global(_) | StmtKind::Nonlocal(_) | StmtKind::Delete(_) | StmtKind::Opaque(_)
        ) {
            bad = true;
        }
        if s.kind.header_exprs().iter().any(|e| expr_blocks_move(e)) {
            bad = true;
        }
    });
    bad
}

/// Whether `body` contains `break` or `continue` bound to the enclosing loop
/// (nested loops and functions excluded).
pub fn has_loop_jump(body: &[Stmt]) -> bool {
    body.iter().any(|s| match &s.kind {
        StmtKind::Break | StmtKind::Continue => true,
        StmtKind::For { orelse, .. } | StmtKind::While { orelse, .. } => has_loop_jump(orelse),
        StmtKind::FunctionDef(_) | StmtKind::ClassDef(_) => false,
        _ => s.blocks().iter().any(|b| has_loop_jump(b)),
    })
}

/// Whether `body` contains a `return` outside nested functions.
pub fn has_return(body: &[Stmt]) -> bool {
    body.iter().any(|s| match &s.kind {
        StmtKind::Return(_) => true,
        StmtKind::FunctionDef(_) | StmtKind::ClassDef(_) => false,
        _ => s.blocks().iter().any(|b| has_return(b)),
    })
}

/// Index after the module docstring, `__future__` imports and the leading
/// run of imports.
pub fn import_insert_index(body: &[Stmt]) -> usize {
    let mut i = 0;
    if body.first().is_some_and(Stmt::is_docstring) {
        i = 1;
    }
    let mut last = i;
    while i < body.len() {
        match &body[i].kind {
            StmtKind::Import(_) | StmtKind::ImportFrom { .. } => {
                i += 1;
                last = i;
            }
            _ => break,
        }
    }
    last
}

/// Index before the first top-level function or class, never before the
/// leading imports.
pub fn def_insert_index(body: &[Stmt]) -> usize {
    let start = import_insert_index(body);
    body.iter()
        .enumerate()
        .skip(start)
        .find(|(_, s)| matches!(s.kind, StmtKind::FunctionDef(_) | StmtKind::ClassDef(_)))
        .map(|(i, _)| i)
        .unwrap_or(body.len())
}

/// Names an import statement binds.
pub fn import_bindings(s: &Stmt) -> Vec<&str> {
    match &s.kind {
        StmtKind::Import(names) | StmtKind::ImportFrom { names, .. } => {
            names.iter().map(|a| a.bound.name.as_str()).collect()
        }
        _ => Vec::new(),
    }
}

fn same_import(a: &Stmt, b: &Stmt) -> bool {
    a.kind == b.kind
}

/// Whether the names bound by `import` can be used from `scope`: no scope
/// between `scope` and the module rebinds them, and at module level they are
/// either unbound or bound by an identical import.
pub fn import_usable(module: &Module, table: &ScopeTable, scope: ScopeId, import: &Stmt) -> bool {
    for name in import_bindings(import) {
        let mut cur = Some(scope);
        while let Some(c) = cur {
            if c == 0 {
                break;
            }
            let sc = &table.scopes[c];
            let visible = sc.kind != ScopeKind::Class || c == scope;
            if visible && (sc.bindings.contains_key(name) || sc.globals.contains(name)) {
                return false;
            }
            cur = sc.parent;
        }
        if let Some(kinds) = table.scopes[0].bindings.get(name) {
            let bound_by_same = module.body.iter().any(|s| same_import(s, import));
            if !bound_by_same || kinds.iter().any(|k| *k != crate::python::scope::BindKind::Import) {
                return false;
            }
            // other imports binding the same name would make the result depend
            // on order
            let binders = module
                .body
                .iter()
                .filter(|s| import_bindings(s).contains(&name))
                .count();
            if binders != 1 {
                return false;
            }
        }
    }
    true
}

/// Adds the import statements missing from the module's top level.
pub fn ensure_imports(module: &mut Module, imports: &[Stmt]) {
    for imp in imports {
        if module.body.iter().any(|s| same_import(s, imp)) {
            continue;
        }
        let at = import_insert_index(&module.body);
        module.body.insert(at, Stmt::new(imp.kind.clone()));
    }
}

/// Identifiers in `e` bound in a function-like scope (not module, class or
/// comprehension), in first-occurrence order: the free variables an extracted
/// expression needs as parameters.
pub fn free_locals(e: &Expr, table: &ScopeTable) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    crate::python::scope::walk_expr_idents(e, &mut |id| {
        if let crate::python::scope::Resolution::Scope(s) = table.resolve(id) {
            let kind = table.scopes[s].kind;
            let is_local = matches!(kind, ScopeKind::Function | ScopeKind::Lambda)
                && !local_to_expr(e, id, table);
            if is_local && !out.contains(&id.name) {
                out.push(id.name.clone());
            }
        }
    });
    out
}

/// Whether `id` resolves to a lambda scope created inside `e` itself.
fn local_to_expr(e: &Expr, id: &Ident, table: &ScopeTable) -> bool {
    let crate::python::scope::Resolution::Scope(s) = table.resolve(id) else {
        return false;
    };
    if table.scopes[s].kind != ScopeKind::Lambda {
        return false;
    }
    // the lambda's own parameters are occurrences inside `e`
    let mut inside = false;
    e.walk(&mut |x| {
        if let Expr::Lambda { params, .. } = x {
            for p in params.all() {
                if table.occurrence(&p.name).map(|o| o.scope) == Some(s) {
                    inside = true;
                }
            }
        }
    });
    inside
}

/// Identifier names appearing in an expression (loads and stores).
pub fn expr_names(e: &Expr) -> Vec<String> {
    let mut out = Vec::new();
    crate::python::scope::walk_expr_idents(e, &mut |id| {
        if !out.contains(&id.name) {
            out.push(id.name.clone());
        }
    });
    out
}

/// Builds `name(args...)`.
pub fn call(name: &str, args: Vec<Expr>) -> Expr {
    Expr::call(Expr::name(name), args)
}

pub fn assign(target: &str, value: Expr) -> Stmt {
    Stmt::new(StmtKind::Assign {
        targets: vec![Expr::name(target)],
        value,
    })
}

pub fn expr_stmt(e: Expr) -> Stmt {
    Stmt::new(StmtKind::Expr(e))
}

pub fn func_def(name: &str, params: Vec<Param>, body: Vec<Stmt>) -> Stmt {
    Stmt::new(StmtKind::FunctionDef(FunctionDef {
        name: Ident::new(name),
        params: Params {
            args: params,
            ..Params::default()
        },
        body,
        decorators: Vec::new(),
        returns: None,
        is_async: false,
    }))
}

/// Index of the first statement in a function body after its docstring.
pub fn body_start(body: &[Stmt]) -> usize {
    usize::from(body.first().is_some_and(Stmt::is_docstring))
}

/// Word-like parts of identifiers in an expression, used as naming hints.
pub fn hints_of(e: &Expr) -> Vec<String> {
    let mut out = Vec::new();
    e.walk(&mut |x| {
        let n = match x {
            Expr::Name(id) => Some(id.name.clone()),
            Expr::Attribute { attr, .. } => Some(attr.clone()),
            _ => None,
        };
        if let Some(n) = n {
            if !BUILTINS.contains(&n.as_str()) && !out.contains(&n) {
                out.push(n);
            }
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::python::parse_module;

    #[test]
    fn fresh_names_avoid_collisions() {
        let mut u = ProgramUnit::from_source("u", "def f(value):\n    value_2 = 1\n").unwrap();
        let cx = Cx::prepare(&mut u);
        let mut fresh = cx.fresh();
        assert_eq!(fresh.name("value"), "value_3");
        assert_eq!(fresh.name("value"), "value_4");
        assert_eq!(fresh.name("other"), "other");
        assert_eq!(fresh.name("len"), "len_2");
    }

    #[test]
    fn insertion_points() {
        let m = parse_module("'''doc'''\nimport os\nfrom x import y\nA = 1\n\n\ndef f():\n    pass\n").unwrap();
        assert_eq!(import_insert_index(&m.body), 3);
        assert_eq!(def_insert_index(&m.body), 4);
    }

    #[test]
    fn loop_jumps_ignore_nested_loops() {
        let m = parse_module("for a in b:\n    for c in d:\n        break\n    if a:\n        pass\n").unwrap();
        let StmtKind::For { body, .. } = &m.body[0].kind else { unreachable!() };
        assert!(!has_loop_jump(body));
        let m = parse_module("for a in b:\n    if a:\n        continue\n").unwrap();
        let StmtKind::For { body, .. } = &m.body[0].kind else { unreachable!() };
        assert!(has_loop_jump(body));
    }

    #[test]
    fn free_locals_skip_globals_and_comprehensions() {
        let mut m = parse_module("K = 2\n\n\ndef f(a, b):\n    c = [a * K + i for i in b] + (lambda z: z + a)(1)\n").unwrap();
        number_idents(&mut m);
        let table = analyze(&m);
        let StmtKind::FunctionDef(f) = &m.body[1].kind else { unreachable!() };
        let StmtKind::Assign { value, .. } = &f.body[0].kind else { unreachable!() };
        // comprehension iterables are evaluated before the element
        assert_eq!(free_locals(value, &table), vec!["b", "a"]);
    }

    #[test]
    fn import_usability() {
        let mut m = parse_module("import time\n\n\ndef f(x):\n    return x\n\n\ndef g(time):\n    return time\n").unwrap();
        number_idents(&mut m);
        let table = analyze(&m);
        let imp = parse_module("import time\n").unwrap().body.remove(0);
        let other = parse_module("import numpy as time\n").unwrap().body.remove(0);
        let f_scope = 1;
        let g_scope = 2;
        assert!(import_usable(&m, &table, f_scope, &imp));
        assert!(!import_usable(&m, &table, g_scope, &imp));
        assert!(!import_usable(&m, &table, f_scope, &other));
    }
}
