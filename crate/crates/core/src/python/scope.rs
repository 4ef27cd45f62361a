//! Lexical scope resolution following Python's LEGB rules.
//!
//! [`analyze`] expects identifier occurrence ids assigned by
//! [`number_idents`](super::ast::number_idents); every occurrence is resolved
//! to the scope that binds it, to the builtins, or left unresolved.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use super::is_builtin;

pub type ScopeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScopeKind {
    Module,
    Function,
    Class,
    Lambda,
    Comprehension,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BindKind {
    Param,
    Assign,
    Import,
    Function,
    Class,
    Loop,
    With,
    Except,
    Walrus,
    Delete,
}

#[derive(Debug, Clone)]
pub struct Scope {
    pub kind: ScopeKind,
    pub name: String,
    pub parent: Option<ScopeId>,
    /// Line of the defining statement (0 for the module).
    pub line: u32,
    pub bindings: BTreeMap<String, Vec<BindKind>>,
    pub globals: BTreeSet<String>,
    pub nonlocals: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    Scope(ScopeId),
    Builtin,
    Unresolved,
}

#[derive(Debug, Clone)]
pub struct Occurrence {
    pub name: String,
    pub scope: ScopeId,
    pub binding: Option<BindKind>,
    pub resolved: Resolution,
}

#[derive(Debug, Clone, Default)]
pub struct ScopeTable {
    pub scopes: Vec<Scope>,
    /// Keyed by identifier occurrence id.
    pub occurrences: BTreeMap<u32, Occurrence>,
    /// Scope opened by each `def`/`class`, keyed by the name's occurrence id.
    pub def_scopes: BTreeMap<u32, ScopeId>,
}

impl ScopeTable {
    pub fn resolve(&self, ident: &Ident) -> Resolution {
        self.occurrences
            .get(&ident.id)
            .map(|o| o.resolved)
            .unwrap_or(Resolution::Unresolved)
    }

    /// Scope opened by the `def` or `class` whose name is `ident`.
    pub fn def_scope(&self, ident: &Ident) -> Option<ScopeId> {
        self.def_scopes.get(&ident.id).copied()
    }

    /// Whether `scope` is `ancestor` or nested inside it.
    pub fn is_within(&self, mut scope: ScopeId, ancestor: ScopeId) -> bool {
        loop {
            if scope == ancestor {
                return true;
            }
            match self.scopes[scope].parent {
                Some(p) => scope = p,
                None => return false,
            }
        }
    }

    pub fn occurrence(&self, ident: &Ident) -> Option<&Occurrence> {
        self.occurrences.get(&ident.id)
    }

    /// Occurrence ids resolving to the binding of `name` in `scope`.
    pub fn occurrences_of(&self, scope: ScopeId, name: &str) -> BTreeSet<u32> {
        self.occurrences
            .iter()
            .filter(|(_, o)| o.name == name && o.resolved == Resolution::Scope(scope))
            .map(|(id, _)| *id)
            .collect()
    }

    /// Innermost function scope whose defining statement is on `line` with
    /// the given name.
    pub fn function_scope(&self, name: &str, line: u32) -> Option<ScopeId> {
        self.scopes
            .iter()
            .position(|s| s.kind == ScopeKind::Function && s.name == name && s.line == line)
    }

    /// Every name bound or referenced anywhere.
    pub fn all_names(&self) -> BTreeSet<String> {
        self.occurrences.values().map(|o| o.name.clone()).collect()
    }

    /// Whether a binding in `scope` for `name` is visible as a closure
    /// variable from some nested scope.
    pub fn captured(&self, scope: ScopeId, name: &str) -> bool {
        self.occurrences
            .values()
            .any(|o| o.name == name && o.scope != scope && o.resolved == Resolution::Scope(scope))
    }
}

pub fn analyze(module: &Module) -> ScopeTable {
    let mut a = Analyzer {
        table: ScopeTable::default(),
        pending: Vec::new(),
    };
    let root = a.new_scope(ScopeKind::Module, "<module>", None, 0);
    a.block(&module.body, root);
    a.resolve_all();
    a.table
}

struct Analyzer {
    table: ScopeTable,
    pending: Vec<u32>,
}

impl Analyzer {
    fn new_scope(&mut self, kind: ScopeKind, name: &str, parent: Option<ScopeId>, line: u32) -> ScopeId {
        self.table.scopes.push(Scope {
            kind,
            name: name.to_string(),
            parent,
            line,
            bindings: BTreeMap::new(),
            globals: BTreeSet::new(),
            nonlocals: BTreeSet::new(),
        });
        self.table.scopes.len() - 1
    }

    fn record(&mut self, ident: &Ident, scope: ScopeId, binding: Option<BindKind>) {
        let mut target = scope;
        if binding == Some(BindKind::Walrus) {
            while self.table.scopes[target].kind == ScopeKind::Comprehension {
                target = self.table.scopes[target].parent.unwrap_or(0);
            }
        }
        if let Some(kind) = binding {
            self.table.scopes[target]
                .bindings
                .entry(ident.name.clone())
                .or_default()
                .push(kind);
        }
        self.table.occurrences.insert(
            ident.id,
            Occurrence {
                name: ident.name.clone(),
                scope: target,
                binding,
                resolved: Resolution::Unresolved,
            },
        );
        self.pending.push(ident.id);
    }

    fn resolve_all(&mut self) {
        for id in std::mem::take(&mut self.pending) {
            let occ = &self.table.occurrences[&id];
            let r = self.lookup(&occ.name, occ.scope);
            self.table.occurrences.get_mut(&id).unwrap().resolved = r;
        }
    }

    fn lookup(&self, name: &str, start: ScopeId) -> Resolution {
        let scopes = &self.table.scopes;
        let s = &scopes[start];
        if s.globals.contains(name) {
            return if scopes[0].bindings.contains_key(name) {
                Resolution::Scope(0)
            } else if is_builtin(name) {
                Resolution::Builtin
            } else {
                // a `global` declaration makes the module binding real even
                // when only assigned inside functions
                Resolution::Scope(0)
            };
        }
        if !s.nonlocals.contains(name) && s.bindings.contains_key(name) {
            return Resolution::Scope(start);
        }
        let mut cur = s.parent;
        while let Some(c) = cur {
            let sc = &scopes[c];
            if sc.kind != ScopeKind::Class || c == start {
                if sc.globals.contains(name) {
                    return Resolution::Scope(0);
                }
                if sc.bindings.contains_key(name) && !sc.nonlocals.contains(name) {
                    if sc.kind == ScopeKind::Module && s.nonlocals.contains(name) {
                        return Resolution::Unresolved;
                    }
                    return Resolution::Scope(c);
                }
            }
            cur = sc.parent;
        }
        if is_builtin(name) {
            Resolution::Builtin
        } else {
            Resolution::Unresolved
        }
    }

    fn block(&mut self, body: &[Stmt], scope: ScopeId) {
        for s in body {
            self.stmt(s, scope);
        }
    }

    fn target(&mut self, e: &Expr, scope: ScopeId, kind: BindKind) {
        match e {
            Expr::Name(id) => self.record(id, scope, Some(kind)),
            Expr::Tuple(items) | Expr::List(items) => {
                for it in items {
                    self.target(it, scope, kind);
                }
            }
            Expr::Starred(inner) => self.target(inner, scope, kind),
            other => self.expr(other, scope),
        }
    }

    fn params_defaults(&mut self, params: &Params, scope: ScopeId, annotations: bool) {
        for p in params.all() {
            if let Some(d) = &p.default {
                self.expr(d, scope);
            }
            if annotations {
                if let Some(a) = &p.annotation {
                    self.expr(a, scope);
                }
            }
        }
    }

    fn stmt(&mut self, s: &Stmt, scope: ScopeId) {
        match &s.kind {
            StmtKind::FunctionDef(f) => {
                for d in &f.decorators {
                    self.expr(d, scope);
                }
                self.params_defaults(&f.params, scope, true);
                if let Some(r) = &f.returns {
                    self.expr(r, scope);
                }
                self.record(&f.name, scope, Some(BindKind::Function));
                let inner = self.new_scope(ScopeKind::Function, &f.name.name, Some(scope), s.line);
                self.table.def_scopes.insert(f.name.id, inner);
                self.declare(&f.body, inner);
                for p in f.params.all() {
                    self.record(&p.name, inner, Some(BindKind::Param));
                }
                self.block(&f.body, inner);
            }
            StmtKind::ClassDef(c) => {
                for d in &c.decorators {
                    self.expr(d, scope);
                }
                for b in &c.bases {
                    self.expr(b.expr(), scope);
                }
                self.record(&c.name, scope, Some(BindKind::Class));
                let inner = self.new_scope(ScopeKind::Class, &c.name.name, Some(scope), s.line);
                self.table.def_scopes.insert(c.name.id, inner);
                self.declare(&c.body, inner);
                self.block(&c.body, inner);
            }
            StmtKind::Assign { targets, value } => {
                self.expr(value, scope);
                for t in targets {
                    self.target(t, scope, BindKind::Assign);
                }
            }
            StmtKind::AugAssign { target, value, .. } => {
                self.expr(value, scope);
                self.target(target, scope, BindKind::Assign);
            }
            StmtKind::AnnAssign {
                target,
                annotation,
                value,
            } => {
                if let Some(v) = value {
                    self.expr(v, scope);
                }
                self.expr(annotation, scope);
                if value.is_some() || !matches!(target, Expr::Name(_)) {
                    self.target(target, scope, BindKind::Assign);
                } else if let Expr::Name(id) = target {
                    // bare annotation still makes the name local
                    self.record(id, scope, Some(BindKind::Assign));
                }
            }
            StmtKind::For {
                target,
                iter,
                body,
                orelse,
                ..
            } => {
                self.expr(iter, scope);
                self.target(target, scope, BindKind::Loop);
                self.block(body, scope);
                self.block(orelse, scope);
            }
            StmtKind::With { items, body, .. } => {
                for it in items {
                    self.expr(&it.context, scope);
                    if let Some(t) = &it.target {
                        self.target(t, scope, BindKind::With);
                    }
                }
                self.block(body, scope);
            }
            StmtKind::Try {
                body,
                handlers,
                orelse,
                finalbody,
            } => {
                self.block(body, scope);
                for h in handlers {
                    if let Some(k) = &h.kind {
                        self.expr(k, scope);
                    }
                    if let Some(n) = &h.name {
                        self.record(n, scope, Some(BindKind::Except));
                    }
                    self.block(&h.body, scope);
                }
                self.block(orelse, scope);
                self.block(finalbody, scope);
            }
            StmtKind::Delete(targets) => {
                for t in targets {
                    self.target(t, scope, BindKind::Delete);
                }
            }
            StmtKind::Import(names) | StmtKind::ImportFrom { names, .. } => {
                for a in names {
                    if a.name != "*" {
                        self.record(&a.bound, scope, Some(BindKind::Import));
                    }
                }
            }
            StmtKind::Global(names) | StmtKind::Nonlocal(names) => {
                for n in names {
                    self.record(n, scope, None);
                }
            }
            _ => {
                for e in s.kind.header_exprs() {
                    self.expr(e, scope);
                }
                for b in s.blocks() {
                    self.block(b, scope);
                }
            }
        }
    }

    /// Pre-registers `global`/`nonlocal` declarations of a new scope so that
    /// bindings recorded later land in the right place.
    fn declare(&mut self, body: &[Stmt], scope: ScopeId) {
        for s in body {
            match &s.kind {
                StmtKind::Global(names) => {
                    for n in names {
                        self.table.scopes[scope].globals.insert(n.name.clone());
                    }
                }
                StmtKind::Nonlocal(names) => {
                    for n in names {
                        self.table.scopes[scope].nonlocals.insert(n.name.clone());
                    }
                }
                StmtKind::FunctionDef(_) | StmtKind::ClassDef(_) => {}
                _ => {
                    for b in s.blocks() {
                        self.declare(b, scope);
                    }
                }
            }
        }
    }

    fn comprehension(&mut self, gens: &[Comprehension], elts: &[&Expr], scope: ScopeId) {
        let Some(first) = gens.first() else {
            return;
        };
        self.expr(&first.iter, scope);
        let inner = self.new_scope(ScopeKind::Comprehension, "<comprehension>", Some(scope), 0);
        for (i, g) in gens.iter().enumerate() {
            if i > 0 {
                self.expr(&g.iter, inner);
            }
            self.target(&g.target, inner, BindKind::Loop);
            for c in &g.ifs {
                self.expr(c, inner);
            }
        }
        for e in elts {
            self.expr(e, inner);
        }
    }

    fn expr(&mut self, e: &Expr, scope: ScopeId) {
        match e {
            Expr::Name(id) => self.record(id, scope, None),
            Expr::NamedExpr { target, value } => {
                self.expr(value, scope);
                self.record(target, scope, Some(BindKind::Walrus));
            }
            Expr::Lambda { params, body } => {
                self.params_defaults(params, scope, false);
                let inner = self.new_scope(ScopeKind::Lambda, "<lambda>", Some(scope), 0);
                for p in params.all() {
                    self.record(&p.name, inner, Some(BindKind::Param));
                }
                self.expr(body, inner);
            }
            Expr::ListComp { elt, generators }
            | Expr::SetComp { elt, generators }
            | Expr::GeneratorExp { elt, generators } => {
                self.comprehension(generators, &[elt], scope)
            }
            Expr::DictComp {
                key,
                value,
                generators,
            } => self.comprehension(generators, &[key, value], scope),
            other => {
                for c in other.children() {
                    self.expr(c, scope);
                }
            }
        }
    }
}

/// Identifiers referenced anywhere inside the statements, including nested
/// scopes.
pub fn walk_stmt_idents<'a>(body: &'a [Stmt], f: &mut dyn FnMut(&'a Ident)) {
    fn expr<'a>(e: &'a Expr, f: &mut dyn FnMut(&'a Ident)) {
        match e {
            Expr::Name(id) => f(id),
            Expr::NamedExpr { target, value } => {
                expr(value, f);
                f(target);
            }
            Expr::Lambda { params, body } => {
                for p in params.all() {
                    if let Some(d) = &p.default {
                        expr(d, f);
                    }
                    f(&p.name);
                }
                expr(body, f);
            }
            _ => {
                for c in e.children() {
                    expr(c, f);
                }
            }
        }
    }
    for s in body {
        match &s.kind {
            StmtKind::FunctionDef(func) => {
                for e in s.kind.header_exprs() {
                    expr(e, f);
                }
                f(&func.name);
                for p in func.params.all() {
                    f(&p.name);
                }
            }
            StmtKind::ClassDef(c) => {
                for e in s.kind.header_exprs() {
                    expr(e, f);
                }
                f(&c.name);
            }
            StmtKind::Import(names) | StmtKind::ImportFrom { names, .. } => {
                for a in names {
                    f(&a.bound);
                }
            }
            StmtKind::Global(names) | StmtKind::Nonlocal(names) => {
                for n in names {
                    f(n);
                }
            }
            StmtKind::Try { handlers, .. } => {
                for h in handlers {
                    if let Some(k) = &h.kind {
                        expr(k, f);
                    }
                    if let Some(n) = &h.name {
                        f(n);
                    }
                }
            }
            _ => {
                for e in s.kind.header_exprs() {
                    expr(e, f);
                }
            }
        }
        for b in s.blocks() {
            walk_stmt_idents(b, f);
        }
    }
}

/// Identifiers inside one expression, including lambda parameters and walrus
/// targets.
pub fn walk_expr_idents<'a>(e: &'a Expr, f: &mut dyn FnMut(&'a Ident)) {
    fn go<'a>(e: &'a Expr, f: &mut dyn FnMut(&'a Ident)) {
        match e {
            Expr::Name(id) => f(id),
            Expr::NamedExpr { target, value } => {
                go(value, f);
                f(target);
            }
            Expr::Lambda { params, body } => {
                for p in params.all() {
                    if let Some(d) = &p.default {
                        go(d, f);
                    }
                    f(&p.name);
                }
                go(body, f);
            }
            _ => {
                for c in e.children() {
                    go(c, f);
                }
            }
        }
    }
    go(e, f);
}

#[cfg(test)]
mod tests {
    use super::super::parse_module;
    use super::*;

    fn table(src: &str) -> (Module, ScopeTable) {
        let mut m = parse_module(src).unwrap();
        number_idents(&mut m);
        let t = analyze(&m);
        (m, t)
    }

    fn resolutions(t: &ScopeTable, name: &str) -> Vec<Resolution> {
        t.occurrences
            .values()
            .filter(|o| o.name == name)
            .map(|o| o.resolved)
            .collect()
    }

    #[test]
    fn locals_shadow_globals() {
        let (_, t) = table("x = 1\ndef f():\n    x = 2\n    return x\ndef g():\n    return x\n");
        let r = resolutions(&t, "x");
        assert_eq!(r[0], Resolution::Scope(0));
        assert!(matches!(r[1], Resolution::Scope(s) if s != 0));
        assert_eq!(r[3], Resolution::Scope(0));
    }

    #[test]
    fn class_scope_is_skipped_by_methods() {
        let (_, t) = table("y = 0\nclass A:\n    y = 1\n    def m(self):\n        return y\n");
        let r = resolutions(&t, "y");
        assert_eq!(r.last(), Some(&Resolution::Scope(0)));
    }

    #[test]
    fn global_and_nonlocal() {
        let (_, t) = table(
            "def f():\n    global count\n    count = 1\n    n = 0\n    def g():\n        nonlocal n\n        n += 1\n    g()\n",
        );
        assert!(resolutions(&t, "count").iter().all(|r| *r == Resolution::Scope(0)));
        let n = resolutions(&t, "n");
        let f_scope = t.function_scope("f", 1).unwrap();
        assert!(n.iter().all(|r| *r == Resolution::Scope(f_scope)));
    }

    #[test]
    fn comprehension_targets_are_private_but_walrus_leaks() {
        let (_, t) = table("def f(xs):\n    ys = [x for x in xs if (last := x)]\n    return last\n");
        let f_scope = t.function_scope("f", 1).unwrap();
        let last = resolutions(&t, "last");
        assert!(last.iter().all(|r| *r == Resolution::Scope(f_scope)));
        let x = resolutions(&t, "x");
        assert!(x.iter().all(|r| matches!(r, Resolution::Scope(s) if *s != f_scope)));
        let xs = resolutions(&t, "xs");
        assert!(xs.iter().all(|r| *r == Resolution::Scope(f_scope)));
    }

    #[test]
    fn builtins_and_unresolved() {
        let (_, t) = table("print(len(undefined_name))\n");
        assert_eq!(resolutions(&t, "print"), vec![Resolution::Builtin]);
        assert_eq!(resolutions(&t, "undefined_name"), vec![Resolution::Unresolved]);
    }
}
