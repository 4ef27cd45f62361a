//! The seven complexity indicators.
//!
//! * C1 cyclomatic complexity summed over functions plus module- and
//!   class-level decision points
//! * C2 compound predicates: `if`/`elif`/`while`/`assert` tests, conditional
//!   expression tests and comprehension filters with two or more atomic
//!   sub-predicates
//! * C3 nesting: for every `for`/`while`/`if`, the number of enclosing loops
//!   and conditionals within the same function
//! * C4 advanced constructs: comprehensions, generator expressions and
//!   generator functions, lambdas, list displays, thread constructions,
//!   recursive functions and decorators
//! * C5 calls into external modules
//! * C6 references to names imported from other modules of the same unit
//! * C7 in-module coupling: `self` attribute uses inside methods and calls to
//!   other module-level functions of the same file

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use super::ComplexityVector;
use crate::python::ast::*;
use crate::python::cfg::cyclomatic_total;
use crate::python::scope::{analyze, BindKind, Resolution, ScopeId, ScopeTable};
use crate::unit::ProgramUnit;

/// Modules whose calls never count toward C5.
pub fn structural_modules() -> &'static BTreeSet<String> {
    static SET: OnceLock<BTreeSet<String>> = OnceLock::new();
    SET.get_or_init(|| {
        include_str!("../../data/structural_modules.txt")
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(String::from)
            .collect()
    })
}

pub fn complexity_vector(unit: &ProgramUnit) -> ComplexityVector {
    let local = unit.module_names();
    let mut total = ComplexityVector::default();
    for (_, f) in unit.files() {
        total.add(&module_complexity(&f.module, &local));
    }
    total
}

/// Complexity of one file; `unit_modules` are the dotted names of the files
/// in the same unit.
pub fn module_complexity(module: &Module, unit_modules: &BTreeSet<String>) -> ComplexityVector {
    let mut m = module.clone();
    number_idents(&mut m);
    let table = analyze(&m);
    let imports = import_origins(&m, &table, unit_modules);
    let (c2, c2_connectors) = compound_predicates(&m.body);
    ComplexityVector {
        c1: cyclomatic_total(&m) as u32,
        c2,
        c3: nesting(&m.body, 0),
        c4: advanced_constructs(&m.body, &table),
        c5: external_calls(&m.body, &table, &imports),
        c6: intra_unit_refs(&m.body, &table, &imports),
        c7: coupling(&m.body, &table),
        c2_connectors,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Origin {
    Internal,
    Structural,
    External,
}

type ImportMap = BTreeMap<(ScopeId, String), Origin>;

fn import_origins(m: &Module, table: &ScopeTable, unit_modules: &BTreeSet<String>) -> ImportMap {
    let classify = |module: &str, relative: bool| {
        let top = module.split('.').next().unwrap_or(module);
        if relative || unit_modules.contains(module) || unit_modules.contains(top) {
            Origin::Internal
        } else if structural_modules().contains(top) {
            Origin::Structural
        } else {
            Origin::External
        }
    };
    let mut out = ImportMap::new();
    walk_stmts(&m.body, &mut |s| {
        let (aliases, origin): (&Vec<Alias>, Box<dyn Fn(&Alias) -> Origin>) = match &s.kind {
            StmtKind::Import(names) => (names, Box::new(|a: &Alias| classify(&a.name, false))),
            StmtKind::ImportFrom {
                module,
                names,
                level,
            } => {
                let module = module.clone().unwrap_or_default();
                let relative = *level > 0;
                (names, Box::new(move |_: &Alias| classify(&module, relative)))
            }
            _ => return,
        };
        for a in aliases {
            if let Some(o) = table.occurrence(&a.bound) {
                out.insert((o.scope, a.bound.name.clone()), origin(a));
            }
        }
    });
    out
}

fn origin_of(id: &Ident, table: &ScopeTable, imports: &ImportMap) -> Option<Origin> {
    match table.resolve(id) {
        Resolution::Scope(s) => imports.get(&(s, id.name.clone())).copied(),
        _ => None,
    }
}

/// Strips attribute accesses: `np.linalg.norm` has root `np`.
fn attribute_root(e: &Expr) -> &Expr {
    match e {
        Expr::Attribute { value, .. } => attribute_root(value),
        other => other,
    }
}

fn external_calls(body: &[Stmt], table: &ScopeTable, imports: &ImportMap) -> u32 {
    let mut n = 0;
    walk_exprs(body, &mut |e| {
        if let Expr::Call { func, .. } = e {
            if let Expr::Name(id) = attribute_root(func) {
                if origin_of(id, table, imports) == Some(Origin::External) {
                    n += 1;
                }
            }
        }
    });
    n
}

fn intra_unit_refs(body: &[Stmt], table: &ScopeTable, imports: &ImportMap) -> u32 {
    let mut n = 0;
    walk_exprs(body, &mut |e| {
        if let Expr::Name(id) = e {
            let is_load = table.occurrence(id).is_some_and(|o| o.binding.is_none());
            if is_load && origin_of(id, table, imports) == Some(Origin::Internal) {
                n += 1;
            }
        }
    });
    n
}

/// Atomic sub-predicates of a condition.
pub fn sub_predicates(e: &Expr) -> u32 {
    match e {
        Expr::BoolOp { values, .. } => values.iter().map(sub_predicates).sum(),
        Expr::UnaryOp {
            op: UnaryOp::Not,
            operand,
        } => sub_predicates(operand),
        Expr::Compare { ops, .. } => ops.len() as u32,
        _ => 1,
    }
}

/// Boolean connectors plus extra links of chained comparisons.
pub fn connectors(e: &Expr) -> u32 {
    match e {
        Expr::BoolOp { values, .. } => {
            values.len() as u32 - 1 + values.iter().map(connectors).sum::<u32>()
        }
        Expr::UnaryOp {
            op: UnaryOp::Not,
            operand,
        } => connectors(operand),
        Expr::Compare { ops, .. } => ops.len() as u32 - 1,
        _ => 0,
    }
}

fn compound_predicates(body: &[Stmt]) -> (u32, u32) {
    let mut predicates: Vec<&Expr> = Vec::new();
    walk_stmts(body, &mut |s| match &s.kind {
        StmtKind::If { test, .. } | StmtKind::While { test, .. } | StmtKind::Assert { test, .. } => {
            predicates.push(test)
        }
        _ => {}
    });
    walk_exprs(body, &mut |e| match e {
        Expr::IfExp { test, .. } => predicates.push(test),
        Expr::ListComp { generators, .. }
        | Expr::SetComp { generators, .. }
        | Expr::DictComp { generators, .. }
        | Expr::GeneratorExp { generators, .. } => {
            for g in generators {
                predicates.extend(g.ifs.iter());
            }
        }
        _ => {}
    });
    let compound = predicates.iter().filter(|p| sub_predicates(p) >= 2).count() as u32;
    let conn = predicates.iter().map(|p| connectors(p)).sum();
    (compound, conn)
}

fn is_elif(orelse: &[Stmt]) -> bool {
    matches!(orelse, [s] if matches!(s.kind, StmtKind::If { .. }))
}

fn nesting(body: &[Stmt], depth: u32) -> u32 {
    let mut n = 0;
    for s in body {
        match &s.kind {
            StmtKind::FunctionDef(f) => n += nesting(&f.body, 0),
            StmtKind::ClassDef(c) => n += nesting(&c.body, 0),
            StmtKind::If { body, orelse, .. } => {
                n += depth + nesting(body, depth + 1);
                if is_elif(orelse) {
                    n += nesting(orelse, depth);
                } else {
                    n += nesting(orelse, depth + 1);
                }
            }
            StmtKind::For { body, orelse, .. } | StmtKind::While { body, orelse, .. } => {
                n += depth + nesting(body, depth + 1) + nesting(orelse, depth + 1);
            }
            _ => {
                for b in s.blocks() {
                    n += nesting(b, depth);
                }
            }
        }
    }
    n
}

/// Whether `body` yields, not counting nested functions and classes.
fn yields_locally(body: &[Stmt]) -> bool {
    body.iter().any(|s| match &s.kind {
        StmtKind::FunctionDef(_) | StmtKind::ClassDef(_) => false,
        k => {
            k.header_exprs().iter().any(|e| {
                e.any(&mut |x| {
                    matches!(x, Expr::Yield(_) | Expr::YieldFrom(_))
                })
            }) || s.blocks().iter().any(|b| yields_locally(b))
        }
    })
}

fn is_thread_ctor(func: &Expr) -> bool {
    match func {
        Expr::Attribute { value, attr } => {
            attr == "Thread" && value.as_name() == Some("threading")
        }
        Expr::Name(id) => id.name == "Thread",
        _ => false,
    }
}

fn is_recursive(f: &FunctionDef, table: &ScopeTable, in_class: bool) -> bool {
    let Some(bound) = table.occurrence(&f.name).map(|o| o.scope) else {
        return false;
    };
    let receiver = if in_class {
        f.params
            .posonly
            .iter()
            .chain(f.params.args.iter())
            .next()
            .map(|p| p.name.name.clone())
    } else {
        None
    };
    let mut found = false;
    walk_exprs(&f.body, &mut |e| {
        if let Expr::Call { func, .. } = e {
            match &**func {
                Expr::Name(id) if id.name == f.name.name => {
                    if table.resolve(id) == Resolution::Scope(bound) {
                        found = true;
                    }
                }
                Expr::Attribute { value, attr } if *attr == f.name.name => {
                    if receiver.is_some() && value.as_name() == receiver.as_deref() {
                        found = true;
                    }
                }
                _ => {}
            }
        }
    });
    found
}

fn advanced_constructs(body: &[Stmt], table: &ScopeTable) -> u32 {
    let mut n = 0;
    walk_exprs(body, &mut |e| match e {
        Expr::ListComp { .. }
        | Expr::SetComp { .. }
        | Expr::DictComp { .. }
        | Expr::GeneratorExp { .. }
        | Expr::Lambda { .. }
        | Expr::List(_) => n += 1,
        Expr::Call { func, .. } if is_thread_ctor(func) => n += 1,
        _ => {}
    });
    fn defs(body: &[Stmt], table: &ScopeTable, in_class: bool, n: &mut u32) {
        for s in body {
            match &s.kind {
                StmtKind::FunctionDef(f) => {
                    *n += f.decorators.len() as u32;
                    if is_recursive(f, table, in_class) {
                        *n += 1;
                    }
                    if yields_locally(&f.body) {
                        *n += 1;
                    }
                    defs(&f.body, table, false, n);
                }
                StmtKind::ClassDef(c) => {
                    *n += c.decorators.len() as u32;
                    defs(&c.body, table, true, n);
                }
                _ => {
                    for b in s.blocks() {
                        defs(b, table, false, n);
                    }
                }
            }
        }
    }
    defs(body, table, false, &mut n);
    n
}

fn is_static(f: &FunctionDef) -> bool {
    f.decorators
        .iter()
        .any(|d| d.as_name() == Some("staticmethod"))
}

fn coupling(body: &[Stmt], table: &ScopeTable) -> u32 {
    let mut n = 0;
    // receiver attribute uses in methods
    walk_stmts(body, &mut |s| {
        let StmtKind::ClassDef(c) = &s.kind else {
            return;
        };
        for m in &c.body {
            let StmtKind::FunctionDef(f) = &m.kind else {
                continue;
            };
            if is_static(f) {
                continue;
            }
            let Some(p) = f.params.posonly.iter().chain(f.params.args.iter()).next() else {
                continue;
            };
            let Some(own) = table.occurrence(&p.name).map(|o| o.scope) else {
                continue;
            };
            walk_exprs(&f.body, &mut |e| {
                if let Expr::Attribute { value, .. } = e {
                    if let Expr::Name(id) = &**value {
                        if id.name == p.name.name && table.resolve(id) == Resolution::Scope(own) {
                            n += 1;
                        }
                    }
                }
            });
        }
    });
    // calls between module-level functions
    let module_funcs: BTreeSet<&str> = table.scopes[0]
        .bindings
        .iter()
        .filter(|(_, kinds)| kinds.contains(&BindKind::Function))
        .map(|(name, _)| name.as_str())
        .collect();
    for s in body {
        let own = match &s.kind {
            StmtKind::FunctionDef(f) => Some(f.name.name.as_str()),
            _ => None,
        };
        walk_exprs(std::slice::from_ref(s), &mut |e| {
            if let Expr::Call { func, .. } = e {
                if let Expr::Name(id) = &**func {
                    if module_funcs.contains(id.name.as_str())
                        && Some(id.name.as_str()) != own
                        && table.resolve(id) == Resolution::Scope(0)
                    {
                        n += 1;
                    }
                }
            }
        });
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::python::parse_module;

    fn cv(src: &str) -> ComplexityVector {
        module_complexity(&parse_module(src).unwrap(), &BTreeSet::new())
    }

    #[test]
    fn compound_predicates_and_connectors() {
        let v = cv("def f(a, b, c):\n    if a and b or not c:\n        return 1\n    while 0 < a < 9:\n        a -= 1\n    if a:\n        return 2\n    return [x for x in b if x and c]\n");
        assert_eq!(v.c2, 3);
        // `and`, `or`, chain link, comprehension `and`
        assert_eq!(v.c2_connectors, 4);
    }

    #[test]
    fn nesting_counts_enclosing_levels() {
        let src = "def f(xs):\n    for x in xs:\n        if x:\n            while x:\n                x -= 1\n        elif x is None:\n            pass\n    if xs:\n        pass\n";
        // for:0, if:1, while:2, elif:1, if:0
        assert_eq!(cv(src).c3, 4);
    }

    #[test]
    fn nesting_resets_at_function_boundary() {
        let src = "def f(xs):\n    if xs:\n        def g(y):\n            if y:\n                return 1\n            return 0\n        return g\n";
        assert_eq!(cv(src).c3, 0);
    }

    #[test]
    fn advanced_constructs_counted() {
        let src = "import threading\n\n\ndef deco(fn):\n    return fn\n\n\n@deco\ndef fact(n):\n    return 1 if n < 2 else n * fact(n - 1)\n\n\ndef gen(xs):\n    yield from xs\n\n\ndef g(xs):\n    t = threading.Thread(target=print)\n    ys = [x for x in xs]\n    return (lambda v: v)(ys), [1, 2], sum((y for y in ys))\n";
        // decorator, recursion, generator function, thread, listcomp, lambda,
        // list display, genexp
        assert_eq!(cv(src).c4, 8);
    }

    #[test]
    fn external_and_structural_calls() {
        let src = "import numpy as np\nimport threading\nfrom scipy.stats import ttest_ind\nimport os.path\n\n\ndef f(xs):\n    threading.Thread(target=f).start()\n    os.path.join('a', 'b')\n    np.linalg.norm(xs)\n    return ttest_ind(xs, xs)\n";
        assert_eq!(cv(src).c5, 3);
    }

    #[test]
    fn shadowed_import_is_not_external() {
        let src = "import json\n\n\ndef f(json):\n    return json.loads('1')\n";
        assert_eq!(cv(src).c5, 0);
    }

    #[test]
    fn intra_unit_references() {
        let mut local = BTreeSet::new();
        local.insert("helpers".to_string());
        let src = "from helpers import clean\nimport helpers\nfrom . import tools\n\n\ndef f(x):\n    return clean(helpers.clean(tools.go(x)))\n";
        let v = module_complexity(&parse_module(src).unwrap(), &local);
        assert_eq!(v.c6, 3);
        assert_eq!(v.c5, 0);
    }

    #[test]
    fn coupling_counts_receiver_and_module_calls() {
        let src = "def a(x):\n    return a(x - 1) if x else 0\n\n\ndef b(x):\n    return a(x) + a(x)\n\n\nclass K:\n\n    def m(self):\n        self.v = 1\n        return self.v + b(self.v)\n\n    @staticmethod\n    def s(self):\n        return self.v\n";
        // a->a excluded; b->a twice; 3 self uses; b() from method
        assert_eq!(cv(src).c7, 6);
    }

    #[test]
    fn cyclomatic_includes_module_level() {
        let src = "def f(x):\n    if x:\n        return 1\n    return 0\n\n\nfor i in range(3):\n    f(i)\n";
        assert_eq!(cv(src).c1, 3);
    }
}
