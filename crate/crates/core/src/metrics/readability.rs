//! The thirteen readability indicators, measured on the canonical emission
//! of each file.
//!
//! Token-based counts (R1, R2, R11, R13) use significant lexer tokens:
//! names, keywords, literals and operators, but not layout tokens. Unit-level
//! values are sums over files except the maxima R9, R10 and R11 and the
//! entropy R13, which is taken over the unit's combined token stream.

use std::collections::{BTreeMap, BTreeSet};

use super::ReadabilityVector;
use crate::python::ast::*;
use crate::python::emit_module;
use crate::python::lexer::{tokenize, Token};
use crate::python::scope::{analyze, BindKind, Resolution, ScopeId, ScopeTable};
use crate::unit::ProgramUnit;

/// Builtins treated as type conversions for nested-casting detection.
const CASTS: &[&str] = &[
    "int", "float", "str", "bool", "list", "tuple", "set", "dict", "complex", "bytes",
    "frozenset", "bytearray",
];

/// Constructors whose result is a container.
const CONTAINER_CALLS: &[&str] = &[
    "list", "dict", "set", "tuple", "frozenset", "sorted", "bytearray", "deque", "defaultdict",
    "Counter", "OrderedDict", "array", "zeros", "ones", "Queue",
];

/// Annotation heads naming container types.
const CONTAINER_TYPES: &[&str] = &[
    "list", "dict", "set", "tuple", "frozenset", "List", "Dict", "Set", "Tuple", "FrozenSet",
    "Sequence", "Mapping", "Iterable", "Deque", "DefaultDict", "MutableMapping",
    "MutableSequence",
];

pub fn readability_vector(unit: &ProgramUnit) -> ReadabilityVector {
    let mut total = ReadabilityVector::default();
    let mut all_tokens: Vec<String> = Vec::new();
    for (_, f) in unit.files() {
        let text = emit_module(&f.module);
        let tokens = significant_tokens(&text);
        let v = module_readability(&f.module, &tokens);
        all_tokens.extend(tokens.into_iter().map(|t| t.text));
        total.r1 += v.r1;
        total.r2 += v.r2;
        total.r3 += v.r3;
        total.r4 += v.r4;
        total.r5 += v.r5;
        total.r6 += v.r6;
        total.r7 += v.r7;
        total.r8 += v.r8;
        total.r9 = total.r9.max(v.r9);
        total.r10 = total.r10.max(v.r10);
        total.r11 = total.r11.max(v.r11);
        total.r12 += v.r12;
    }
    total.r13 = token_entropy(&all_tokens);
    total
}

/// Readability of a single module given as source text.
pub fn source_readability(module: &Module) -> ReadabilityVector {
    let tokens = significant_tokens(&emit_module(module));
    let mut v = module_readability(module, &tokens);
    let texts: Vec<String> = tokens.into_iter().map(|t| t.text).collect();
    v.r13 = token_entropy(&texts);
    v
}

fn significant_tokens(text: &str) -> Vec<Token> {
    tokenize(text)
        .expect("emitted source always lexes")
        .into_iter()
        .filter(Token::is_significant)
        .collect()
}

/// Shannon entropy in bits of the token frequency distribution; 0 for an
/// empty stream.
pub fn token_entropy<S: AsRef<str>>(tokens: &[S]) -> f64 {
    if tokens.is_empty() {
        return 0.0;
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for t in tokens {
        *counts.entry(t.as_ref()).or_default() += 1;
    }
    let n = tokens.len() as f64;
    let h: f64 = counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    // avoid -0.0 for single-symbol streams
    h.max(0.0)
}

fn module_readability(module: &Module, tokens: &[Token]) -> ReadabilityVector {
    let mut per_line: BTreeMap<u32, u32> = BTreeMap::new();
    for t in tokens {
        *per_line.entry(t.line).or_default() += 1;
    }
    let (r3, r4) = variables(module);
    let mut v = ReadabilityVector {
        r1: tokens.len() as u32,
        r2: per_line.len() as u32,
        r3,
        r4,
        r11: per_line.values().copied().max().unwrap_or(0),
        ..Default::default()
    };
    walk_stmts(&module.body, &mut |s| match &s.kind {
        StmtKind::If { .. } => v.r6 += 1,
        StmtKind::For { .. } | StmtKind::While { .. } => v.r7 += 1,
        StmtKind::Assign { .. } => v.r8 += 1,
        StmtKind::AugAssign { .. } => {
            v.r8 += 1;
            v.r5 += 1;
        }
        StmtKind::AnnAssign { value: Some(_), .. } => v.r8 += 1,
        _ => {}
    });
    walk_exprs(&module.body, &mut |e| match e {
        Expr::BinOp { .. } | Expr::UnaryOp { .. } => v.r5 += 1,
        Expr::Compare { ops, .. } => v.r5 += ops.len() as u32,
        Expr::BoolOp { values, .. } => v.r5 += values.len() as u32 - 1,
        Expr::NamedExpr { .. } => v.r8 += 1,
        _ => {}
    });
    let (loops, ifs) = max_nesting(&module.body, 0, 0);
    v.r9 = loops;
    v.r10 = ifs;
    walk_stmts(&module.body, &mut |s| {
        if s.kind.header_exprs().iter().any(|e| has_nested_cast(e)) {
            v.r12 += 1;
        }
    });
    v
}

fn is_cast_call(e: &Expr) -> bool {
    matches!(e, Expr::Call { func, .. } if func.as_name().is_some_and(|n| CASTS.contains(&n)))
}

fn has_nested_cast(e: &Expr) -> bool {
    e.any(&mut |x| match x {
        Expr::Call { args, .. } if is_cast_call(x) => {
            args.iter().any(|a| a.expr().any(&mut is_cast_call))
        }
        _ => false,
    })
}

/// Maximum loop and `if` nesting levels, counted per function.
fn max_nesting(body: &[Stmt], loops: u32, ifs: u32) -> (u32, u32) {
    let mut best = (0, 0);
    let mut take = |(a, b): (u32, u32)| {
        best.0 = best.0.max(a);
        best.1 = best.1.max(b);
    };
    for s in body {
        match &s.kind {
            StmtKind::FunctionDef(f) => take(max_nesting(&f.body, 0, 0)),
            StmtKind::ClassDef(c) => take(max_nesting(&c.body, 0, 0)),
            StmtKind::If { body, orelse, .. } => {
                take((loops, ifs + 1));
                take(max_nesting(body, loops, ifs + 1));
                let elif = matches!(orelse.as_slice(), [e] if matches!(e.kind, StmtKind::If { .. }));
                if elif {
                    take(max_nesting(orelse, loops, ifs));
                } else {
                    take(max_nesting(orelse, loops, ifs + 1));
                }
            }
            StmtKind::For { body, orelse, .. } | StmtKind::While { body, orelse, .. } => {
                take((loops + 1, ifs));
                take(max_nesting(body, loops + 1, ifs));
                take(max_nesting(orelse, loops, ifs));
            }
            _ => {
                for b in s.blocks() {
                    take(max_nesting(b, loops, ifs));
                }
            }
        }
    }
    best
}

fn head_name(e: &Expr) -> Option<&str> {
    match e {
        Expr::Name(id) => Some(&id.name),
        Expr::Attribute { attr, .. } => Some(attr),
        Expr::Subscript { value, .. } => head_name(value),
        _ => None,
    }
}

pub(crate) fn is_compound_value(e: &Expr) -> bool {
    match e {
        Expr::List(_)
        | Expr::Tuple(_)
        | Expr::Set(_)
        | Expr::Dict(_)
        | Expr::ListComp { .. }
        | Expr::SetComp { .. }
        | Expr::DictComp { .. } => true,
        Expr::Call { func, .. } => head_name(func).is_some_and(|n| CONTAINER_CALLS.contains(&n)),
        _ => false,
    }
}

fn is_compound_type(e: &Expr) -> bool {
    head_name(e).is_some_and(|n| CONTAINER_TYPES.contains(&n))
}

/// Counts distinct variables per scope, split into primitive and compound.
/// A variable is compound when any of its bindings holds a container.
fn variables(module: &Module) -> (u32, u32) {
    let mut m = module.clone();
    number_idents(&mut m);
    let table = analyze(&m);
    let mut compound: BTreeSet<(ScopeId, String)> = BTreeSet::new();
    let mut mark = |table: &ScopeTable, id: &Ident| {
        if let Resolution::Scope(s) = table.resolve(id) {
            compound.insert((s, id.name.clone()));
        }
    };
    walk_stmts(&m.body, &mut |s| match &s.kind {
        StmtKind::Assign { targets, value } if is_compound_value(value) => {
            for t in targets {
                if let Expr::Name(id) = t {
                    mark(&table, id);
                }
            }
        }
        StmtKind::AnnAssign {
            target: Expr::Name(id),
            annotation,
            value,
        } => {
            if is_compound_type(annotation) || value.as_ref().is_some_and(is_compound_value) {
                mark(&table, id);
            }
        }
        StmtKind::FunctionDef(f) => {
            for p in f.params.all() {
                let ann = p.annotation.as_ref().is_some_and(is_compound_type);
                let def = p.default.as_ref().is_some_and(is_compound_value);
                if ann || def {
                    mark(&table, &p.name);
                }
            }
        }
        _ => {}
    });
    walk_exprs(&m.body, &mut |e| {
        if let Expr::NamedExpr { target, value } = e {
            if is_compound_value(value) {
                mark(&table, target);
            }
        }
    });
    let mut primitive = 0;
    let mut containers = 0;
    for (sid, scope) in table.scopes.iter().enumerate() {
        for (name, kinds) in &scope.bindings {
            let is_var = kinds.iter().any(|k| {
                matches!(
                    k,
                    BindKind::Param
                        | BindKind::Assign
                        | BindKind::Loop
                        | BindKind::With
                        | BindKind::Except
                        | BindKind::Walrus
                )
            });
            if !is_var {
                continue;
            }
            if compound.contains(&(sid, name.clone())) {
                containers += 1;
            } else {
                primitive += 1;
            }
        }
    }
    (primitive, containers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::python::parse_module;

    fn rv(src: &str) -> ReadabilityVector {
        source_readability(&parse_module(src).unwrap())
    }

    #[test]
    fn empty_body_has_no_structure() {
        let v = rv("def f():\n    pass\n");
        assert_eq!((v.r6, v.r7, v.r9, v.r10), (0, 0, 0, 0));
        // def f ( ) : pass
        assert_eq!(v.r1, 6);
        assert_eq!(v.r2, 2);
        assert_eq!(v.r11, 5);
    }

    #[test]
    fn doubly_nested_for() {
        let v = rv("for i in range(3):\n    for j in range(i):\n        print(i, j)\n");
        assert_eq!(v.r7, 2);
        assert_eq!(v.r9, 2);
        assert_eq!(v.r10, 0);
    }

    #[test]
    fn if_nesting_treats_elif_as_same_level() {
        let v = rv("def f(x):\n    if x > 1:\n        if x > 2:\n            return 2\n    elif x < 0:\n        if x < -1:\n            return -1\n    return 0\n");
        assert_eq!(v.r6, 4);
        assert_eq!(v.r10, 2);
    }

    #[test]
    fn variables_operators_assignments() {
        let src = "def f(a, b=None):\n    xs = [a]\n    total = 0\n    for x in xs:\n        total += x * 2 - -1\n    if (n := len(xs)) > 0 and not b:\n        total = total\n    return total\n";
        let v = rv(src);
        // a, b, total, x, n primitive; xs compound
        assert_eq!((v.r3, v.r4), (5, 1));
        // += * - unary- > and not
        assert_eq!(v.r5, 7);
        // xs=, total=, +=, :=, total=
        assert_eq!(v.r8, 5);
    }

    #[test]
    fn nested_casting() {
        let v = rv("x = int(str(5))\ny = int('5')\nif float(int(x)):\n    pass\n");
        assert_eq!(v.r12, 2);
    }

    #[test]
    fn entropy_values() {
        assert_eq!(token_entropy(&["a", "a", "a"]), 0.0);
        assert!((token_entropy(&["a", "b", "a", "b"]) - 1.0).abs() < 1e-12);
        assert!((token_entropy(&["a", "b", "c", "d"]) - 2.0).abs() < 1e-12);
        assert_eq!(token_entropy::<&str>(&[]), 0.0);
    }
}
