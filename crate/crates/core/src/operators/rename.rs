//! Renaming operators N1 (variables) and N2 (functions), and the global
//! rename used to naturalize operator-generated identifiers.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use rand::seq::SliceRandom;

use super::structure::{debug_field_names, declared_names, uses_frame};
use super::util::*;
use super::{Location, NameKind, OpRng, OperatorError, OperatorId, SyntheticName};
use crate::python::ast::*;
use crate::python::scope::{BindKind, Resolution, ScopeKind, ScopeTable};
use crate::unit::{module_name, ProgramUnit};

/// Longest identifier the renaming operators extend.
const MAX_NAME_LEN: usize = 20;

struct Words {
    variable: Vec<String>,
    function: Vec<String>,
}

fn words() -> &'static Words {
    static WORDS: OnceLock<Words> = OnceLock::new();
    WORDS.get_or_init(|| {
        let mut w = Words {
            variable: Vec::new(),
            function: Vec::new(),
        };
        let mut section = "";
        for line in include_str!("../../data/domain_words.txt").lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.starts_with('[') {
                section = line.trim_matches(|c| c == '[' || c == ']');
                continue;
            }
            match section {
                "variable" => w.variable.push(line.to_string()),
                "function" => w.function.push(line.to_string()),
                _ => {}
            }
        }
        w
    })
}

/// Suffix words for renamed identifiers of the given kind.
pub fn domain_words(kind: NameKind) -> &'static [String] {
    match kind {
        NameKind::Function | NameKind::Class => &words().function,
        NameKind::Variable => &words().variable,
    }
}

const VARIABLE_KINDS: &[BindKind] = &[
    BindKind::Param,
    BindKind::Assign,
    BindKind::Loop,
    BindKind::With,
    BindKind::Except,
    BindKind::Walrus,
];

/// Renamable variables of one function.
fn variable_candidates(f: &FunctionDef, cx: &Cx, table: &ScopeTable, declared: &BTreeSet<String>) -> Vec<String> {
    let Some(scope) = table.def_scope(&f.name) else {
        return Vec::new();
    };
    if uses_frame(&f.body) {
        return Vec::new();
    }
    let is_method = table.scopes[scope]
        .parent
        .is_some_and(|p| table.scopes[p].kind == ScopeKind::Class);
    let receiver = f
        .params
        .posonly
        .iter()
        .chain(f.params.args.iter())
        .next()
        .filter(|_| is_method)
        .map(|p| p.name.name.clone());
    let params: BTreeSet<String> = f.params.all().map(|p| p.name.name.clone()).collect();
    let debug = debug_field_names(&f.body);
    table.scopes[scope]
        .bindings
        .iter()
        .filter(|(name, kinds)| {
            kinds.iter().all(|k| VARIABLE_KINDS.contains(k))
                && name.len() <= MAX_NAME_LEN
                && !is_mangled(name)
                && Some(*name) != receiver.as_ref()
                && !matches!(name.as_str(), "self" | "cls")
                && !declared.contains(*name)
                && !debug.contains(*name)
                && !(params.contains(*name)
                    && (cx.test_names.contains(*name) || cx.keyword_args.contains(*name)))
        })
        .map(|(n, _)| n.clone())
        .collect()
}

/// Whether another unit module imports everything from `module`.
fn star_imported(unit: &ProgramUnit, module: &str) -> bool {
    unit.files().any(|(_, f)| {
        f.module.body.iter().any(|s| {
            matches!(&s.kind, StmtKind::ImportFrom { module: Some(m), names, .. }
                if m == module && names.iter().any(|a| a.name == "*"))
        })
    })
}

fn function_renamable(f: &FunctionDef, cx: &Cx, table: &ScopeTable, declared: &BTreeSet<String>) -> bool {
    let name = &f.name.name;
    let Some(occ) = table.occurrence(&f.name) else {
        return false;
    };
    let owner = &table.scopes[occ.scope];
    owner.kind != ScopeKind::Class
        && !(name.starts_with("__") && name.ends_with("__"))
        && name.len() <= MAX_NAME_LEN
        && !cx.test_names.contains(name)
        && !declared.contains(name)
        && owner
            .bindings
            .get(name)
            .is_some_and(|k| k.as_slice() == [BindKind::Function])
}

pub fn locations(op: OperatorId, unit: &ProgramUnit, cx: &Cx) -> Vec<Location> {
    let mut out = Vec::new();
    for file in &unit.manifest.source_files {
        let (Some(module), Some(table)) = (unit.module(file), cx.tables.get(file)) else {
            continue;
        };
        let declared = declared_names(module);
        if op == OperatorId::N2 && star_imported(unit, &module_name(file)) {
            continue;
        }
        for info in statements(&module.body) {
            let (StmtKind::FunctionDef(f), Some(lineage)) = (&info.stmt.kind, info.stmt.lineage) else {
                continue;
            };
            match op {
                OperatorId::N1 => {
                    for v in variable_candidates(f, cx, table, &declared) {
                        out.push(
                            Location::new(file, lineage, format!("{v} in {}", f.name.name)).with_target(&v),
                        );
                    }
                }
                OperatorId::N2 if function_renamable(f, cx, table, &declared) => {
                    out.push(
                        Location::new(file, lineage, format!("function {}", f.name.name))
                            .with_target(&f.name.name),
                    );
                }
                _ => {}
            }
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
) -> Result<Vec<SyntheticName>, OperatorError> {
    let fail = |m: &str| OperatorError::TransformFailed(op, m.to_string());
    let old = loc.target.clone().ok_or_else(|| fail("missing target name"))?;
    let table = cx.tables.get(&loc.file).ok_or_else(|| fail("no file"))?;
    let kind = if op == OperatorId::N1 {
        NameKind::Variable
    } else {
        NameKind::Function
    };
    let word = domain_words(kind).choose(rng).ok_or_else(|| fail("no words"))?;
    let new = cx.fresh().name(&format!("{old}_{word}"));
    let module = unit.module_mut(&loc.file).ok_or_else(|| fail("no file"))?;
    let (block, i) = locate(&mut module.body, loc.lineage).ok_or_else(|| fail("anchor vanished"))?;
    let StmtKind::FunctionDef(f) = &block[i].kind else {
        return Err(fail("anchor is not a function"));
    };
    let target_scope = match op {
        OperatorId::N1 => table.def_scope(&f.name),
        _ => table.occurrence(&f.name).map(|o| o.scope),
    }
    .ok_or_else(|| fail("unknown scope"))?;
    let rename_in = |body: &mut [Stmt]| {
        visit_idents_mut(body, &mut |id| {
            if id.name == old && table.resolve(id) == Resolution::Scope(target_scope) {
                id.name = new.clone();
            }
        });
    };
    if op == OperatorId::N1 {
        rename_in(std::slice::from_mut(&mut block[i]));
        return Ok(Vec::new());
    }
    rename_in(&mut module.body);
    if target_scope == 0 {
        rename_importers(unit, &loc.file, &old, &new);
    }
    Ok(Vec::new())
}

/// Updates other unit modules that import a renamed top-level function.
fn rename_importers(unit: &mut ProgramUnit, file: &str, old: &str, new: &str) {
    let modname = module_name(file);
    let others: Vec<String> = unit
        .manifest
        .source_files
        .iter()
        .filter(|f| f.as_str() != file)
        .cloned()
        .collect();
    for other in others {
        let Some(m) = unit.module(&other) else {
            continue;
        };
        let mut touches = false;
        walk_stmts(&m.body, &mut |s| {
            match &s.kind {
                StmtKind::ImportFrom { module: Some(src), .. } if *src == modname => touches = true,
                StmtKind::Import(names) if names.iter().any(|a| a.name == modname) => touches = true,
                _ => {}
            }
        });
        if !touches {
            continue;
        }
        let m = unit.module_mut(&other).expect("file exists");
        number_idents(m);
        let table = crate::python::scope::analyze(m);
        let mut rebound: BTreeSet<String> = BTreeSet::new();
        let mut module_aliases: BTreeSet<String> = BTreeSet::new();
        walk_stmts_mut(&mut m.body, &mut |s| match &mut s.kind {
            StmtKind::ImportFrom { module: Some(src), names, .. } if *src == modname => {
                for a in names.iter_mut() {
                    if a.name == old {
                        a.name = new.to_string();
                        if !a.aliased {
                            rebound.insert(old.to_string());
                            a.bound.name = new.to_string();
                        }
                    }
                }
            }
            StmtKind::Import(names) => {
                for a in names.iter() {
                    if a.name == modname {
                        module_aliases.insert(a.bound.name.clone());
                    }
                }
            }
            _ => {}
        });
        if rebound.contains(old) {
            visit_idents_mut(&mut m.body, &mut |id| {
                if id.name == old && table.resolve(id) == Resolution::Scope(0) {
                    id.name = new.to_string();
                }
            });
        }
        walk_exprs_mut(&mut m.body, &mut |e| {
            if let Expr::Attribute { value, attr } = e {
                if let Expr::Name(id) = &**value {
                    if attr == old && module_aliases.contains(&id.name) && table.resolve(id) == Resolution::Scope(0) {
                        *attr = new.to_string();
                    }
                }
            }
        });
    }
}

/// Renames every identifier spelled `old` across the unit's sources. Only
/// safe for names that are unique in the unit, such as generated ones.
pub fn rename_everywhere(unit: &mut ProgramUnit, old: &str, new: &str) {
    let internal = unit.module_names();
    for path in unit.manifest.source_files.clone() {
        let Some(m) = unit.module(&path) else {
            continue;
        };
        let mut present = false;
        walk_stmts(&m.body, &mut |s| {
            if let StmtKind::ImportFrom { names, .. } = &s.kind {
                present |= names.iter().any(|a| a.name == old);
            }
        });
        crate::python::scope::walk_stmt_idents(&m.body, &mut |id| present |= id.name == old);
        if !present {
            continue;
        }
        let m = unit.module_mut(&path).expect("file exists");
        visit_idents_mut(&mut m.body, &mut |id| {
            if id.name == old {
                id.name = new.to_string();
            }
        });
        walk_stmts_mut(&mut m.body, &mut |s| {
            if let StmtKind::ImportFrom { module: Some(src), names, .. } = &mut s.kind {
                if internal.contains(src.as_str()) {
                    for a in names.iter_mut() {
                        if a.name == old {
                            a.name = new.to_string();
                        }
                    }
                }
            }
        });
    }
}

#[cfg(test)]
mod tests {
    use super::super::{apply_operator, operator_locations};
    use super::*;

    fn targets(u: &ProgramUnit, op: OperatorId) -> Vec<String> {
        operator_locations(u, op)
            .into_iter()
            .map(|l| l.target.unwrap())
            .collect()
    }

    #[test]
    fn variable_candidates_exclude_receivers_and_globals() {
        let src = "class A:\n    def m(self, value):\n        global total\n        total = value\n        tmp = value + 1\n        return tmp\n";
        let u = ProgramUnit::from_source("u", src).unwrap();
        assert_eq!(targets(&u, OperatorId::N1), vec!["tmp", "value"]);
    }

    #[test]
    fn keyword_params_are_kept() {
        let src = "def f(a, b):\n    return a + b\n\n\nf(1, b=2)\n";
        let u = ProgramUnit::from_source("u", src).unwrap();
        assert_eq!(targets(&u, OperatorId::N1), vec!["a"]);
    }

    #[test]
    fn rename_variable_in_its_scope_only() {
        let src = "x = 1\n\n\ndef f(y):\n    x = y\n    return [x for y in range(x)]\n";
        let u = ProgramUnit::from_source("u", src).unwrap();
        let loc = operator_locations(&u, OperatorId::N1)
            .into_iter()
            .find(|l| l.target.as_deref() == Some("y"))
            .unwrap();
        let (out, _) = apply_operator(&u, OperatorId::N1, &loc, 2).unwrap();
        let text = &out.source_texts()["solution.py"];
        let new = text.split("def f(").nth(1).unwrap().split(')').next().unwrap().to_string();
        assert!(new.starts_with("y_"), "{text}");
        assert!(text.contains(&format!("x = {new}")), "{text}");
        assert!(text.contains("for y in range(x)"), "{text}");
        assert!(text.starts_with("x = 1"));
    }

    #[test]
    fn rename_function_across_modules() {
        let u = ProgramUnit::from_files(
            "u",
            &[
                ("solution.py", "from helpers import scale\nimport helpers\n\n\ndef f(x):\n    return scale(x) + helpers.scale(x)\n"),
                ("helpers.py", "def scale(x):\n    return x * 2\n"),
            ],
            &[],
        )
        .unwrap();
        let loc = operator_locations(&u, OperatorId::N2)
            .into_iter()
            .find(|l| l.target.as_deref() == Some("scale"))
            .unwrap();
        let (out, _) = apply_operator(&u, OperatorId::N2, &loc, 5).unwrap();
        let texts = out.source_texts();
        let helper = &texts["helpers.py"];
        let new = helper.trim_start_matches("def ").split('(').next().unwrap();
        assert!(new.starts_with("scale_"));
        assert!(texts["solution.py"].contains(&format!("from helpers import {new}")));
        assert!(texts["solution.py"].contains(&format!("return {new}(x) + helpers.{new}(x)")));
    }

    #[test]
    fn global_rename_touches_imports() {
        let mut u = ProgramUnit::from_files(
            "u",
            &[
                ("solution.py", "from compute_utils import compute_c\n\n\ndef f(a):\n    return compute_c(a)\n"),
                ("compute_utils.py", "def compute_c(a):\n    return a\n"),
            ],
            &[],
        )
        .unwrap();
        rename_everywhere(&mut u, "compute_c", "scaled_value");
        let texts = u.source_texts();
        assert!(texts["solution.py"].contains("from compute_utils import scaled_value"));
        assert!(texts["compute_utils.py"].contains("def scaled_value(a)"));
    }
}
