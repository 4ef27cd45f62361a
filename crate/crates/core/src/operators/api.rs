//! API-call operators A1–A8: insert a harmless call into a third-party or
//! standard-library API before a statement of a function body.

use rand::seq::SliceRandom;

use super::catalog::Catalog;
use super::structure::header_text;
use super::util::*;
use super::{Location, OpRng, OperatorError, OperatorId, SyntheticName};
use crate::python::ast::*;
use crate::unit::ProgramUnit;

pub fn locations(op: OperatorId, unit: &ProgramUnit, cx: &Cx) -> Vec<Location> {
    let templates: Vec<_> = Catalog::active().templates(op).collect();
    if templates.is_empty() {
        return Vec::new();
    }
    let mut rng = <OpRng as rand::SeedableRng>::seed_from_u64(0);
    let imports: Vec<Vec<Stmt>> = templates
        .iter()
        .filter_map(|t| t.instantiate(&mut rng).ok().map(|(i, _)| i))
        .collect();
    let mut out = Vec::new();
    for file in &unit.manifest.source_files {
        let (Some(module), Some(table)) = (unit.module(file), cx.tables.get(file)) else {
            continue;
        };
        for info in statements(&module.body) {
            if !info.directly_in_function() {
                continue;
            }
            let index = *info.path.last().expect("non-empty path");
            if index == 0 && info.stmt.is_docstring() {
                continue;
            }
            let scope = info.scope(table);
            let usable = imports
                .iter()
                .any(|set| set.iter().all(|imp| import_usable(module, table, scope, imp)));
            if let (true, Some(l)) = (usable, info.stmt.lineage) {
                out.push(Location::new(file, l, format!("before {}", header_text(info.stmt))));
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
    let table = cx.tables.get(&loc.file).ok_or_else(|| fail("no file"))?;
    let module = unit.module(&loc.file).ok_or_else(|| fail("no file"))?;
    let info = statements(&module.body)
        .into_iter()
        .find(|i| i.stmt.lineage == Some(loc.lineage))
        .ok_or_else(|| fail("anchor vanished"))?;
    let scope = info.scope(table);
    let mut candidates = Vec::new();
    for t in Catalog::active().templates(op) {
        let (imports, stmt) = t.instantiate(rng).map_err(|e| fail(&e))?;
        if imports.iter().all(|imp| import_usable(module, table, scope, imp)) {
            candidates.push((imports, stmt));
        }
    }
    let (imports, stmt) = candidates
        .choose(rng)
        .cloned()
        .ok_or_else(|| OperatorError::NotApplicable(op, loc.description.clone()))?;
    let module = unit.module_mut(&loc.file).ok_or_else(|| fail("no file"))?;
    let (block, i) = locate(&mut module.body, loc.lineage).ok_or_else(|| fail("anchor vanished"))?;
    block.insert(i, stmt);
    ensure_imports(module, &imports);
    Ok(Vec::new())
}

#[cfg(test)]
mod tests {
    use super::super::{apply_operator, operator_locations};
    use super::*;
    use crate::metrics::complexity_vector;

    const SRC: &str = "def f(x):\n    \"\"\"Doc.\"\"\"\n    y = x + 1\n    return y\n";

    #[test]
    fn every_api_operator_adds_an_external_call() {
        for op in OperatorId::ALL.iter().filter(|o| o.family() == super::super::Family::ApiCall) {
            let u = ProgramUnit::from_source("u", SRC).unwrap();
            let locs = operator_locations(&u, *op);
            assert_eq!(locs.len(), 2, "{op}: docstring is skipped");
            let (out, _) = apply_operator(&u, *op, &locs[0], 11).unwrap();
            assert!(complexity_vector(&out).c5 > complexity_vector(&u).c5, "{op}");
            let text = &out.source_texts()["solution.py"];
            assert!(text.contains("\"\"\"Doc.\"\"\"\n    "), "{op}: {text}");
        }
    }

    #[test]
    fn shadowed_module_blocks_insertion() {
        let u = ProgramUnit::from_source("u", "def f(time):\n    return time\n").unwrap();
        assert!(operator_locations(&u, OperatorId::A8).is_empty());
        let u = ProgramUnit::from_source("u", "import time\n\n\ndef f(x):\n    return time.time() + x\n").unwrap();
        let locs = operator_locations(&u, OperatorId::A8);
        let (out, _) = apply_operator(&u, OperatorId::A8, &locs[0], 1).unwrap();
        assert_eq!(out.source_texts()["solution.py"].matches("import time").count(), 1);
    }
}
