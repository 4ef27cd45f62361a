//! Statement lineage: stable ids that follow statements through
//! transformations, plus normalized fingerprints used to decide whether two
//! statements with the same lineage still have the same shape.

use std::collections::BTreeMap;

use super::ast::*;
use super::emit::emit_stmts;

/// Assigns fresh ids, in pre-order, to every statement that lacks one.
/// Returns the next unused counter value.
pub fn assign_missing(body: &mut [Stmt], mut next: u32) -> u32 {
    walk_stmts_mut(body, &mut |s| {
        if s.lineage.is_none() {
            next += 1;
            s.lineage = Some(LineageId(next));
        }
    });
    next
}

/// Lineage ids in pre-order.
pub fn lineage_ids(body: &[Stmt]) -> Vec<LineageId> {
    let mut out = Vec::new();
    walk_stmts(body, &mut |s| {
        if let Some(id) = s.lineage {
            out.push(id);
        }
    });
    out
}

/// Largest id in use, 0 when none.
pub fn max_lineage(body: &[Stmt]) -> u32 {
    lineage_ids(body).iter().map(|l| l.0).max().unwrap_or(0)
}

/// Single-line rendering of a statement's header with identifiers renamed to
/// positional placeholders, so that consistent renaming does not change the
/// fingerprint. Nested blocks are not part of the fingerprint.
pub fn header_fingerprint(stmt: &Stmt) -> String {
    let mut header = stmt.clone();
    for b in header.blocks_mut() {
        b.clear();
    }
    let mut names: BTreeMap<String, usize> = BTreeMap::new();
    visit_idents_mut(std::slice::from_mut(&mut header), &mut |id| {
        let n = names.len();
        let k = *names.entry(id.name.clone()).or_insert(n);
        id.name = format!("v{k}");
    });
    emit_stmts(std::slice::from_ref(&header))
        .lines()
        .next()
        .unwrap_or("")
        .trim()
        .to_string()
}

/// Header fingerprints keyed by lineage id.
pub fn fingerprints(body: &[Stmt]) -> BTreeMap<LineageId, String> {
    let mut out = BTreeMap::new();
    walk_stmts(body, &mut |s| {
        if let Some(id) = s.lineage {
            out.insert(id, header_fingerprint(s));
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::super::parse_module;
    use super::*;

    #[test]
    fn ids_are_preorder_and_missing_only() {
        let mut m = parse_module("def f(x):\n    if x:\n        return 1\n    return 2\ny = 3\n").unwrap();
        let next = assign_missing(&mut m.body, 0);
        assert_eq!(next, 5);
        let ids: Vec<String> = lineage_ids(&m.body).iter().map(|l| l.to_string()).collect();
        assert_eq!(ids, ["s1", "s2", "s3", "s4", "s5"]);
        m.body.push(Stmt::new(StmtKind::Pass));
        assert_eq!(assign_missing(&mut m.body, next), 6);
    }

    #[test]
    fn fingerprints_ignore_consistent_renames() {
        let a = parse_module("total = total + x * 2\n").unwrap();
        let b = parse_module("total_sum = total_sum + x_value * 2\n").unwrap();
        let c = parse_module("total = total - x * 2\n").unwrap();
        assert_eq!(header_fingerprint(&a.body[0]), header_fingerprint(&b.body[0]));
        assert_ne!(header_fingerprint(&a.body[0]), header_fingerprint(&c.body[0]));
    }

    #[test]
    fn compound_fingerprint_uses_header_only() {
        let a = parse_module("if n > 0:\n    y = 1\n").unwrap();
        let b = parse_module("if n > 0:\n    y = 2\n    z = 3\n").unwrap();
        assert_eq!(header_fingerprint(&a.body[0]), header_fingerprint(&b.body[0]));
    }
}
