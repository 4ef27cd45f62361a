//! Bug operators B1–B5 and paired mutant construction.
//!
//! Bugs are injected only into statements the original and the transformed
//! program still share, so both variants receive the same edits. Sites are
//! enumerated per statement: statement-level sites first, then expression
//! sites in pre-order over the statement header.

use std::collections::BTreeSet;

use rand::seq::{index::sample, SliceRandom};
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use super::structure::header_text;
use super::util::locate;
use super::{check_reparses, shared_statements, OpRng, OperatorError, OperatorId, TransformationRecord};
use crate::python::ast::*;
use crate::unit::ProgramUnit;

/// Resampling budget for finding a mutant the tests detect.
pub const KILL_ATTEMPTS: usize = 25;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BugEdit {
    pub operator: OperatorId,
    pub lineage: LineageId,
    /// Index of the site among the operator's sites in the statement.
    pub site: usize,
    pub before: String,
    pub after: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationRecord {
    pub order: usize,
    pub seed: u64,
    /// Candidates drawn until one was detected by the tests.
    pub attempts: usize,
    pub edits: Vec<BugEdit>,
}

#[derive(Debug, Clone)]
pub struct MutantPair {
    pub original: ProgramUnit,
    pub transformed: ProgramUnit,
    pub record: MutationRecord,
}

fn swap_arith(op: BinOp) -> Option<BinOp> {
    Some(match op {
        BinOp::Add => BinOp::Sub,
        BinOp::Sub => BinOp::Add,
        BinOp::Mult => BinOp::FloorDiv,
        BinOp::FloorDiv => BinOp::Mult,
        BinOp::Div => BinOp::Mult,
        BinOp::Mod => BinOp::FloorDiv,
        BinOp::Pow => BinOp::Mult,
        BinOp::BitAnd => BinOp::BitOr,
        BinOp::BitOr => BinOp::BitAnd,
        BinOp::LShift => BinOp::RShift,
        BinOp::RShift => BinOp::LShift,
        BinOp::MatMult | BinOp::BitXor => return None,
    })
}

fn swap_cmp(op: CmpOp) -> CmpOp {
    match op {
        CmpOp::Lt => CmpOp::LtE,
        CmpOp::LtE => CmpOp::Lt,
        CmpOp::Gt => CmpOp::GtE,
        CmpOp::GtE => CmpOp::Gt,
        CmpOp::Eq => CmpOp::NotEq,
        CmpOp::NotEq => CmpOp::Eq,
        CmpOp::Is => CmpOp::IsNot,
        CmpOp::IsNot => CmpOp::Is,
        CmpOp::In => CmpOp::NotIn,
        CmpOp::NotIn => CmpOp::In,
    }
}

fn negate(e: &mut Expr) {
    let inner = std::mem::replace(e, Expr::NoneLit);
    *e = match inner {
        Expr::UnaryOp {
            op: UnaryOp::Not,
            operand,
        } => *operand,
        other => Expr::UnaryOp {
            op: UnaryOp::Not,
            operand: Box::new(other),
        },
    };
}

fn is_int_literal(e: &Expr) -> bool {
    match e {
        Expr::Num(n) => {
            let lower = n.to_ascii_lowercase();
            lower.starts_with("0x")
                || lower.starts_with("0o")
                || lower.starts_with("0b")
                || !lower.contains(['.', 'e', 'j'])
        }
        Expr::UnaryOp {
            op: UnaryOp::Neg,
            operand,
        } => is_int_literal(operand),
        _ => false,
    }
}

fn is_float_literal(e: &Expr) -> bool {
    match e {
        Expr::Num(n) => !is_int_literal(e) && !n.to_ascii_lowercase().contains('j'),
        Expr::UnaryOp {
            op: UnaryOp::Neg,
            operand,
        } => is_float_literal(operand),
        _ => false,
    }
}

/// Cast applied to an initializer: the value changes type.
fn retyped(value: &Expr) -> Expr {
    let cast = if is_int_literal(value) {
        "float"
    } else if is_float_literal(value) {
        "int"
    } else {
        match value {
            Expr::Str(_) => "list",
            Expr::List(_) | Expr::ListComp { .. } => "tuple",
            Expr::Tuple(_) => "list",
            _ => "str",
        }
    };
    Expr::call(Expr::name(cast), vec![value.clone()])
}

fn stmt_level_site(stmt: &Stmt, op: OperatorId) -> bool {
    match (op, &stmt.kind) {
        (OperatorId::B1, StmtKind::AugAssign { op, .. }) => swap_arith(*op).is_some(),
        (OperatorId::B4, StmtKind::If { .. } | StmtKind::While { .. }) => true,
        (OperatorId::B5, StmtKind::Assign { targets, .. }) => matches!(targets.as_slice(), [Expr::Name(_)]),
        _ => false,
    }
}

/// Number of sites an expression node offers.
fn expr_sites(e: &Expr, op: OperatorId) -> usize {
    match (op, e) {
        (OperatorId::B1, Expr::BinOp { op, .. }) => usize::from(swap_arith(*op).is_some()),
        (OperatorId::B2, Expr::Compare { ops, .. }) => ops.len(),
        (OperatorId::B3, Expr::BoolOp { .. }) => 1,
        (OperatorId::B4, Expr::Bool(_) | Expr::IfExp { .. }) => 1,
        _ => 0,
    }
}

/// Sites of one bug operator in a statement header.
pub fn bug_sites(stmt: &Stmt, op: OperatorId) -> usize {
    let mut n = usize::from(stmt_level_site(stmt, op));
    if op == OperatorId::B5 {
        return n;
    }
    for e in stmt.kind.header_exprs() {
        e.walk(&mut |x| n += expr_sites(x, op));
    }
    n
}

fn mutate_expr(e: &mut Expr, op: OperatorId, k: usize) {
    match e {
        Expr::BinOp { op: bop, .. } => *bop = swap_arith(*bop).expect("site checked"),
        Expr::Compare { ops, .. } => ops[k] = swap_cmp(ops[k]),
        Expr::BoolOp { op: bop, .. } => {
            *bop = match bop {
                BoolOp::And => BoolOp::Or,
                BoolOp::Or => BoolOp::And,
            }
        }
        Expr::Bool(b) => *b = !*b,
        Expr::IfExp { test, .. } => negate(test),
        _ => unreachable!("{op} has no site here"),
    }
}

/// Applies the `k`-th site of `op` in the statement header.
pub fn apply_bug(stmt: &mut Stmt, op: OperatorId, k: usize) -> bool {
    let mut k = k;
    if stmt_level_site(stmt, op) {
        if k == 0 {
            match &mut stmt.kind {
                StmtKind::AugAssign { op: bop, .. } => *bop = swap_arith(*bop).expect("site checked"),
                StmtKind::If { test, .. } | StmtKind::While { test, .. } => negate(test),
                StmtKind::Assign { value, .. } => *value = retyped(value),
                _ => unreachable!(),
            }
            return true;
        }
        k -= 1;
    }
    if op == OperatorId::B5 {
        return false;
    }
    let mut done = false;
    for e in stmt.kind.header_exprs_mut() {
        e.walk_mut(&mut |x| {
            if done {
                return;
            }
            let n = expr_sites(x, op);
            if k < n {
                mutate_expr(x, op, k);
                done = true;
            } else {
                k -= n;
            }
        });
    }
    done
}

fn find_in_unit(unit: &ProgramUnit, id: LineageId) -> Option<&Stmt> {
    unit.files().find_map(|(_, f)| find_stmt(&f.module.body, id))
}

fn mutate_unit(unit: &ProgramUnit, edits: &[(OperatorId, LineageId, usize)]) -> Result<ProgramUnit, OperatorError> {
    let mut out = unit.clone();
    for &(op, id, k) in edits {
        let file = out
            .files()
            .find(|(_, f)| find_stmt(&f.module.body, id).is_some())
            .map(|(p, _)| p.clone())
            .ok_or_else(|| OperatorError::LineageMismatch(format!("statement {id} missing")))?;
        let module = out.module_mut(&file).expect("file exists");
        let (block, i) = locate(&mut module.body, id).expect("statement exists");
        if !apply_bug(&mut block[i], op, k) {
            return Err(OperatorError::StillbornMutant(format!("no site {k} for {op} at {id}")));
        }
    }
    check_reparses(&out).map_err(OperatorError::StillbornMutant)?;
    Ok(out)
}

/// Shared statements with at least one bug site, with their operators.
pub fn bug_candidates(
    original: &ProgramUnit,
    shared: &BTreeSet<LineageId>,
) -> Vec<(LineageId, Vec<(OperatorId, usize)>)> {
    shared
        .iter()
        .filter_map(|id| {
            let stmt = find_in_unit(original, *id)?;
            let ops: Vec<(OperatorId, usize)> = OperatorId::bugs()
                .map(|op| (op, bug_sites(stmt, op)))
                .filter(|(_, n)| *n > 0)
                .collect();
            (!ops.is_empty()).then_some((*id, ops))
        })
        .collect()
}

/// Injects `order` bugs (1–3) into distinct shared statements of both
/// variants. `killed` runs the tests on a mutant and reports whether any
/// failed; candidates are redrawn until both mutants are detected.
pub fn inject_bugs<F>(
    original: &ProgramUnit,
    transformed: &ProgramUnit,
    history: &[TransformationRecord],
    order: usize,
    seed: u64,
    mut killed: F,
) -> Result<MutantPair, OperatorError>
where
    F: FnMut(&ProgramUnit) -> Result<bool, String>,
{
    if !(1..=3).contains(&order) {
        return Err(OperatorError::InsufficientSites {
            needed: order,
            available: 3,
        });
    }
    let shared = shared_statements(original, transformed, history)?;
    let candidates = bug_candidates(original, &shared);
    if candidates.len() < order {
        return Err(OperatorError::InsufficientSites {
            needed: order,
            available: candidates.len(),
        });
    }
    let mut rng = OpRng::seed_from_u64(seed);
    for attempt in 1..=KILL_ATTEMPTS {
        let mut chosen: Vec<usize> = sample(&mut rng, candidates.len(), order).into_vec();
        chosen.sort_unstable();
        let edits: Vec<(OperatorId, LineageId, usize)> = chosen
            .iter()
            .map(|&c| {
                let (id, ops) = &candidates[c];
                let (op, n) = *ops.choose(&mut rng).expect("non-empty");
                (op, *id, rng.gen_range(0..n))
            })
            .collect();
        let a = mutate_unit(original, &edits)?;
        let b = mutate_unit(transformed, &edits)?;
        if killed(&a).map_err(OperatorError::Runner)? && killed(&b).map_err(OperatorError::Runner)? {
            let record_edits = edits
                .iter()
                .map(|&(op, id, k)| BugEdit {
                    operator: op,
                    lineage: id,
                    site: k,
                    before: header_text(find_in_unit(original, id).expect("exists")),
                    after: header_text(find_in_unit(&a, id).expect("exists")),
                })
                .collect();
            return Ok(MutantPair {
                original: a,
                transformed: b,
                record: MutationRecord {
                    order,
                    seed,
                    attempts: attempt,
                    edits: record_edits,
                },
            });
        }
    }
    Err(OperatorError::SurvivingMutant {
        attempts: KILL_ATTEMPTS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::python::emit::emit_stmts;
    use crate::python::parse_module;

    fn stmt(src: &str) -> Stmt {
        parse_module(src).unwrap().body.remove(0)
    }

    fn mutated(src: &str, op: OperatorId, k: usize) -> String {
        let mut s = stmt(src);
        assert!(apply_bug(&mut s, op, k), "{op} site {k} in {src}");
        emit_stmts(&[s]).trim_end().to_string()
    }

    #[test]
    fn arithmetic_sites() {
        assert_eq!(bug_sites(&stmt("x += a * b ^ c\n"), OperatorId::B1), 2);
        assert_eq!(mutated("x += a * b\n", OperatorId::B1, 0), "x -= a * b");
        assert_eq!(mutated("x += a * b\n", OperatorId::B1, 1), "x += a // b");
        assert_eq!(mutated("y = a ** 2 % m\n", OperatorId::B1, 0), "y = a ** 2 // m");
        assert_eq!(mutated("y = a ** 2 % m\n", OperatorId::B1, 1), "y = a * 2 % m");
    }

    #[test]
    fn comparison_and_logic() {
        assert_eq!(mutated("ok = 0 < x <= 9\n", OperatorId::B2, 1), "ok = 0 < x < 9");
        assert_eq!(mutated("ok = x not in s\n", OperatorId::B2, 0), "ok = x in s");
        assert_eq!(mutated("ok = a and b or c\n", OperatorId::B3, 0), "ok = (a and b) and c");
        assert_eq!(mutated("ok = a and b or c\n", OperatorId::B3, 1), "ok = (a or b) or c");
    }

    #[test]
    fn boolean_reversal() {
        assert_eq!(bug_sites(&stmt("if x:\n    pass\n"), OperatorId::B4), 1);
        assert_eq!(mutated("if not x:\n    pass\n", OperatorId::B4, 0), "if x:\n    pass");
        assert_eq!(mutated("done = False\n", OperatorId::B4, 0), "done = True");
        assert_eq!(mutated("v = a if c else b\n", OperatorId::B4, 0), "v = a if not c else b");
    }

    #[test]
    fn type_changes() {
        assert_eq!(mutated("n = 0\n", OperatorId::B5, 0), "n = float(0)");
        assert_eq!(mutated("n = 1.5\n", OperatorId::B5, 0), "n = int(1.5)");
        assert_eq!(mutated("s = 'ab'\n", OperatorId::B5, 0), "s = list('ab')");
        assert_eq!(mutated("s = [1]\n", OperatorId::B5, 0), "s = tuple([1])");
        assert_eq!(mutated("s = f(x)\n", OperatorId::B5, 0), "s = str(f(x))");
        assert_eq!(bug_sites(&stmt("a, b = 1, 2\n"), OperatorId::B5), 0);
    }

    #[test]
    fn paired_injection_hits_the_same_statements() {
        let src = "def f(x):\n    y = x + 1\n    if y > 2:\n        return y * 2\n    return 0\n";
        let original = ProgramUnit::from_source("u", src).unwrap();
        let locs = crate::operators::operator_locations(&original, OperatorId::S8);
        let (transformed, rec) = crate::operators::apply_operator(&original, OperatorId::S8, &locs[0], 1).unwrap();
        for order in 1..=3 {
            let pair = inject_bugs(&original, &transformed, &[rec.clone()], order, 9, |_| Ok(true)).unwrap();
            assert_eq!(pair.record.edits.len(), order);
            let ids: BTreeSet<_> = pair.record.edits.iter().map(|e| e.lineage).collect();
            assert_eq!(ids.len(), order);
            for e in &pair.record.edits {
                let a = find_in_unit(&pair.original, e.lineage).unwrap();
                let b = find_in_unit(&pair.transformed, e.lineage).unwrap();
                assert_eq!(a, b);
                assert_ne!(e.before, e.after);
            }
        }
    }

    #[test]
    fn surviving_and_insufficient() {
        let u = ProgramUnit::from_source("u", "def f(x):\n    return x + 1\n").unwrap();
        assert!(matches!(
            inject_bugs(&u, &u, &[], 2, 0, |_| Ok(true)),
            Err(OperatorError::InsufficientSites { needed: 2, available: 1 })
        ));
        let mut calls = 0;
        let r = inject_bugs(&u, &u, &[], 1, 0, |_| {
            calls += 1;
            Ok(false)
        });
        assert_eq!(r.unwrap_err(), OperatorError::SurvivingMutant { attempts: KILL_ATTEMPTS });
        assert_eq!(calls, KILL_ATTEMPTS);
    }
}
