//! The per-unit `lineage.json` record of an evolution run.
//!
//! Lineage ids live only in memory, so the file stores them per source file
//! in statement pre-order. Reloading a written unit and re-applying the ids
//! restores the statement correspondence that bug injection relies on.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{EvolutionResult, Individual, TerminationReason, TrajectoryPoint};
use crate::metrics::FitnessScore;
use crate::operators::TransformationRecord;
use crate::python::ast::{walk_stmts, walk_stmts_mut, LineageId};
use crate::unit::ProgramUnit;
use crate::SCHEMA_VERSION;

pub const LINEAGE_FILE: &str = "lineage.json";

/// Lineage id of every statement per source file, in pre-order.
pub type StatementIds = BTreeMap<String, Vec<Option<LineageId>>>;

pub fn statement_ids(unit: &ProgramUnit) -> StatementIds {
    unit.files()
        .map(|(path, f)| {
            let mut ids = Vec::new();
            walk_stmts(&f.module.body, &mut |s| ids.push(s.lineage));
            (path.clone(), ids)
        })
        .collect()
}

/// Re-applies stored ids; fails when the statement structure differs.
pub fn apply_statement_ids(unit: &mut ProgramUnit, ids: &StatementIds) -> Result<(), String> {
    let mut max = 0;
    for (path, f) in unit.sources.iter_mut() {
        let want = ids
            .get(path)
            .ok_or_else(|| format!("no statement ids for {path}"))?;
        let mut count = 0;
        walk_stmts(&f.module.body, &mut |_| count += 1);
        if count != want.len() {
            return Err(format!("{path}: {count} statements, lineage lists {}", want.len()));
        }
        let mut it = want.iter();
        walk_stmts_mut(&mut f.module.body, &mut |s| {
            s.lineage = *it.next().expect("counted");
            if let Some(id) = s.lineage {
                max = max.max(id.0);
            }
        });
    }
    unit.next_lineage = max;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub fitness: FitnessScore,
    pub lint_score: Option<f64>,
    pub line_coverage_pct: Option<f64>,
}

impl Snapshot {
    pub fn of(ind: &Individual) -> Self {
        Snapshot {
            fitness: ind.fitness.clone(),
            lint_score: ind.lint_score,
            line_coverage_pct: ind.report.as_ref().map(|r| r.line_coverage_pct),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontMember {
    pub rc: f64,
    pub rr: f64,
    pub generation: u32,
    pub transformations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineageFile {
    pub schema_version: u32,
    pub unit_id: String,
    pub seed: u64,
    pub termination_reason: TerminationReason,
    pub iterations: u32,
    pub before: Snapshot,
    pub after: Snapshot,
    pub champion_generation: u32,
    pub champion_sources: BTreeMap<String, String>,
    pub history: Vec<TransformationRecord>,
    pub trajectory: Vec<TrajectoryPoint>,
    pub pareto_front: Vec<FrontMember>,
    pub rejections: BTreeMap<String, usize>,
    pub original_statement_ids: StatementIds,
    pub champion_statement_ids: StatementIds,
}

impl LineageFile {
    pub fn from_result(result: &EvolutionResult, seed: u64) -> Self {
        let champ = &result.champion;
        LineageFile {
            schema_version: SCHEMA_VERSION,
            unit_id: champ.program.manifest.id.clone(),
            seed,
            termination_reason: result.termination_reason,
            iterations: result.iterations,
            before: Snapshot::of(&result.original),
            after: Snapshot::of(champ),
            champion_generation: champ.generation,
            champion_sources: champ.program.source_texts(),
            history: champ.history.clone(),
            trajectory: result.trajectory.clone(),
            pareto_front: result
                .pareto_front
                .iter()
                .map(|p| FrontMember {
                    rc: p.fitness.rc,
                    rr: p.fitness.rr,
                    generation: p.generation,
                    transformations: p.history.len(),
                })
                .collect(),
            rejections: result.rejections.clone(),
            original_statement_ids: statement_ids(&result.original.program),
            champion_statement_ids: statement_ids(&champ.program),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("lineage serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let file: LineageFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(format!("unsupported schema_version {}", file.schema_version));
        }
        Ok(file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{apply_operator, operator_locations, OperatorId};

    #[test]
    fn ids_survive_a_write_and_reload() {
        let u = ProgramUnit::from_source("u", "def f(x):\n    if x:\n        return 1\n    return 2\n").unwrap();
        let loc = operator_locations(&u, OperatorId::S5).remove(0);
        let (t, _) = apply_operator(&u, OperatorId::S5, &loc, 4).unwrap();
        let ids = statement_ids(&t);
        let dir = tempfile::tempdir().unwrap();
        t.write_to(dir.path()).unwrap();
        let mut back = ProgramUnit::load(dir.path()).unwrap();
        apply_statement_ids(&mut back, &ids).unwrap();
        assert_eq!(statement_ids(&back), ids);
        let max = ids.values().flatten().flatten().map(|l| l.0).max().unwrap();
        assert_eq!(back.next_lineage, max);
        let mut other = ProgramUnit::from_source("u", "x = 1\n").unwrap();
        assert!(apply_statement_ids(&mut other, &ids).is_err());
    }
}
