//! `report`: token-set diversity between versions of each unit and
//! aggregated evolution trajectories across one or more `evolve` outputs.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::bugs::load_evolved;
use super::evolve::{ORIGINAL_DIR, SKIPPED_FILE};
use super::{to_json, write_file, CliError};
use crate::evolution::lineage::{LineageFile, LINEAGE_FILE};
use crate::python::lexer::tokenize;
use crate::unit::ProgramUnit;
use crate::SCHEMA_VERSION;

/// Pairs more similar than this are flagged as near-duplicates.
pub const SIMILARITY_FLAG: f64 = 0.8;

/// Distinct significant token texts over the unit's source files.
pub fn token_set(unit: &ProgramUnit) -> BTreeSet<String> {
    unit.source_texts()
        .values()
        .flat_map(|text| tokenize(text).unwrap_or_default())
        .filter(|t| t.is_significant())
        .map(|t| t.text)
        .collect()
}

/// |a ∩ b| / |a ∪ b|, with two empty sets counted as identical.
pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSimilarity {
    pub a: String,
    pub b: String,
    pub jaccard: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrajectory {
    pub run: String,
    pub seed: u64,
    pub iterations: u32,
    pub termination_reason: String,
    pub rc_before: f64,
    pub rc_after: f64,
    pub transformations: usize,
    /// Best rc after each iteration.
    pub best_rc: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitDiversity {
    pub id: String,
    pub pairs: Vec<PairSimilarity>,
    pub runs: Vec<RunTrajectory>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityReport {
    pub schema_version: u32,
    pub runs: Vec<String>,
    pub units: Vec<UnitDiversity>,
    /// Mean Jaccard over champion pairs from different runs; absent with a
    /// single run.
    pub mean_champion_jaccard: Option<f64>,
    /// Fraction of units whose champions differ between every pair of runs.
    pub distinct_fraction: Option<f64>,
    pub flagged: usize,
    /// Mean best rc per iteration over all units and runs.
    pub mean_trajectory: Vec<f64>,
}

struct Version {
    label: String,
    tokens: BTreeSet<String>,
}

fn evolved_units(run: &Path) -> Result<BTreeMap<String, PathBuf>, CliError> {
    let mut out = BTreeMap::new();
    let entries = std::fs::read_dir(run).map_err(super::io_err(run))?;
    for e in entries {
        let p = e.map_err(super::io_err(run))?.path();
        if p.join(LINEAGE_FILE).is_file() && !p.join(SKIPPED_FILE).exists() {
            let name = p.file_name().expect("named").to_string_lossy().into_owned();
            out.insert(name, p);
        }
    }
    Ok(out)
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Compares the champions of each unit across runs (and against the
/// original) and writes `diversity.json` to `out` when given.
pub fn cmd_report(runs: &[PathBuf], out: Option<&Path>) -> Result<DiversityReport, CliError> {
    if runs.is_empty() {
        return Err(CliError::Config("report needs at least one evolve output".into()));
    }
    let labels: Vec<String> = runs.iter().map(|r| r.display().to_string()).collect();
    let per_run: Vec<BTreeMap<String, PathBuf>> = runs.iter().map(|r| evolved_units(r)).collect::<Result<_, _>>()?;
    let ids: BTreeSet<&String> = per_run.iter().flat_map(|m| m.keys()).collect();
    let mut units = Vec::new();
    let mut cross = Vec::new();
    let mut distinct = Vec::new();
    let mut by_iteration: Vec<Vec<f64>> = Vec::new();
    for id in ids {
        let mut versions: Vec<Version> = Vec::new();
        let mut trajectories = Vec::new();
        for (label, m) in labels.iter().zip(&per_run) {
            let Some(dir) = m.get(id) else { continue };
            let (original, champion, lineage) = load_evolved(dir)?;
            if versions.is_empty() {
                versions.push(Version {
                    label: ORIGINAL_DIR.to_string(),
                    tokens: token_set(&original),
                });
            }
            versions.push(Version {
                label: label.clone(),
                tokens: token_set(&champion),
            });
            trajectories.push(trajectory(label, &lineage));
        }
        let mut pairs = Vec::new();
        let mut all_differ = true;
        for i in 0..versions.len() {
            for j in (i + 1)..versions.len() {
                let s = jaccard(&versions[i].tokens, &versions[j].tokens);
                if i > 0 {
                    cross.push(s);
                    all_differ &= s < 1.0;
                }
                pairs.push(PairSimilarity {
                    a: versions[i].label.clone(),
                    b: versions[j].label.clone(),
                    jaccard: s,
                    flagged: s > SIMILARITY_FLAG,
                });
            }
        }
        if versions.len() > 2 {
            distinct.push(if all_differ { 1.0 } else { 0.0 });
        }
        for t in &trajectories {
            for (k, rc) in t.best_rc.iter().enumerate() {
                if by_iteration.len() <= k {
                    by_iteration.push(Vec::new());
                }
                by_iteration[k].push(*rc);
            }
        }
        units.push(UnitDiversity {
            id: id.clone(),
            pairs,
            runs: trajectories,
        });
    }
    let report = DiversityReport {
        schema_version: SCHEMA_VERSION,
        runs: labels,
        flagged: units.iter().flat_map(|u| &u.pairs).filter(|p| p.flagged).count(),
        units,
        mean_champion_jaccard: mean(&cross),
        distinct_fraction: mean(&distinct),
        mean_trajectory: by_iteration.iter().filter_map(|v| mean(v)).collect(),
    };
    if let Some(out) = out {
        write_file(&out.join("diversity.json"), &to_json(&report))?;
    }
    Ok(report)
}

fn trajectory(label: &str, lineage: &LineageFile) -> RunTrajectory {
    RunTrajectory {
        run: label.to_string(),
        seed: lineage.seed,
        iterations: lineage.iterations,
        termination_reason: serde_json::to_value(lineage.termination_reason)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default(),
        rc_before: lineage.before.fitness.rc,
        rc_after: lineage.after.fitness.rc,
        transformations: lineage.history.len(),
        best_rc: lineage.trajectory.iter().map(|p| p.best_rc).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn jaccard_of_small_sets() {
        assert_eq!(jaccard(&set(&[]), &set(&[])), 1.0);
        assert_eq!(jaccard(&set(&["a", "b"]), &set(&["b", "c"])), 1.0 / 3.0);
        assert_eq!(jaccard(&set(&["a"]), &set(&["b"])), 0.0);
    }

    #[test]
    fn token_sets_ignore_layout_and_comments() {
        let a = ProgramUnit::from_source("u", "def f(x):\n    return x + 1\n").unwrap();
        let b = ProgramUnit::from_source("u", "def f(x):  # note\n\n    return x+1\n").unwrap();
        assert_eq!(token_set(&a), token_set(&b));
        assert!(token_set(&a).contains("return"));
    }
}
