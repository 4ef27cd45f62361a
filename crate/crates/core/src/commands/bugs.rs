//! `inject-bugs`: higher-order mutant pairs for an evolved unit.
//!
//! The champion in `<unit>` and its `original/` copy are reloaded, statement
//! lineage is restored from `lineage.json`, and identical bug edits are
//! applied to statements both versions share. Each pair is written under
//! `mutants/order<k>/<i>/{original,transformed}` next to a `report.json`.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::evolve::ORIGINAL_DIR;
use super::{io_err, to_json, write_file, CliError};
use crate::evolution::iteration_seed;
use crate::evolution::lineage::{apply_statement_ids, LineageFile, LINEAGE_FILE};
use crate::operators::{inject_bugs, MutationRecord, OperatorError};
use crate::unit::ProgramUnit;
use crate::validation::{SandboxConfig, TestRunner};
use crate::SCHEMA_VERSION;

pub const MUTANTS_DIR: &str = "mutants";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutantEntry {
    pub index: usize,
    pub record: MutationRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BugReport {
    pub schema_version: u32,
    pub unit_id: String,
    pub order: usize,
    pub requested: usize,
    pub seed: u64,
    pub mutants: Vec<MutantEntry>,
    /// Why fewer than `requested` pairs were produced, e.g. insufficient
    /// shared sites.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Loads an evolved unit directory as (original, champion, lineage).
pub fn load_evolved(unit_dir: &Path) -> Result<(ProgramUnit, ProgramUnit, LineageFile), CliError> {
    let path = unit_dir.join(LINEAGE_FILE);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let lineage = LineageFile::from_json(&text).map_err(|m| CliError::Io {
        path: path.clone(),
        message: m,
    })?;
    let mut champion = ProgramUnit::load(unit_dir)?;
    let mut original = ProgramUnit::load(&unit_dir.join(ORIGINAL_DIR))?;
    let bad = |m: String| CliError::Io {
        path: path.clone(),
        message: m,
    };
    apply_statement_ids(&mut champion, &lineage.champion_statement_ids).map_err(bad)?;
    apply_statement_ids(&mut original, &lineage.original_statement_ids).map_err(bad)?;
    Ok((original, champion, lineage))
}

/// Timeout for mutant runs: mutants often loop, so the bound follows the
/// original's duration rather than the manifest limit.
fn kill_timeout(runner: &dyn TestRunner, unit: &ProgramUnit) -> Result<Duration, CliError> {
    let limit = Duration::from_secs(unit.manifest.timeout_s.max(1));
    let report = runner
        .run(unit, limit)
        .map_err(|e| CliError::Config(format!("original tests: {e}")))?;
    if !report.all_passed() {
        return Err(CliError::Config(format!("original tests of {} fail", unit.manifest.id)));
    }
    let t = Duration::from_secs(2).max(Duration::from_millis(report.duration_ms) * 10);
    Ok(t.min(limit))
}

pub fn cmd_inject_bugs(
    unit_dir: &Path,
    order: usize,
    count: usize,
    seed: u64,
    sandbox: &SandboxConfig,
) -> Result<BugReport, CliError> {
    if !(1..=3).contains(&order) {
        return Err(CliError::Config(format!("order must be 1, 2 or 3, got {order}")));
    }
    let (original, champion, lineage) = load_evolved(unit_dir)?;
    let runner = sandbox.runner().map_err(|e| CliError::Config(e.to_string()))?;
    let timeout = kill_timeout(runner.as_ref(), &original)?;
    let killed = |u: &ProgramUnit| {
        runner
            .run(u, timeout)
            .map(|r| !r.all_passed())
            .map_err(|e| e.to_string())
    };
    let mut report = BugReport {
        schema_version: SCHEMA_VERSION,
        unit_id: lineage.unit_id.clone(),
        order,
        requested: count,
        seed,
        mutants: Vec::new(),
        error: None,
    };
    let root = unit_dir.join(MUTANTS_DIR).join(format!("order{order}"));
    if root.exists() {
        fs::remove_dir_all(&root).map_err(io_err(&root))?;
    }
    let mut seen = BTreeSet::new();
    // distinct edit sets are drawn from derived seeds; a few extra draws
    // absorb collisions on units with few sites
    for draw in 0..(count as u32 * 4) {
        if report.mutants.len() == count {
            break;
        }
        let pair_seed = iteration_seed(seed, draw);
        match inject_bugs(&original, &champion, &lineage.history, order, pair_seed, &killed) {
            Ok(pair) => {
                let key: Vec<_> = pair.record.edits.iter().map(|e| (e.lineage, e.operator, e.site)).collect();
                if !seen.insert(key) {
                    continue;
                }
                let dir = root.join(report.mutants.len().to_string());
                pair.original.write_to(&dir.join("original"))?;
                pair.transformed.write_to(&dir.join("transformed"))?;
                report.mutants.push(MutantEntry {
                    index: report.mutants.len(),
                    record: pair.record,
                });
            }
            Err(e @ OperatorError::InsufficientSites { .. }) => {
                report.error = Some(e.to_string());
                break;
            }
            Err(e) => report.error = Some(e.to_string()),
        }
    }
    if report.mutants.len() == count {
        report.error = None;
    } else if report.error.is_none() {
        report.error = Some(format!("only {} distinct mutants found", report.mutants.len()));
    }
    write_file(&root.join("report.json"), &to_json(&report))?;
    Ok(report)
}
