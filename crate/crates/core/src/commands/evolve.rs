//! `evolve`: evolves every unit of a benchmark directory and writes the
//! champions, their lineage and a before/after summary.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{io_err, to_json, write_file, CliError, RunConfig};
use crate::evolution::lineage::{LineageFile, LINEAGE_FILE};
use crate::evolution::{Evolver, TerminationReason};
use crate::metrics::{measure, ReferenceProfile, READABILITY_KEYS};
use crate::naming::NamingProvider;
use crate::unit::{discover_units, Fnv, ProgramUnit, UnitError};
use crate::validation::{Gates, Linter, TestRunner};
use crate::SCHEMA_VERSION;

pub const SUMMARY_FILE: &str = "summary.json";
pub const SKIPPED_FILE: &str = "skipped.json";
pub const ORIGINAL_DIR: &str = "original";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitStatus {
    Evolved,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitSummary {
    pub id: String,
    pub status: UnitStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub rc_before: Option<f64>,
    pub rc_after: Option<f64>,
    pub delta_rc: Option<f64>,
    pub rr_before: Option<f64>,
    pub rr_after: Option<f64>,
    pub delta_rr: Option<f64>,
    pub lint_before: Option<f64>,
    pub lint_after: Option<f64>,
    pub coverage_before: Option<f64>,
    pub coverage_after: Option<f64>,
    pub transformations: usize,
    pub iterations: u32,
    pub termination_reason: Option<TerminationReason>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub evolved: usize,
    pub skipped: usize,
    pub rc_before: f64,
    pub rc_after: f64,
    pub delta_rc: f64,
    pub rr_before: f64,
    pub rr_after: f64,
    pub delta_rr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveSummary {
    pub schema_version: u32,
    pub seed: u64,
    pub profile_corpus: String,
    pub units: Vec<UnitSummary>,
    pub corpus: CorpusSummary,
}

/// Relative change `(after - before) / before`; zero when `before` is zero.
pub fn relative_delta(before: f64, after: f64) -> f64 {
    if before == 0.0 {
        0.0
    } else {
        (after - before) / before
    }
}

/// Seed of one unit, independent of processing order.
pub fn unit_seed(seed: u64, id: &str) -> u64 {
    seed ^ Fnv::hash(id.as_bytes())
}

fn copy_dir(from: &Path, to: &Path) -> Result<(), CliError> {
    fs::create_dir_all(to).map_err(io_err(to))?;
    let mut entries: Vec<PathBuf> = fs::read_dir(from)
        .map_err(io_err(from))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .map_err(io_err(from))?;
    entries.sort();
    for p in entries {
        let name = p.file_name().expect("entry has a name");
        if name == "__pycache__" || name == ".pytest_cache" {
            continue;
        }
        let target = to.join(name);
        if p.is_dir() {
            copy_dir(&p, &target)?;
        } else {
            fs::copy(&p, &target).map_err(io_err(&p))?;
        }
    }
    Ok(())
}

fn skipped(id: &str, reason: String) -> UnitSummary {
    UnitSummary {
        id: id.to_string(),
        status: UnitStatus::Skipped,
        reason: Some(reason),
        rc_before: None,
        rc_after: None,
        delta_rc: None,
        rr_before: None,
        rr_after: None,
        delta_rr: None,
        lint_before: None,
        lint_after: None,
        coverage_before: None,
        coverage_after: None,
        transformations: 0,
        iterations: 0,
        termination_reason: None,
    }
}

struct Shared<'a> {
    config: &'a RunConfig,
    profile: &'a ReferenceProfile,
    runner: Arc<dyn TestRunner>,
    namer: Option<Box<dyn NamingProvider>>,
    out: &'a Path,
}

fn write_skipped(src: &Path, dest: &Path, summary: &UnitSummary) -> Result<(), CliError> {
    copy_dir(src, dest)?;
    let marker = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "unit_id": summary.id,
        "reason": summary.reason,
    });
    write_file(&dest.join(SKIPPED_FILE), &to_json(&marker))
}

fn evolve_unit(shared: &Shared, src: &Path, loaded: Result<ProgramUnit, UnitError>) -> Result<UnitSummary, CliError> {
    let fallback_id = src.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let unit = match loaded {
        Ok(u) => u,
        Err(e) => {
            let s = skipped(&fallback_id, e.to_string());
            write_skipped(src, &shared.out.join(&fallback_id), &s)?;
            return Ok(s);
        }
    };
    let id = unit.manifest.id.clone();
    let dest = shared.out.join(&id);
    let fitness = measure(&unit, shared.profile).fitness;
    if fitness.low_readability() {
        // every offspring would inherit the exhausted ratio and be discarded
        let keys: Vec<&str> = READABILITY_KEYS
            .iter()
            .zip(&fitness.rr_i)
            .filter(|(_, r)| **r <= 0.0)
            .map(|(k, _)| *k)
            .collect();
        let s = skipped(&id, format!("original already at readability threshold: {}", keys.join(", ")));
        log::warn!("{id}: skipped: {}", s.reason.as_deref().unwrap_or_default());
        write_skipped(src, &dest, &s)?;
        return Ok(s);
    }
    let gates = match Gates::establish(
        &unit,
        fitness,
        shared.config.gates.clone(),
        Linter::new(shared.config.linter.clone()),
        shared.runner.clone(),
        &shared.config.sandbox,
    ) {
        Ok(g) => g,
        Err(e) => {
            log::warn!("{id}: skipped: {e}");
            let s = skipped(&id, e.to_string());
            write_skipped(src, &dest, &s)?;
            return Ok(s);
        }
    };
    let seed = unit_seed(shared.config.seed, &id);
    let evolver = Evolver {
        config: &shared.config.evolution,
        profile: shared.profile,
        gates: &gates,
        namer: shared.namer.as_deref(),
        seed,
    };
    let result = evolver.evolve_program(&unit);
    let io = |e: UnitError| CliError::Unit(e);
    result.champion.program.write_to(&dest).map_err(io)?;
    unit.write_to(&dest.join(ORIGINAL_DIR)).map_err(io)?;
    let lineage = LineageFile::from_result(&result, seed);
    write_file(&dest.join(LINEAGE_FILE), &lineage.to_json())?;
    let (b, a) = (&lineage.before, &lineage.after);
    log::info!(
        "{id}: rc {:.3} -> {:.3} after {} iterations ({:?})",
        b.fitness.rc,
        a.fitness.rc,
        result.iterations,
        result.termination_reason
    );
    Ok(UnitSummary {
        id,
        status: UnitStatus::Evolved,
        reason: None,
        rc_before: Some(b.fitness.rc),
        rc_after: Some(a.fitness.rc),
        delta_rc: Some(relative_delta(b.fitness.rc, a.fitness.rc)),
        rr_before: Some(b.fitness.rr),
        rr_after: Some(a.fitness.rr),
        delta_rr: Some(relative_delta(b.fitness.rr, a.fitness.rr)),
        lint_before: b.lint_score,
        lint_after: a.lint_score,
        coverage_before: b.line_coverage_pct,
        coverage_after: a.line_coverage_pct,
        transformations: lineage.history.len(),
        iterations: result.iterations,
        termination_reason: Some(result.termination_reason),
    })
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

pub fn corpus_summary(units: &[UnitSummary]) -> CorpusSummary {
    let evolved: Vec<&UnitSummary> = units.iter().filter(|u| u.status == UnitStatus::Evolved).collect();
    let pick = |f: fn(&UnitSummary) -> Option<f64>| mean(&evolved.iter().filter_map(|u| f(u)).collect::<Vec<_>>());
    let (rc_before, rc_after) = (pick(|u| u.rc_before), pick(|u| u.rc_after));
    let (rr_before, rr_after) = (pick(|u| u.rr_before), pick(|u| u.rr_after));
    CorpusSummary {
        evolved: evolved.len(),
        skipped: units.len() - evolved.len(),
        rc_before,
        rc_after,
        delta_rc: relative_delta(rc_before, rc_after),
        rr_before,
        rr_after,
        delta_rr: relative_delta(rr_before, rr_after),
    }
}

/// Evolves every unit under `dir` into `out`. Invalid manifests abort before
/// any evolution; units whose sources do not parse or whose original tests
/// fail are copied unmodified with a `skipped.json` marker.
pub fn cmd_evolve(dir: &Path, out: &Path, config: &RunConfig) -> Result<EvolveSummary, CliError> {
    config.validate()?;
    let profile = config.reference_profile()?;
    let mut loaded = Vec::new();
    for path in discover_units(dir)? {
        match ProgramUnit::load(&path) {
            Err(e @ UnitError::Manifest { .. }) => return Err(CliError::Unit(e)),
            other => loaded.push((path, other)),
        }
    }
    let runner = config.sandbox.runner().map_err(|e| CliError::Config(e.to_string()))?;
    fs::create_dir_all(out).map_err(io_err(out))?;
    let shared = Shared {
        config,
        profile: &profile,
        runner,
        namer: config.naming.provider(),
        out,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let results: Vec<Result<UnitSummary, CliError>> = pool.install(|| {
        loaded
            .into_par_iter()
            .map(|(path, unit)| evolve_unit(&shared, &path, unit))
            .collect()
    });
    let units = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let summary = EvolveSummary {
        schema_version: SCHEMA_VERSION,
        seed: config.seed,
        profile_corpus: profile.provenance.corpus.clone(),
        corpus: corpus_summary(&units),
        units,
    };
    write_file(&out.join(SUMMARY_FILE), &to_json(&summary))?;
    write_summary_csv(&out.join("summary.csv"), &summary)?;
    Ok(summary)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

fn write_summary_csv(path: &Path, s: &EvolveSummary) -> Result<(), CliError> {
    let err = |e: csv::Error| CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record([
        "id", "status", "rc_before", "rc_after", "delta_rc", "rr_before", "rr_after", "delta_rr", "lint_before",
        "lint_after", "coverage_before", "coverage_after", "transformations",
    ])
    .map_err(err)?;
    for u in &s.units {
        w.write_record([
            u.id.clone(),
            format!("{:?}", u.status).to_lowercase(),
            fmt_opt(u.rc_before),
            fmt_opt(u.rc_after),
            fmt_opt(u.delta_rc),
            fmt_opt(u.rr_before),
            fmt_opt(u.rr_after),
            fmt_opt(u.delta_rr),
            fmt_opt(u.lint_before),
            fmt_opt(u.lint_after),
            fmt_opt(u.coverage_before),
            fmt_opt(u.coverage_after),
            u.transformations.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(io_err(path))
}

/// Human-readable before/after table.
pub fn format_table(s: &EvolveSummary) -> String {
    let mut lines = vec![format!(
        "{:<28} {:>7} {:>7} {:>8} {:>7} {:>7} {:>8}  {}",
        "unit", "rc bef", "rc aft", "Δrc", "rr bef", "rr aft", "Δrr", "status"
    )];
    let pct = |v: Option<f64>| v.map(|x| format!("{:+.1}%", 100.0 * x)).unwrap_or_default();
    let num = |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_default();
    for u in &s.units {
        let status = match (&u.status, &u.reason) {
            (UnitStatus::Skipped, Some(r)) => format!("skipped: {r}"),
            (st, _) => format!("{st:?}").to_lowercase(),
        };
        lines.push(format!(
            "{:<28} {:>7} {:>7} {:>8} {:>7} {:>7} {:>8}  {}",
            u.id,
            num(u.rc_before),
            num(u.rc_after),
            pct(u.delta_rc),
            num(u.rr_before),
            num(u.rr_after),
            pct(u.delta_rr),
            status
        ));
    }
    let c = &s.corpus;
    lines.push(format!(
        "{:<28} {:>7.3} {:>7.3} {:>8} {:>7.3} {:>7.3} {:>8}  {} evolved, {} skipped",
        "corpus mean",
        c.rc_before,
        c.rc_after,
        pct(Some(c.delta_rc)),
        c.rr_before,
        c.rr_after,
        pct(Some(c.delta_rr)),
        c.evolved,
        c.skipped
    ));
    lines.join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_convention() {
        assert!((relative_delta(0.2, 0.5) - 1.5).abs() < 1e-12);
        assert_eq!(relative_delta(0.0, 0.5), 0.0);
        assert!((relative_delta(0.8, 0.7) + 0.125).abs() < 1e-12);
    }

    #[test]
    fn unit_seeds_depend_on_id() {
        assert_ne!(unit_seed(7, "a"), unit_seed(7, "b"));
        assert_eq!(unit_seed(7, "a"), unit_seed(7, "a"));
    }
}
