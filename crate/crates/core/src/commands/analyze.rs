//! `analyze`: per-unit metrics and corpus distribution summaries.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{io_err, to_json, write_file, CliError};
use crate::metrics::{measure, ComplexityVector, ReadabilityVector, ReferenceProfile, COMPLEXITY_KEYS, READABILITY_KEYS};
use crate::unit::{discover_units, ProgramUnit};
use crate::SCHEMA_VERSION;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitMetrics {
    pub id: String,
    pub complexity: ComplexityVector,
    pub readability: ReadabilityVector,
    pub rc: f64,
    pub rr: f64,
    pub rc_i: Vec<f64>,
    pub rr_i: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

/// Quartiles with linear interpolation between order statistics.
pub fn quartiles(values: &[f64]) -> Option<Quartiles> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let at = |q: f64| {
        let pos = q * (v.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
    };
    Some(Quartiles {
        min: v[0],
        q1: at(0.25),
        median: at(0.5),
        q3: at(0.75),
        max: v[v.len() - 1],
        mean: v.iter().sum::<f64>() / v.len() as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub profile_corpus: String,
    pub units: Vec<UnitMetrics>,
    pub errors: BTreeMap<String, String>,
    pub distribution: BTreeMap<String, Quartiles>,
}

pub fn analyze_units(units: &[ProgramUnit], profile: &ReferenceProfile) -> Vec<UnitMetrics> {
    units
        .iter()
        .map(|u| {
            let m = measure(u, profile);
            UnitMetrics {
                id: u.manifest.id.clone(),
                complexity: m.complexity,
                readability: m.readability,
                rc: m.fitness.rc,
                rr: m.fitness.rr,
                rc_i: m.fitness.rc_i,
                rr_i: m.fitness.rr_i,
            }
        })
        .collect()
}

fn distribution(rows: &[UnitMetrics]) -> BTreeMap<String, Quartiles> {
    let mut columns: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in rows {
        for (k, v) in COMPLEXITY_KEYS.iter().zip(r.complexity.values()) {
            columns.entry(k.to_string()).or_default().push(v);
        }
        for (k, v) in READABILITY_KEYS.iter().zip(r.readability.values()) {
            columns.entry(k.to_string()).or_default().push(v);
        }
        columns.entry("rc".into()).or_default().push(r.rc);
        columns.entry("rr".into()).or_default().push(r.rr);
    }
    columns
        .into_iter()
        .filter_map(|(k, v)| quartiles(&v).map(|q| (k, q)))
        .collect()
}

/// Writes `analysis.json` and `analysis.csv` (one row per unit) to `out`.
pub fn cmd_analyze(dir: &Path, profile: &ReferenceProfile, out: &Path) -> Result<AnalysisReport, CliError> {
    let mut units = Vec::new();
    let mut errors = BTreeMap::new();
    for path in discover_units(dir)? {
        match ProgramUnit::load(&path) {
            Ok(u) => units.push(u),
            Err(e) => {
                let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                errors.insert(name, e.to_string());
            }
        }
    }
    let rows = analyze_units(&units, profile);
    let report = AnalysisReport {
        schema_version: SCHEMA_VERSION,
        profile_corpus: profile.provenance.corpus.clone(),
        distribution: distribution(&rows),
        units: rows,
        errors,
    };
    write_file(&out.join("analysis.json"), &to_json(&report))?;
    let csv_path = out.join("analysis.csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| CliError::Io {
        path: csv_path.clone(),
        message: e.to_string(),
    })?;
    let mut header = vec!["id".to_string()];
    header.extend(COMPLEXITY_KEYS.iter().chain(READABILITY_KEYS.iter()).map(|k| k.to_string()));
    header.extend(["rc".to_string(), "rr".to_string()]);
    let csv_err = |e: csv::Error| CliError::Io {
        path: csv_path.clone(),
        message: e.to_string(),
    };
    w.write_record(&header).map_err(csv_err)?;
    for r in &report.units {
        let mut rec = vec![r.id.clone()];
        rec.extend(r.complexity.values().iter().chain(r.readability.values().iter()).map(|v| format!("{v}")));
        rec.extend([format!("{:.6}", r.rc), format!("{:.6}", r.rr)]);
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(&csv_path))?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartiles_interpolate() {
        let q = quartiles(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!((q.min, q.q1, q.median, q.q3, q.max), (1.0, 1.75, 2.5, 3.25, 4.0));
        assert_eq!(q.mean, 2.5);
        assert!(quartiles(&[]).is_none());
    }

    #[test]
    fn single_unit_gives_one_row() {
        let dir = tempfile::tempdir().unwrap();
        let u = ProgramUnit::from_source("solo", "def f(x):\n    return [y for y in x if y]\n").unwrap();
        u.write_to(&dir.path().join("solo")).unwrap();
        let out = dir.path().join("report");
        let r = cmd_analyze(dir.path(), &ReferenceProfile::shipped(), &out).unwrap();
        assert_eq!(r.units.len(), 1);
        assert_eq!(r.units[0].complexity.c6, 0);
        let csv = std::fs::read_to_string(out.join("analysis.csv")).unwrap();
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.starts_with("id,C1,"));
    }
}
