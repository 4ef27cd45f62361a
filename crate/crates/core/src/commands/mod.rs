//! Batch entry points behind the `evobench` binary: profiling, analysis,
//! evolution, bug injection and diversity reports over benchmark
//! directories. Every JSON document written here carries `schema_version`.

pub mod analyze;
pub mod bugs;
pub mod evolve;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evolution::EvolutionConfig;
use crate::metrics::{profile_corpus, MetricsError, ReferenceProfile};
use crate::naming::NamingConfig;
use crate::unit::{discover_units, ProgramUnit, UnitError};
use crate::validation::{GateConfig, LinterConfig, SandboxConfig};

pub use analyze::cmd_analyze;
pub use bugs::cmd_inject_bugs;
pub use evolve::cmd_evolve;
pub use report::{cmd_report, jaccard, token_set};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Unit(#[from] UnitError),
    #[error("{0}")]
    Metrics(#[from] MetricsError),
    #[error("io error on {path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl CliError {
    /// Process exit code: 2 for an empty corpus or bad configuration.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Metrics(MetricsError::EmptyCorpus) | CliError::Config(_) | CliError::Unit(UnitError::Manifest { .. }) => 2,
            _ => 1,
        }
    }
}

pub(crate) fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(path, text).map_err(io_err(path))
}

pub(crate) fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn default_seed() -> u64 {
    0
}

fn default_jobs() -> usize {
    1
}

/// Everything `evolve` needs; loadable from a JSON file and overridable
/// from the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Reference profile; the shipped profile is used when unset.
    #[serde(default)]
    pub profile: Option<PathBuf>,
    #[serde(default)]
    pub evolution: EvolutionConfig,
    #[serde(default)]
    pub naming: NamingConfig,
    #[serde(default)]
    pub sandbox: SandboxConfig,
    #[serde(default)]
    pub gates: GateConfig,
    #[serde(default)]
    pub linter: LinterConfig,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            profile: None,
            evolution: EvolutionConfig::default(),
            naming: NamingConfig::default(),
            sandbox: SandboxConfig::default(),
            gates: GateConfig::default(),
            linter: LinterConfig::default(),
            output: None,
            seed: default_seed(),
            jobs: default_jobs(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("line {}: {e}", e.line())))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.evolution.validate().map_err(CliError::Config)?;
        if self.jobs == 0 {
            return Err(CliError::Config("jobs must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.gates.readability_floor) {
            return Err(CliError::Config("readability_floor must lie in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn reference_profile(&self) -> Result<ReferenceProfile, CliError> {
        load_profile(self.profile.as_deref())
    }
}

/// Reads a profile file, or the shipped profile when `path` is `None`.
pub fn load_profile(path: Option<&Path>) -> Result<ReferenceProfile, CliError> {
    match path {
        None => Ok(ReferenceProfile::shipped()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(io_err(p))?;
            ReferenceProfile::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
        }
    }
}

/// Loads every unit under `dir`; failures are returned separately.
pub fn load_units(dir: &Path) -> Result<(Vec<ProgramUnit>, Vec<(PathBuf, UnitError)>), CliError> {
    let mut units = Vec::new();
    let mut failed = Vec::new();
    for path in discover_units(dir)? {
        match ProgramUnit::load(&path) {
            Ok(u) => units.push(u),
            Err(e) => failed.push((path, e)),
        }
    }
    Ok((units, failed))
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileOutcome {
    pub profile: ReferenceProfile,
    pub skipped: Vec<String>,
}

/// Profiles a corpus; unparsable units are skipped with a warning.
pub fn cmd_profile(dir: &Path, out: &Path, date: Option<&str>) -> Result<ProfileOutcome, CliError> {
    let (units, failed) = load_units(dir)?;
    let skipped: Vec<String> = failed
        .iter()
        .map(|(p, e)| {
            log::warn!("skipping {}: {e}", p.display());
            format!("{}: {e}", p.display())
        })
        .collect();
    let label = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string());
    let date = date.map(String::from).unwrap_or_else(crate::metrics::profile::today);
    let profile = profile_corpus(&units, &label, &date)?;
    write_file(out, &profile.to_json())?;
    Ok(ProfileOutcome { profile, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_config_defaults_and_errors() {
        let c = RunConfig::from_json("{}").unwrap();
        assert_eq!(c, RunConfig::default());
        assert!(c.validate().is_ok());
        let c = RunConfig::from_json("{\"evolution\": {\"breed_fraction\": 0.5}, \"seed\": 9}").unwrap();
        assert_eq!((c.evolution.breed_fraction, c.seed), (0.5, 9));
        let err = RunConfig::from_json("{\n  \"seed\": 1,\n  \"bogus\": 2\n}").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let bad = RunConfig::from_json("{\"evolution\": {\"breed_fraction\": 0}}").unwrap();
        assert_eq!(bad.validate().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn profile_of_an_empty_corpus_exits_2() {
        let dir = tempfile::tempdir().unwrap();
        let err = cmd_profile(dir.path(), &dir.path().join("p.json"), None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn profile_of_one_unit_is_its_metrics() {
        let dir = tempfile::tempdir().unwrap();
        let u = ProgramUnit::from_source("one", "def f(a, b):\n    if a and b:\n        return 1\n    return 2\n").unwrap();
        u.write_to(&dir.path().join("one")).unwrap();
        std::fs::create_dir_all(dir.path().join("broken")).unwrap();
        std::fs::write(dir.path().join("broken/manifest.json"), "{\"id\": \"b\", \"source_files\": [\"x.py\"], \"entry\": \"x.py\", \"test_files\": []}").unwrap();
        std::fs::write(dir.path().join("broken/x.py"), "def (:\n").unwrap();
        let out = cmd_profile(dir.path(), &dir.path().join("p.json"), Some("2024-01-01")).unwrap();
        assert_eq!(out.skipped.len(), 1);
        let cv = crate::metrics::complexity_vector(&u).values();
        for (i, v) in cv.iter().enumerate() {
            let want = if *v > 0.0 { *v } else { 1.0 };
            assert_eq!(out.profile.ct[i], want);
        }
        let back = load_profile(Some(&dir.path().join("p.json"))).unwrap();
        assert_eq!(back, out.profile);
    }
}
