//! Candidate validation: the readability clip, linter non-degradation and
//! test-execution gates, applied cheapest first, plus coverage parity.

pub mod lint;
pub mod runner;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lint::{lint_unit, LintReport, Linter, LinterConfig};
pub use runner::{HarnessRunner, ShimRunner, TestRunner};

use crate::metrics::FitnessScore;
use crate::unit::ProgramUnit;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidationError {
    #[error("sandbox crashed: {0}")]
    SandboxCrashed(String),
    #[error("original tests fail: {0}")]
    OriginalTestsFail(String),
    #[error("linter: {0}")]
    Linter(String),
    #[error("io: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Passed,
    Failed,
    Errored,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub name: String,
    pub outcome: Outcome,
    #[serde(default)]
    pub message: String,
}

/// The sandbox wire report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub passed: u32,
    pub failed: u32,
    pub errored: u32,
    pub line_coverage_pct: f64,
    pub duration_ms: u64,
    #[serde(default)]
    pub tests: Vec<TestCase>,
    #[serde(default)]
    pub timeout: bool,
}

impl TestReport {
    pub fn total(&self) -> u32 {
        self.passed + self.failed + self.errored
    }

    /// At least one test ran, none failed or errored, no timeout.
    pub fn all_passed(&self) -> bool {
        self.total() > 0 && self.failed == 0 && self.errored == 0 && !self.timeout
    }

    /// Wire-contract invariants.
    pub fn check(&self) -> Result<(), String> {
        if !(0.0..=100.0).contains(&self.line_coverage_pct) {
            return Err(format!("coverage {} out of range", self.line_coverage_pct));
        }
        if !self.tests.is_empty() {
            let count = |o| self.tests.iter().filter(|t| t.outcome == o).count() as u32;
            if (count(Outcome::Passed), count(Outcome::Failed), count(Outcome::Errored))
                != (self.passed, self.failed, self.errored)
            {
                return Err("per-test outcomes disagree with the totals".into());
            }
        }
        Ok(())
    }

    pub fn failures(&self) -> Vec<&str> {
        self.tests
            .iter()
            .filter(|t| t.outcome != Outcome::Passed)
            .map(|t| t.name.as_str())
            .collect()
    }
}

/// Percentage-point change in line coverage.
pub fn coverage_delta(before: &TestReport, after: &TestReport) -> f64 {
    after.line_coverage_pct - before.line_coverage_pct
}

fn default_true() -> bool {
    true
}

fn default_timeout_floor() -> u64 {
    60
}

fn default_timeout_factor() -> f64 {
    5.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SandboxConfig {
    /// External sandbox command; the bundled stub is used when unset.
    #[serde(default)]
    pub command: Option<String>,
    #[serde(default = "default_true")]
    pub deny_network: bool,
    /// Candidate timeout is `max(floor, factor * original duration)`.
    #[serde(default = "default_timeout_floor")]
    pub timeout_floor_s: u64,
    #[serde(default = "default_timeout_factor")]
    pub timeout_factor: f64,
}

impl Default for SandboxConfig {
    fn default() -> Self {
        SandboxConfig {
            command: None,
            deny_network: true,
            timeout_floor_s: default_timeout_floor(),
            timeout_factor: default_timeout_factor(),
        }
    }
}

impl SandboxConfig {
    pub fn runner(&self) -> Result<Arc<dyn TestRunner>, ValidationError> {
        match &self.command {
            Some(c) => ShimRunner::from_command(c, self.deny_network)
                .map(|r| Arc::new(r) as Arc<dyn TestRunner>)
                .ok_or_else(|| ValidationError::SandboxCrashed("empty sandbox command".into())),
            None => Ok(Arc::new(HarnessRunner::new(self.deny_network)?)),
        }
    }

    /// Timeout for candidates of a unit whose original run took `original`.
    pub fn candidate_timeout(&self, original: Duration) -> Duration {
        Duration::from_secs(self.timeout_floor_s).max(original.mul_f64(self.timeout_factor))
    }
}

fn default_floor() -> f64 {
    0.8
}

fn default_drift() -> Option<f64> {
    Some(10.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateConfig {
    /// Candidates must keep at least this fraction of the original's
    /// relative readability, in addition to the per-metric clip.
    #[serde(default = "default_floor")]
    pub readability_floor: f64,
    /// Largest accepted coverage change in percentage points; `None`
    /// reports the change without gating on it.
    #[serde(default = "default_drift")]
    pub max_coverage_drift: Option<f64>,
}

impl Default for GateConfig {
    fn default() -> Self {
        GateConfig {
            readability_floor: default_floor(),
            max_coverage_drift: default_drift(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rejection {
    LowReadability,
    LowLintScore,
    TestFailure,
    CoverageDrift,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateVerdict {
    pub accepted: bool,
    pub rejected_by: Option<Rejection>,
    pub details: String,
    pub lint_score: Option<f64>,
    pub report: Option<TestReport>,
}

impl GateVerdict {
    fn reject(by: Rejection, details: String, lint_score: Option<f64>, report: Option<TestReport>) -> Self {
        GateVerdict {
            accepted: false,
            rejected_by: Some(by),
            details,
            lint_score,
            report,
        }
    }
}

/// The original program's measurements every candidate is compared with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub fitness: FitnessScore,
    pub lint_score: Option<f64>,
    pub report: TestReport,
}

/// How many candidates reached each gate.
#[derive(Debug, Default)]
pub struct GateTelemetry {
    pub readability: AtomicUsize,
    pub lint: AtomicUsize,
    pub tests: AtomicUsize,
}

impl GateTelemetry {
    pub fn counts(&self) -> (usize, usize, usize) {
        (
            self.readability.load(Ordering::Relaxed),
            self.lint.load(Ordering::Relaxed),
            self.tests.load(Ordering::Relaxed),
        )
    }
}

pub struct Gates {
    pub config: GateConfig,
    pub linter: Linter,
    pub runner: Arc<dyn TestRunner>,
    pub baseline: Baseline,
    pub timeout: Duration,
    pub telemetry: GateTelemetry,
}

/// Rejects when some readability ratio is exhausted (`R_i >= RT_i`).
pub fn gate_readability(fitness: &FitnessScore) -> bool {
    !fitness.low_readability()
}

/// Rejects when the candidate scores strictly below the original; an
/// unavailable score on either side passes.
pub fn gate_lint(candidate: Option<f64>, original: Option<f64>) -> bool {
    match (candidate, original) {
        (Some(c), Some(o)) => c >= o - 1e-9,
        _ => true,
    }
}

impl Gates {
    /// Measures the original unit. Fails when its own tests do not pass.
    pub fn establish(
        unit: &ProgramUnit,
        fitness: FitnessScore,
        config: GateConfig,
        linter: Linter,
        runner: Arc<dyn TestRunner>,
        sandbox: &SandboxConfig,
    ) -> Result<Gates, ValidationError> {
        let report = runner.run(unit, Duration::from_secs(unit.manifest.timeout_s.max(1)))?;
        if !report.all_passed() {
            let what = if report.timeout {
                "timeout".to_string()
            } else if report.total() == 0 {
                "no tests found".to_string()
            } else {
                report.failures().join(", ")
            };
            return Err(ValidationError::OriginalTestsFail(what));
        }
        let lint_score = linter
            .score(unit)
            .map_err(|e| ValidationError::Linter(e.to_string()))?;
        let timeout = sandbox.candidate_timeout(Duration::from_millis(report.duration_ms));
        Ok(Gates {
            config,
            linter,
            runner,
            baseline: Baseline {
                fitness,
                lint_score,
                report,
            },
            timeout,
            telemetry: GateTelemetry::default(),
        })
    }

    /// Runs the gates in order readability, lint, tests; later gates are
    /// skipped once one rejects.
    pub fn check(&self, unit: &ProgramUnit, fitness: &FitnessScore) -> GateVerdict {
        self.telemetry.readability.fetch_add(1, Ordering::Relaxed);
        if !gate_readability(fitness) {
            let worst = fitness
                .rr_i
                .iter()
                .position(|r| *r <= 0.0)
                .map(|i| format!("R{}", i + 1))
                .unwrap_or_default();
            return GateVerdict::reject(Rejection::LowReadability, format!("{worst} reached its threshold"), None, None);
        }
        let floor = self.config.readability_floor * self.baseline.fitness.rr;
        if fitness.rr < floor {
            return GateVerdict::reject(
                Rejection::LowReadability,
                format!("rr {:.3} below floor {:.3}", fitness.rr, floor),
                None,
                None,
            );
        }
        self.telemetry.lint.fetch_add(1, Ordering::Relaxed);
        let lint_score = match self.linter.score(unit) {
            Ok(s) => s,
            Err(e) => return GateVerdict::reject(Rejection::LowLintScore, e.to_string(), None, None),
        };
        if !gate_lint(lint_score, self.baseline.lint_score) {
            return GateVerdict::reject(
                Rejection::LowLintScore,
                format!(
                    "lint {:.2} < original {:.2}",
                    lint_score.unwrap_or_default(),
                    self.baseline.lint_score.unwrap_or_default()
                ),
                lint_score,
                None,
            );
        }
        self.telemetry.tests.fetch_add(1, Ordering::Relaxed);
        let report = match self.runner.run(unit, self.timeout) {
            Ok(r) => r,
            Err(e) => {
                log::warn!("{}: {e}", unit.manifest.id);
                return GateVerdict::reject(Rejection::TestFailure, e.to_string(), lint_score, None);
            }
        };
        if !report.all_passed() || report.total() != self.baseline.report.total() {
            let details = if report.timeout {
                "timeout".to_string()
            } else {
                format!("failing: {}", report.failures().join(", "))
            };
            return GateVerdict::reject(Rejection::TestFailure, details, lint_score, Some(report));
        }
        let delta = coverage_delta(&self.baseline.report, &report);
        if let Some(max) = self.config.max_coverage_drift {
            if delta.abs() > max {
                return GateVerdict::reject(
                    Rejection::CoverageDrift,
                    format!("coverage changed by {delta:.1} points"),
                    lint_score,
                    Some(report),
                );
            }
        }
        GateVerdict {
            accepted: true,
            rejected_by: None,
            details: String::new(),
            lint_score,
            report: Some(report),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn report(passed: u32, failed: u32, cov: f64) -> TestReport {
        TestReport {
            passed,
            failed,
            errored: 0,
            line_coverage_pct: cov,
            duration_ms: 5,
            tests: Vec::new(),
            timeout: false,
        }
    }

    #[test]
    fn coverage_delta_in_points() {
        assert_eq!(coverage_delta(&report(1, 0, 80.0), &report(1, 0, 80.0)), 0.0);
        let d = coverage_delta(&report(1, 0, 99.5), &report(1, 0, 93.8));
        assert!((d + 5.7).abs() < 1e-9);
    }

    #[test]
    fn readability_gate_boundaries() {
        let f = |rr_i: Vec<f64>| FitnessScore {
            rc: 0.5,
            rr: 0.5,
            rc_i: vec![],
            rr_i,
        };
        assert!(gate_readability(&f(vec![0.2, 0.9])));
        assert!(!gate_readability(&f(vec![0.0, 0.9])));
    }

    #[test]
    fn lint_gate_is_strict_less_than() {
        assert!(gate_lint(Some(9.62), Some(9.62)));
        assert!(!gate_lint(Some(9.45), Some(9.62)));
        assert!(gate_lint(None, Some(9.62)));
    }

    #[test]
    fn wire_report_parses() {
        let text = r#"{"passed": 2, "failed": 1, "errored": 0, "line_coverage_pct": 91.5, "duration_ms": 12,
            "tests": [{"name": "a", "outcome": "passed"}, {"name": "b", "outcome": "passed"},
                      {"name": "c", "outcome": "failed", "message": "AssertionError"}], "timeout": false}"#;
        let r = runner::parse_report(&text.replace('\n', " ")).unwrap();
        assert_eq!(r.total(), 3);
        assert_eq!(r.failures(), ["c"]);
        assert!(!r.all_passed());
        let bad = text.replace("\"failed\": 1", "\"failed\": 0").replace('\n', " ");
        assert!(runner::parse_report(&bad).is_err());
    }

    #[test]
    fn timeout_is_max_of_floor_and_factor() {
        let s = SandboxConfig::default();
        assert_eq!(s.candidate_timeout(Duration::from_secs(1)), Duration::from_secs(60));
        assert_eq!(s.candidate_timeout(Duration::from_secs(20)), Duration::from_secs(100));
    }
}
