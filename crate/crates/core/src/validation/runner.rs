//! Test execution behind the sandbox wire contract.
//!
//! A runner materializes a unit in a fresh temporary directory and obtains a
//! [`TestReport`]. [`ShimRunner`] invokes an external sandbox command as
//! `<cmd> <unit_dir> --timeout S [--deny-network]`; [`HarnessRunner`] keeps a
//! pool of the bundled Python stub sandbox in server mode so interpreter
//! start-up and heavy imports are paid once per worker.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde_json::json;
use tempfile::TempDir;

use super::{TestReport, ValidationError};
use crate::unit::ProgramUnit;

/// The bundled stub sandbox.
pub const HARNESS_PY: &str = include_str!("../../data/harness.py");

pub trait TestRunner: Send + Sync {
    fn run(&self, unit: &ProgramUnit, timeout: Duration) -> Result<TestReport, ValidationError>;
}

fn materialize(unit: &ProgramUnit) -> Result<TempDir, ValidationError> {
    let dir = tempfile::Builder::new()
        .prefix("evobench-unit-")
        .tempdir()
        .map_err(|e| ValidationError::Io(e.to_string()))?;
    unit.write_to(dir.path())
        .map_err(|e| ValidationError::Io(e.to_string()))?;
    Ok(dir)
}

/// Parses the single JSON document a sandbox prints.
pub fn parse_report(stdout: &str) -> Result<TestReport, ValidationError> {
    let line = stdout
        .lines()
        .rev()
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| ValidationError::SandboxCrashed("no report on stdout".into()))?;
    let value: serde_json::Value = serde_json::from_str(line)
        .map_err(|e| ValidationError::SandboxCrashed(format!("bad report: {e}")))?;
    if let Some(err) = value.get("harness_error") {
        return Err(ValidationError::SandboxCrashed(format!("harness error: {err}")));
    }
    let report: TestReport = serde_json::from_value(value)
        .map_err(|e| ValidationError::SandboxCrashed(format!("bad report: {e}")))?;
    report.check().map_err(ValidationError::SandboxCrashed)?;
    Ok(report)
}

/// Python interpreter used for the stub sandbox.
pub fn python() -> String {
    std::env::var("EVOBENCH_PYTHON").unwrap_or_else(|_| "python3".to_string())
}

/// Runs an external sandbox command per validation.
#[derive(Debug, Clone)]
pub struct ShimRunner {
    pub program: String,
    pub args: Vec<String>,
    pub deny_network: bool,
}

impl ShimRunner {
    /// Splits `command` on whitespace into program and leading arguments.
    pub fn from_command(command: &str, deny_network: bool) -> Option<Self> {
        let mut parts = command.split_whitespace().map(String::from);
        Some(ShimRunner {
            program: parts.next()?,
            args: parts.collect(),
            deny_network,
        })
    }
}

impl TestRunner for ShimRunner {
    fn run(&self, unit: &ProgramUnit, timeout: Duration) -> Result<TestReport, ValidationError> {
        let dir = materialize(unit)?;
        let mut cmd = Command::new(&self.program);
        cmd.args(&self.args)
            .arg(dir.path())
            .arg("--timeout")
            .arg(format!("{}", timeout.as_secs_f64()));
        if self.deny_network {
            cmd.arg("--deny-network");
        }
        let mut child = cmd
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| ValidationError::SandboxCrashed(format!("{}: {e}", self.program)))?;
        let stdout = drain(child.stdout.take());
        let stderr = drain(child.stderr.take());
        // the shim enforces the timeout itself; this guard only catches a
        // hung shim
        let guard = timeout * 2 + Duration::from_secs(10);
        let started = Instant::now();
        let status = loop {
            match child.try_wait() {
                Ok(Some(s)) => break s,
                Ok(None) if started.elapsed() > guard => {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(ValidationError::SandboxCrashed("sandbox did not exit".into()));
                }
                Ok(None) => thread::sleep(Duration::from_millis(5)),
                Err(e) => return Err(ValidationError::SandboxCrashed(e.to_string())),
            }
        };
        let out = stdout.join().unwrap_or_default();
        let err = stderr.join().unwrap_or_default();
        if !status.success() {
            return Err(ValidationError::SandboxCrashed(format!(
                "exit {status}: {}",
                err.trim()
            )));
        }
        parse_report(&out)
    }
}

fn drain<R: Read + Send + 'static>(pipe: Option<R>) -> thread::JoinHandle<String> {
    thread::spawn(move || {
        let mut s = String::new();
        if let Some(mut p) = pipe {
            let _ = p.read_to_string(&mut s);
        }
        s
    })
}

struct Server {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// The bundled stub sandbox, run as a pool of persistent servers.
pub struct HarnessRunner {
    script: PathBuf,
    _dir: TempDir,
    python: String,
    deny_network: bool,
    idle: Mutex<Vec<Server>>,
}

impl HarnessRunner {
    pub fn new(deny_network: bool) -> Result<Self, ValidationError> {
        let dir = tempfile::Builder::new()
            .prefix("evobench-harness-")
            .tempdir()
            .map_err(|e| ValidationError::Io(e.to_string()))?;
        let script = dir.path().join("harness.py");
        std::fs::write(&script, HARNESS_PY).map_err(|e| ValidationError::Io(e.to_string()))?;
        Ok(HarnessRunner {
            script,
            _dir: dir,
            python: python(),
            deny_network,
            idle: Mutex::new(Vec::new()),
        })
    }

    /// Path of the materialized stub, usable as a one-shot shim command.
    pub fn script(&self) -> &Path {
        &self.script
    }

    fn spawn(&self) -> Result<Server, ValidationError> {
        let mut child = Command::new(&self.python)
            .arg("-u")
            .arg(&self.script)
            .arg("--serve")
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| ValidationError::SandboxCrashed(format!("{}: {e}", self.python)))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(Server { child, stdin, stdout })
    }

    fn take(&self) -> Result<Server, ValidationError> {
        let pooled = self.idle.lock().expect("pool lock").pop();
        match pooled {
            Some(s) => Ok(s),
            None => self.spawn(),
        }
    }
}

impl TestRunner for HarnessRunner {
    fn run(&self, unit: &ProgramUnit, timeout: Duration) -> Result<TestReport, ValidationError> {
        let dir = materialize(unit)?;
        let mut server = self.take()?;
        let request = json!({
            "unit_dir": dir.path(),
            "timeout": timeout.as_secs_f64(),
            "deny_network": self.deny_network,
        });
        let crashed = |m: String| ValidationError::SandboxCrashed(m);
        writeln!(server.stdin, "{request}").map_err(|e| crashed(e.to_string()))?;
        server.stdin.flush().map_err(|e| crashed(e.to_string()))?;
        let mut line = String::new();
        let n = server
            .stdout
            .read_line(&mut line)
            .map_err(|e| crashed(e.to_string()))?;
        if n == 0 {
            return Err(crashed("stub sandbox exited".into()));
        }
        let report = parse_report(&line);
        if report.is_ok() {
            self.idle.lock().expect("pool lock").push(server);
        }
        report
    }
}
