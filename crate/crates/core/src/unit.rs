//! Program units: one benchmark problem with its sources, tests and
//! manifest, loaded from a directory.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Component, Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::python::ast::{walk_stmts, Module, StmtKind};
use crate::python::lineage::{assign_missing, max_lineage};
use crate::python::scope::walk_stmt_idents;
use crate::python::{emit_module, parse_module, SyntaxError};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum UnitError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Manifest {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {error}")]
    Syntax { path: PathBuf, error: SyntaxError },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> UnitError + '_ {
    move |source| UnitError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn default_test_command() -> String {
    "pytest -q".to_string()
}

fn default_timeout() -> u64 {
    60
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkManifest {
    pub id: String,
    pub source_files: Vec<String>,
    pub entry: String,
    pub test_files: Vec<String>,
    #[serde(default = "default_test_command")]
    pub test_command: String,
    #[serde(default = "default_timeout")]
    pub timeout_s: u64,
    #[serde(default)]
    pub task_tags: BTreeSet<String>,
}

impl BenchmarkManifest {
    /// Manifest for a single source file without tests.
    pub fn single(id: &str, file: &str) -> Self {
        BenchmarkManifest {
            id: id.to_string(),
            source_files: vec![file.to_string()],
            entry: file.to_string(),
            test_files: Vec::new(),
            test_command: default_test_command(),
            timeout_s: default_timeout(),
            task_tags: BTreeSet::new(),
        }
    }

    /// Parses and validates a manifest, reporting the line and column of
    /// schema violations.
    pub fn parse(path: &Path, text: &str) -> Result<Self, UnitError> {
        let m: BenchmarkManifest =
            serde_json::from_str(text).map_err(|e| UnitError::Manifest {
                path: path.to_path_buf(),
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
        let fail = |key: &str, message: String| {
            let (line, column) = locate_key(text, key);
            Err(UnitError::Manifest {
                path: path.to_path_buf(),
                line,
                column,
                message,
            })
        };
        if m.id.trim().is_empty() {
            return fail("id", "id must not be empty".into());
        }
        if m.source_files.is_empty() {
            return fail("source_files", "at least one source file is required".into());
        }
        for f in m.source_files.iter().chain(&m.test_files).chain([&m.entry]) {
            if !is_safe_relative(f) || !f.ends_with(".py") {
                let key = if m.test_files.contains(f) {
                    "test_files"
                } else if &m.entry == f && !m.source_files.contains(f) {
                    "entry"
                } else {
                    "source_files"
                };
                return fail(key, format!("'{f}' must be a relative .py path inside the unit"));
            }
        }
        if !m.source_files.contains(&m.entry) {
            return fail("entry", format!("entry '{}' is not listed in source_files", m.entry));
        }
        if m.source_files.iter().any(|s| m.test_files.contains(s)) {
            return fail("test_files", "a file cannot be both source and test".into());
        }
        if m.timeout_s == 0 {
            return fail("timeout_s", "timeout_s must be positive".into());
        }
        Ok(m)
    }
}

fn locate_key(text: &str, key: &str) -> (usize, usize) {
    let needle = format!("\"{key}\"");
    for (i, line) in text.lines().enumerate() {
        if let Some(c) = line.find(&needle) {
            return (i + 1, c + 1);
        }
    }
    (1, 1)
}

fn is_safe_relative(p: &str) -> bool {
    let path = Path::new(p);
    !p.is_empty()
        && path
            .components()
            .all(|c| matches!(c, Component::Normal(_)))
}

/// Dotted module name for a unit-relative source path.
pub fn module_name(path: &str) -> String {
    path.trim_end_matches(".py").replace('/', ".")
}

#[derive(Debug, Clone)]
pub struct SourceFile {
    pub module: Module,
    /// Original text, kept until the file is modified so unchanged files
    /// are written back byte for byte.
    pub original: Option<String>,
}

impl SourceFile {
    pub fn text(&self) -> String {
        match &self.original {
            Some(t) => t.clone(),
            None => emit_module(&self.module),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProgramUnit {
    pub manifest: BenchmarkManifest,
    pub sources: BTreeMap<String, SourceFile>,
    /// Test files, verbatim.
    pub tests: BTreeMap<String, String>,
    /// Names and attribute names appearing anywhere in the tests.
    pub test_names: BTreeSet<String>,
    /// Next free lineage counter value.
    pub next_lineage: u32,
}

impl ProgramUnit {
    pub fn load(dir: &Path) -> Result<Self, UnitError> {
        let mpath = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&mpath).map_err(io_err(&mpath))?;
        let manifest = BenchmarkManifest::parse(&mpath, &text)?;
        let mut sources = BTreeMap::new();
        for f in &manifest.source_files {
            let p = dir.join(f);
            let text = fs::read_to_string(&p).map_err(io_err(&p))?;
            sources.insert(f.clone(), text);
        }
        let mut tests = BTreeMap::new();
        for f in &manifest.test_files {
            let p = dir.join(f);
            let text = fs::read_to_string(&p).map_err(io_err(&p))?;
            tests.insert(f.clone(), text);
        }
        Self::from_texts(manifest, sources, tests).map_err(|(file, error)| UnitError::Syntax {
            path: dir.join(file),
            error,
        })
    }

    /// Builds a unit from in-memory texts. Lineage ids are assigned across
    /// source files in manifest order.
    pub fn from_texts(
        manifest: BenchmarkManifest,
        sources: BTreeMap<String, String>,
        tests: BTreeMap<String, String>,
    ) -> Result<Self, (String, SyntaxError)> {
        let mut files = BTreeMap::new();
        let mut next = 0;
        for f in &manifest.source_files {
            let text = sources.get(f).cloned().unwrap_or_default();
            let mut module = parse_module(&text).map_err(|e| (f.clone(), e))?;
            next = assign_missing(&mut module.body, next);
            files.insert(
                f.clone(),
                SourceFile {
                    module,
                    original: Some(text),
                },
            );
        }
        let mut test_names = BTreeSet::new();
        for (f, text) in &tests {
            let m = parse_module(text).map_err(|e| (f.clone(), e))?;
            collect_names(&m, &mut test_names);
        }
        Ok(ProgramUnit {
            manifest,
            sources: files,
            tests,
            test_names,
            next_lineage: next,
        })
    }

    /// Single-file unit without tests, named `solution.py`.
    pub fn from_source(id: &str, source: &str) -> Result<Self, SyntaxError> {
        let file = "solution.py";
        let mut sources = BTreeMap::new();
        sources.insert(file.to_string(), source.to_string());
        Self::from_texts(BenchmarkManifest::single(id, file), sources, BTreeMap::new())
            .map_err(|(_, e)| e)
    }

    /// Unit from in-memory `(path, text)` pairs; the first source is the
    /// entry point.
    pub fn from_files(
        id: &str,
        sources: &[(&str, &str)],
        tests: &[(&str, &str)],
    ) -> Result<Self, (String, SyntaxError)> {
        let mut manifest = BenchmarkManifest::single(id, sources.first().map_or("solution.py", |s| s.0));
        manifest.source_files = sources.iter().map(|(p, _)| p.to_string()).collect();
        manifest.test_files = tests.iter().map(|(p, _)| p.to_string()).collect();
        let owned = |v: &[(&str, &str)]| v.iter().map(|(p, t)| (p.to_string(), t.to_string())).collect();
        Self::from_texts(manifest, owned(sources), owned(tests))
    }

    /// Source files in manifest order.
    pub fn files(&self) -> impl Iterator<Item = (&String, &SourceFile)> {
        self.manifest
            .source_files
            .iter()
            .filter_map(move |f| self.sources.get_key_value(f))
    }

    pub fn module(&self, path: &str) -> Option<&Module> {
        self.sources.get(path).map(|s| &s.module)
    }

    /// Mutable access to a module; marks the file as modified.
    pub fn module_mut(&mut self, path: &str) -> Option<&mut Module> {
        self.sources.get_mut(path).map(|s| {
            s.original = None;
            &mut s.module
        })
    }

    /// Adds a new source file to the unit and manifest.
    pub fn add_file(&mut self, path: &str, module: Module) {
        self.manifest.source_files.push(path.to_string());
        self.sources.insert(
            path.to_string(),
            SourceFile {
                module,
                original: None,
            },
        );
    }

    /// Dotted names of all modules in the unit.
    pub fn module_names(&self) -> BTreeSet<String> {
        self.manifest
            .source_files
            .iter()
            .map(|f| module_name(f))
            .collect()
    }

    /// Allocates a fresh lineage id value.
    pub fn fresh_lineage(&mut self) -> u32 {
        self.next_lineage += 1;
        self.next_lineage
    }

    /// Gives every statement without lineage a fresh id.
    pub fn assign_lineage(&mut self) {
        let mut next = self.next_lineage;
        for f in self.manifest.source_files.clone() {
            if let Some(s) = self.sources.get_mut(&f) {
                let before = next;
                next = assign_missing(&mut s.module.body, next);
                if next != before {
                    s.original = None;
                }
            }
        }
        let max = self
            .sources
            .values()
            .map(|s| max_lineage(&s.module.body))
            .max()
            .unwrap_or(0);
        self.next_lineage = next.max(max);
    }

    /// Current text of every source file, keyed by path.
    pub fn source_texts(&self) -> BTreeMap<String, String> {
        self.files().map(|(p, s)| (p.clone(), s.text())).collect()
    }

    /// Canonical text of every source file; used for measurement so that
    /// originals and transformed programs are compared in the same format.
    pub fn canonical_texts(&self) -> BTreeMap<String, String> {
        self.files()
            .map(|(p, s)| (p.clone(), emit_module(&s.module)))
            .collect()
    }

    /// Stable digest of the unit's source texts.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv::default();
        for (p, t) in self.canonical_texts() {
            h.write(p.as_bytes());
            h.write(&[0]);
            h.write(t.as_bytes());
            h.write(&[0]);
        }
        h.0
    }

    /// Writes manifest, sources and tests into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(), UnitError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let mpath = dir.join(MANIFEST_FILE);
        let json = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        fs::write(&mpath, json + "\n").map_err(io_err(&mpath))?;
        for (p, text) in self.source_texts().into_iter().chain(self.tests.clone()) {
            let path = dir.join(&p);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(io_err(parent))?;
            }
            fs::write(&path, text).map_err(io_err(&path))?;
        }
        Ok(())
    }
}

/// 64-bit FNV-1a, used for stable (platform- and run-independent) hashing.
#[derive(Debug, Clone, Copy)]
pub struct Fnv(pub u64);

impl Default for Fnv {
    fn default() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }
}

impl Fnv {
    pub fn write(&mut self, bytes: &[u8]) {
        for b in bytes {
            self.0 ^= u64::from(*b);
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }

    pub fn hash(bytes: &[u8]) -> u64 {
        let mut h = Fnv::default();
        h.write(bytes);
        h.0
    }
}

fn collect_names(m: &Module, out: &mut BTreeSet<String>) {
    walk_stmt_idents(&m.body, &mut |id| {
        out.insert(id.name.clone());
    });
    crate::python::ast::walk_exprs(&m.body, &mut |e| {
        if let crate::python::ast::Expr::Attribute { attr, .. } = e {
            out.insert(attr.clone());
        }
    });
    walk_stmts(&m.body, &mut |s| {
        if let StmtKind::ImportFrom { names, .. } = &s.kind {
            for a in names {
                out.insert(a.name.clone());
            }
        }
    });
}

/// Unit directories under `root`: `root` itself when it holds a manifest,
/// otherwise its immediate subdirectories that do, sorted by name.
pub fn discover_units(root: &Path) -> Result<Vec<PathBuf>, UnitError> {
    if root.join(MANIFEST_FILE).is_file() {
        return Ok(vec![root.to_path_buf()]);
    }
    let mut out = Vec::new();
    for entry in fs::read_dir(root).map_err(io_err(root))? {
        let entry = entry.map_err(io_err(root))?;
        let p = entry.path();
        if p.is_dir() && p.join(MANIFEST_FILE).is_file() {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest_json() -> &'static str {
        "{\n  \"id\": \"u1\",\n  \"source_files\": [\"solution.py\"],\n  \"entry\": \"solution.py\",\n  \"test_files\": [\"test_solution.py\"]\n}\n"
    }

    #[test]
    fn manifest_defaults() {
        let m = BenchmarkManifest::parse(Path::new("m.json"), manifest_json()).unwrap();
        assert_eq!(m.timeout_s, 60);
        assert!(m.task_tags.is_empty());
    }

    #[test]
    fn manifest_errors_carry_line_numbers() {
        let bad = manifest_json().replace("\"solution.py\"]", "\"../x.py\"]");
        match BenchmarkManifest::parse(Path::new("m.json"), &bad) {
            Err(UnitError::Manifest { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let broken = "{\n  \"id\": \"u1\",\n  \"source_files\": 3\n}";
        match BenchmarkManifest::parse(Path::new("m.json"), broken) {
            Err(UnitError::Manifest { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lineage_spans_files_in_manifest_order() {
        let manifest = BenchmarkManifest {
            id: "u".into(),
            source_files: vec!["b.py".into(), "a.py".into()],
            entry: "b.py".into(),
            test_files: vec![],
            test_command: default_test_command(),
            timeout_s: 60,
            task_tags: BTreeSet::new(),
        };
        let mut sources = BTreeMap::new();
        sources.insert("a.py".to_string(), "x = 1\n".to_string());
        sources.insert("b.py".to_string(), "y = 2\nz = 3\n".to_string());
        let u = ProgramUnit::from_texts(manifest, sources, BTreeMap::new()).unwrap();
        assert_eq!(u.next_lineage, 3);
        let a = &u.module("a.py").unwrap().body[0];
        assert_eq!(a.lineage.unwrap().to_string(), "s3");
        assert_eq!(u.source_texts()["b.py"], "y = 2\nz = 3\n");
    }
}
