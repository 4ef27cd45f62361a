//! Acceptance suite. Every top-level criterion prints exactly one
//! `[PASS]`/`[FAIL]` line; `cargo test --test acceptance -- --nocapture`
//! shows them together.
//!
//! Evolution runs go through the `evobench` binary with the bundled stub
//! sandbox and are shared between criteria. The per-unit budget is 120 s but
//! iterations and offspring are capped so the suite finishes on one core and
//! stays independent of wall-clock time.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::Duration;

use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner as PropRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use evobench_core::commands::bugs::load_evolved;
use evobench_core::commands::evolve::{EvolveSummary, UnitStatus, SUMMARY_FILE};
use evobench_core::commands::report::{cmd_report, jaccard, token_set};
use evobench_core::evolution::lineage::LineageFile;
use evobench_core::evolution::nsga::non_dominated_sort;
use evobench_core::metrics::fitness::{clipped_ratios, inverse_ratios};
use evobench_core::metrics::{complexity_vector, measure, ReferenceProfile};
use evobench_core::operators::{apply_operator, inject_bugs, operator_locations, OperatorError, OperatorId};
use evobench_core::unit::ProgramUnit;
use evobench_core::validation::{HarnessRunner, Linter, LinterConfig, TestRunner};

const SEED_A: u64 = 11;
const SEED_B: u64 = 29;
const TIMEOUT: Duration = Duration::from_secs(120);

fn report(criterion: &str, ok: bool, detail: &str) {
    println!("[{}] {criterion}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{criterion}: {detail}");
}

fn sample_corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus/sample")
}

fn harness() -> &'static HarnessRunner {
    static H: OnceLock<HarnessRunner> = OnceLock::new();
    H.get_or_init(|| HarnessRunner::new(true).expect("stub sandbox"))
}

// ---------------------------------------------------------------------------
// shared evolution runs

struct Runs {
    a: PathBuf,
    a_again: PathBuf,
    b: PathBuf,
    summary_a: EvolveSummary,
}

fn evolve(seed: u64, out: &Path) -> EvolveSummary {
    if out.exists() {
        fs::remove_dir_all(out).unwrap();
    }
    fs::create_dir_all(out.parent().unwrap()).unwrap();
    let config = out.with_extension("config.json");
    let json = serde_json::json!({
        "evolution": {"budget_s": 120.0, "max_iterations": 4, "offspring_cap": 32},
        "jobs": 1,
    });
    fs::write(&config, json.to_string()).unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_evobench"))
        .arg("evolve")
        .arg(sample_corpus())
        .arg("--config")
        .arg(&config)
        .arg("--seed")
        .arg(seed.to_string())
        .arg("-o")
        .arg(out)
        .status()
        .expect("evobench runs");
    assert!(status.success(), "evolve exited with {status}");
    serde_json::from_str(&fs::read_to_string(out.join(SUMMARY_FILE)).unwrap()).unwrap()
}

fn runs() -> &'static Runs {
    static R: OnceLock<Runs> = OnceLock::new();
    R.get_or_init(|| {
        let root = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
        let (a, a_again, b) = (root.join("seed_a"), root.join("seed_a_again"), root.join("seed_b"));
        let summary_a = evolve(SEED_A, &a);
        evolve(SEED_A, &a_again);
        evolve(SEED_B, &b);
        Runs { a, a_again, b, summary_a }
    })
}

fn evolved_ids(s: &EvolveSummary) -> Vec<String> {
    s.units.iter().filter(|u| u.status == UnitStatus::Evolved).map(|u| u.id.clone()).collect()
}

// ---------------------------------------------------------------------------
// functional preservation

fn pytest_passes(dir: &Path) -> bool {
    Command::new("python3")
        .args(["-m", "pytest", "-q", "-p", "no:cacheprovider"])
        .current_dir(dir)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

#[test]
fn functional_preservation() {
    let r = runs();
    let ids = evolved_ids(&r.summary_a);
    let skipped = r.summary_a.units.len() - ids.len();
    let mut failures = Vec::new();
    for id in &ids {
        let dir = r.a.join(id);
        let champion = ProgramUnit::load(&dir).unwrap();
        let stub = harness().run(&champion, TIMEOUT).unwrap();
        // second route: the unit's own pytest invocation
        let scratch = tempfile::tempdir().unwrap();
        champion.write_to(scratch.path()).unwrap();
        if !stub.all_passed() || !pytest_passes(scratch.path()) {
            failures.push(id.clone());
        }
    }
    report(
        "functional preservation",
        failures.is_empty() && skipped == 0 && ids.len() >= 20,
        &format!("{} champions, {} skipped, failing: {failures:?}", ids.len(), skipped),
    );
}

// ---------------------------------------------------------------------------
// complexity gain and readability floor

#[test]
fn complexity_gain() {
    let r = runs();
    let profile = ReferenceProfile::shipped();
    let mut not_increased = Vec::new();
    let (mut before, mut after) = (Vec::new(), Vec::new());
    for id in evolved_ids(&r.summary_a) {
        let (original, champion, _) = load_evolved(&r.a.join(&id)).unwrap();
        let b = measure(&original, &profile).fitness.rc;
        let a = measure(&champion, &profile).fitness.rc;
        if a <= b {
            not_increased.push(id.clone());
        }
        before.push(b);
        after.push(a);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let delta = (mean(&after) - mean(&before)) / mean(&before);
    let recorded = r.summary_a.corpus.delta_rc;
    report(
        "complexity gain",
        not_increased.is_empty() && delta >= 0.75 && (delta - recorded).abs() < 1e-9,
        &format!(
            "mean rc {:.4} -> {:.4}, delta {:+.1}% (summary {:+.1}%), not increased: {not_increased:?}",
            mean(&before),
            mean(&after),
            100.0 * delta,
            100.0 * recorded
        ),
    );
}

#[test]
fn readability_floor() {
    let r = runs();
    let profile = ReferenceProfile::shipped();
    let linter = Linter::new(LinterConfig::default());
    let mut violations = Vec::new();
    let (mut before, mut after) = (0.0, 0.0);
    let ids = evolved_ids(&r.summary_a);
    for id in &ids {
        let (original, champion, _) = load_evolved(&r.a.join(id)).unwrap();
        let (mo, mc) = (measure(&original, &profile), measure(&champion, &profile));
        if mc.fitness.rr_i.iter().any(|&x| x <= 0.0) {
            violations.push(format!("{id}: exhausted RR_i"));
        }
        let lo = linter.score(&original).unwrap().unwrap();
        let lc = linter.score(&champion).unwrap().unwrap();
        if lc < lo {
            violations.push(format!("{id}: lint {lc:.2} < {lo:.2}"));
        }
        before += mo.fitness.rr;
        after += mc.fitness.rr;
    }
    let decrease = (before - after) / before;
    report(
        "readability floor",
        violations.is_empty() && decrease <= 0.20,
        &format!(
            "mean rr {:.4} -> {:.4} ({:.1}% decrease), violations: {violations:?}",
            before / ids.len() as f64,
            after / ids.len() as f64,
            100.0 * decrease
        ),
    );
}

// ---------------------------------------------------------------------------
// coverage parity

#[test]
fn coverage_parity() {
    let r = runs();
    let mut worst = 0.0f64;
    let mut over = Vec::new();
    for id in evolved_ids(&r.summary_a) {
        let (original, champion, _) = load_evolved(&r.a.join(&id)).unwrap();
        let before = harness().run(&original, TIMEOUT).unwrap().line_coverage_pct;
        let after = harness().run(&champion, TIMEOUT).unwrap().line_coverage_pct;
        let d = (after - before).abs();
        worst = worst.max(d);
        if d > 10.0 {
            over.push(format!("{id}: {before:.1} -> {after:.1}"));
        }
    }
    report(
        "coverage parity",
        over.is_empty(),
        &format!("largest |delta| {worst:.2} points, over 10: {over:?}"),
    );
}

// ---------------------------------------------------------------------------
// oracle equivalences

/// Peels fronts by brute force: a point is in the current front when no
/// remaining point dominates it.
fn brute_force_fronts(points: &[(f64, f64)]) -> Vec<Vec<usize>> {
    let dominated = |p: (f64, f64), q: (f64, f64)| q.0 >= p.0 && q.1 >= p.1 && (q.0 > p.0 || q.1 > p.1);
    let mut remaining: Vec<usize> = (0..points.len()).collect();
    let mut fronts = Vec::new();
    while !remaining.is_empty() {
        let front: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&i| !remaining.iter().any(|&j| dominated(points[i], points[j])))
            .collect();
        remaining.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

fn nds_matches_oracle() -> Result<(), String> {
    // coarse grids force ties and duplicates alongside continuous values
    let coord = prop_oneof![(0u8..5).prop_map(|v| f64::from(v) / 4.0), 0.0f64..1.0];
    let sets = proptest::collection::vec((coord.clone(), coord), 0..40);
    let mut runner = PropRunner::new(PropConfig {
        cases: 1000,
        failure_persistence: None,
        ..PropConfig::default()
    });
    runner
        .run(&sets, |pts| {
            prop_assert_eq!(non_dominated_sort(&pts), brute_force_fronts(&pts));
            Ok(())
        })
        .map_err(|e| e.to_string())
}

const HANDCRAFTED_C1: &[&str] = &[
    "x = 1\n",
    "def f():\n    pass\n",
    "def f(a):\n    if a:\n        return 1\n    elif a is None:\n        return 2\n    else:\n        return 3\n",
    "def f(a, b):\n    return a and b or not a\n",
    "def f(xs):\n    return [x for x in xs if x if x > 1]\n",
    "def f(a):\n    return 1 if a else 2 if a is None else 3\n",
    "def f(xs):\n    for x in xs:\n        if x:\n            break\n    else:\n        return 0\n    return 1\n",
    "def f(n):\n    while n:\n        n -= 1\n        if n == 3:\n            continue\n    return n\n",
    "def f(x):\n    try:\n        return int(x)\n    except ValueError:\n        return 0\n    except (TypeError, KeyError):\n        return 1\n    finally:\n        pass\n",
    "def f(x):\n    return x\n    if x:\n        return 1\n",
    "def outer(a):\n    def inner(b):\n        if b:\n            return 1\n        return 0\n    return inner(a)\n",
    "class A:\n    K = 1 if True else 2\n    if K:\n        J = 2\n\n    def m(self, x):\n        for i in range(x):\n            pass\n        return x\n",
    "import sys\nif len(sys.argv) > 1:\n    for arg in sys.argv:\n        print(arg)\n",
    "def f(x):\n    with open(x) as fh:\n        if fh:\n            return fh.read()\n    return None\n",
    "def f(x):\n    g = lambda y: y if y else 0\n    assert x, 'x'\n    return g(x)\n",
    "def f(x):\n    while True:\n        try:\n            x += 1\n        except Exception:\n            raise\n        if x > 3:\n            return x\n",
];

/// Random structured programs covering every statement form C1 cares about.
fn generated_program(rng: &mut ChaCha8Rng) -> String {
    fn block(rng: &mut ChaCha8Rng, depth: usize, indent: usize, in_loop: bool, out: &mut String) {
        let pad = " ".repeat(indent);
        let n = rng.gen_range(1..4);
        for _ in 0..n {
            let choice = if depth >= 3 { rng.gen_range(0..4) } else { rng.gen_range(0..13) };
            match choice {
                0 => out.push_str(&format!("{pad}a = a + 1\n")),
                1 => out.push_str(&format!("{pad}b = [i for i in range(3) if i > a]\n")),
                2 => out.push_str(&format!("{pad}c = 1 if a and b else 2\n")),
                3 if in_loop => out.push_str(&format!("{pad}{}\n", if rng.gen() { "break" } else { "continue" })),
                3 => out.push_str(&format!("{pad}return a\n")),
                4 | 5 => {
                    out.push_str(&format!("{pad}if a > {}:\n", rng.gen_range(0..9)));
                    block(rng, depth + 1, indent + 4, in_loop, out);
                    for _ in 0..rng.gen_range(0..3) {
                        out.push_str(&format!("{pad}elif a == {}:\n", rng.gen_range(0..9)));
                        block(rng, depth + 1, indent + 4, in_loop, out);
                    }
                    if rng.gen() {
                        out.push_str(&format!("{pad}else:\n"));
                        block(rng, depth + 1, indent + 4, in_loop, out);
                    }
                }
                6 | 7 => {
                    out.push_str(&format!("{pad}for i in range({}):\n", rng.gen_range(1..5)));
                    block(rng, depth + 1, indent + 4, true, out);
                    if rng.gen_bool(0.3) {
                        out.push_str(&format!("{pad}else:\n"));
                        block(rng, depth + 1, indent + 4, in_loop, out);
                    }
                }
                8 => {
                    out.push_str(&format!("{pad}while a < {}:\n", rng.gen_range(1..5)));
                    block(rng, depth + 1, indent + 4, true, out);
                }
                9 => {
                    out.push_str(&format!("{pad}try:\n"));
                    block(rng, depth + 1, indent + 4, in_loop, out);
                    for e in ["ValueError", "KeyError", "TypeError"].iter().take(rng.gen_range(1..4)) {
                        out.push_str(&format!("{pad}except {e}:\n"));
                        block(rng, depth + 1, indent + 4, in_loop, out);
                    }
                    if rng.gen() {
                        out.push_str(&format!("{pad}finally:\n{pad}    a = 0\n"));
                    }
                }
                10 => {
                    out.push_str(&format!("{pad}def inner(a):\n"));
                    block(rng, depth + 1, indent + 4, false, out);
                }
                11 => out.push_str(&format!("{pad}with open('f') as fh:\n{pad}    a = fh\n")),
                _ => out.push_str(&format!("{pad}assert a or b\n")),
            }
        }
    }
    let mut out = String::new();
    for k in 0..rng.gen_range(1..4) {
        out.push_str(&format!("def f{k}(a, b):\n"));
        block(rng, 0, 4, false, &mut out);
        out.push('\n');
    }
    if rng.gen() {
        out.push_str("class K:\n    def m(self, a, b):\n");
        block(rng, 1, 8, false, &mut out);
    }
    if rng.gen() {
        out.push_str("a = 0\nb = 1\n");
        block(rng, 2, 0, false, &mut out);
    }
    out
}

const AST_ORACLE: &str = r#"
import ast, json, sys
KINDS = (ast.FunctionDef, ast.AsyncFunctionDef, ast.If, ast.For, ast.AsyncFor, ast.While, ast.ExceptHandler)
out = []
for path in sys.argv[1:]:
    tree = ast.parse(open(path).read())
    out.append(sum(isinstance(n, KINDS) for n in ast.walk(tree)))
print(json.dumps(out))
"#;

/// C1 counted independently with Python's own parser: one per function plus
/// one per `if`/`elif`, loop and `except` handler.
fn c1_oracle(sources: &[String]) -> Vec<usize> {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<PathBuf> = sources
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let p = dir.path().join(format!("f{i}.py"));
            fs::write(&p, s).unwrap();
            p
        })
        .collect();
    let out = Command::new("python3").arg("-c").arg(AST_ORACLE).args(&paths).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn c1_matches_oracle() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut fixtures: Vec<String> = HANDCRAFTED_C1.iter().map(|s| s.to_string()).collect();
    while fixtures.len() < 50 {
        fixtures.push(generated_program(&mut rng));
    }
    let want = c1_oracle(&fixtures);
    for (src, want) in fixtures.iter().zip(want) {
        let unit = ProgramUnit::from_source("fixture", src).map_err(|e| format!("{e}\n{src}"))?;
        let got = complexity_vector(&unit).c1 as usize;
        if got != want {
            return Err(format!("C1 {got} != oracle {want} for\n{src}"));
        }
    }
    Ok(())
}

fn clipping_branches() -> Result<(), String> {
    // rc_i = min(C/CT, 1): below, at and above the threshold
    let (rc, rc_i) = clipped_ratios(&[1.0, 4.0, 9.0, 0.0], &[4.0, 4.0, 3.0, 2.0]);
    let want_rc_i = [0.25, 1.0, 1.0, 0.0];
    // rr_i = max(1 - R/RT, 0): below, at and above the threshold
    let (rr, rr_i) = inverse_ratios(&[1.0, 4.0, 9.0, 0.0], &[4.0, 4.0, 3.0, 2.0]);
    let want_rr_i = [0.75, 0.0, 0.0, 1.0];
    let close = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12);
    if !close(&rc_i, &want_rc_i) || (rc - 0.5625).abs() > 1e-12 {
        return Err(format!("rc branches: {rc_i:?} mean {rc}"));
    }
    if !close(&rr_i, &want_rr_i) || (rr - 0.4375).abs() > 1e-12 {
        return Err(format!("rr branches: {rr_i:?} mean {rr}"));
    }
    Ok(())
}

#[test]
fn oracle_equivalences() {
    let results = [
        ("non-dominated sort vs brute force on 1000 sets", nds_matches_oracle()),
        ("C1 vs decision-count oracle on 50 fixtures", c1_matches_oracle()),
        ("clipping branches of rc and rr", clipping_branches()),
    ];
    let failed: Vec<String> = results
        .iter()
        .filter_map(|(name, r)| r.as_ref().err().map(|e| format!("{name}: {e}")))
        .collect();
    report(
        "oracle equivalences",
        failed.is_empty(),
        &if failed.is_empty() {
            results.iter().map(|(n, _)| *n).collect::<Vec<_>>().join("; ")
        } else {
            failed.join(" | ")
        },
    );
}

// ---------------------------------------------------------------------------
// operator soundness

const SCALE: &str = "def scale(x):\n    y = x * 2\n    return y\n";
const SCALE_TESTS: &str = "from solution import scale\n\n\ndef test_scale():\n    assert scale(3) == 6\n    assert scale(-1) == -2\n";
const TOTAL: &str = "def total(xs):\n    t = 0\n    for x in xs:\n        t += x\n    return t\n";
const TOTAL_TESTS: &str = "from solution import total\n\n\ndef test_total():\n    assert total([1, 2, 3]) == 6\n    assert total([]) == 0\n";
const SIGN: &str = "def sign(x):\n    if x > 0:\n        return 1\n    return 0\n";
const SIGN_TESTS: &str = "from solution import sign\n\n\ndef test_sign():\n    assert sign(5) == 1\n    assert sign(-5) == 0\n";
const HELPER: &str = "def helper(x):\n    return x + 1\n\n\ndef twice(x):\n    value = helper(x)\n    return value * 2\n";
const HELPER_TESTS: &str = "from solution import twice\n\n\ndef test_twice():\n    assert twice(1) == 4\n    assert twice(-1) == 0\n";
const LITERAL: &str = "def bump(xs):\n    return sum([1, 2, 3]) + max(xs)\n";
const LITERAL_TESTS: &str = "from solution import bump\n\n\ndef test_bump():\n    assert bump([4, 1]) == 10\n";
const ACC: &str = "class Acc:\n    def __init__(self):\n        self.total = 0\n\n    def add(self, a):\n        self.total += a\n        return self.total\n";
const ACC_TESTS: &str = "from solution import Acc\n\n\ndef test_acc():\n    acc = Acc()\n    acc.add(2)\n    assert acc.add(3) == 5\n";
const RANGE: &str = "def upto(n):\n    total = 0\n    for i in range(n):\n        total += i\n    return total\n";
const RANGE_TESTS: &str = "from solution import upto\n\n\ndef test_upto():\n    assert upto(4) == 6\n    assert upto(0) == 0\n";
const BOX: &str = "def offset(a):\n    c = a + 1\n    c += 2\n    return c\n";
const BOX_TESTS: &str = "from solution import offset\n\n\ndef test_offset():\n    assert offset(1) == 4\n";

/// Directed fixture and the complexity metrics each operator must raise.
fn directed_fixture(op: OperatorId) -> (&'static str, &'static str, &'static [&'static str]) {
    use OperatorId::*;
    match op {
        S1 => (TOTAL, TOTAL_TESTS, &["C1", "C3"]),
        S2 => (SIGN, SIGN_TESTS, &["C1", "C2", "C3"]),
        S3 => (TOTAL, TOTAL_TESTS, &["C1", "C3"]),
        S4 => (SCALE, SCALE_TESTS, &["C4"]),
        S5 => (SCALE, SCALE_TESTS, &["C1"]),
        S6 => (SCALE, SCALE_TESTS, &["C7"]),
        S7 => (HELPER, HELPER_TESTS, &["C6"]),
        S8 => (SCALE, SCALE_TESTS, &["C4"]),
        S9 => (LITERAL, LITERAL_TESTS, &["C5"]),
        S10 => (ACC, ACC_TESTS, &["C7"]),
        S11 => (RANGE, RANGE_TESTS, &["C4"]),
        S12 => (BOX, BOX_TESTS, &["C4"]),
        N1 | N2 => (HELPER, HELPER_TESTS, &[]),
        _ => (SCALE, SCALE_TESTS, &["C5"]),
    }
}

fn metric(unit: &ProgramUnit, key: &str) -> f64 {
    let keys = ["C1", "C2", "C3", "C4", "C5", "C6", "C7"];
    let i = keys.iter().position(|k| *k == key).expect("complexity key");
    complexity_vector(unit).values()[i]
}

#[test]
fn operator_soundness() {
    let mut problems = Vec::new();
    let mut applications = 0;
    for op in OperatorId::semantic() {
        let (src, tests, metrics) = directed_fixture(op);
        let unit = ProgramUnit::from_files(op.code(), &[("solution.py", src)], &[("test_solution.py", tests)]).unwrap();
        let locs = operator_locations(&unit, op);
        if locs.is_empty() {
            problems.push(format!("{}: not applicable to its fixture", op.code()));
            continue;
        }
        for (k, loc) in locs.iter().enumerate() {
            let (out, _) = match apply_operator(&unit, op, loc, 100 + k as u64) {
                Ok(r) => r,
                Err(e) => {
                    problems.push(format!("{}@{k}: {e}", op.code()));
                    continue;
                }
            };
            applications += 1;
            match harness().run(&out, TIMEOUT) {
                Ok(run) if run.all_passed() => {}
                Ok(run) => problems.push(format!("{}@{k}: tests fail {:?}", op.code(), run.failures())),
                Err(e) => problems.push(format!("{}@{k}: {e}", op.code())),
            }
            for m in metrics {
                if metric(&out, m) <= metric(&unit, m) {
                    problems.push(format!("{}@{k}: {m} did not increase", op.code()));
                }
            }
        }
    }
    report(
        "operator soundness",
        problems.is_empty(),
        &format!("22 operators, {applications} applications, problems: {problems:?}"),
    );
}

// ---------------------------------------------------------------------------
// bug injection

/// Changed lines per file between two versions with equal line counts,
/// compared with indentation stripped.
fn changed_lines(a: &ProgramUnit, b: &ProgramUnit) -> Option<Vec<(String, String)>> {
    let (ta, tb) = (a.source_texts(), b.source_texts());
    let mut out = Vec::new();
    for (path, x) in &ta {
        let y = tb.get(path)?;
        let (lx, ly): (Vec<&str>, Vec<&str>) = (x.lines().collect(), y.lines().collect());
        if lx.len() != ly.len() {
            return None;
        }
        for (p, q) in lx.iter().zip(&ly) {
            if p != q {
                out.push((p.trim().to_string(), q.trim().to_string()));
            }
        }
    }
    out.sort();
    Some(out)
}

/// Rough Python tokens of one line: words, numbers, strings and operators.
fn line_tokens(line: &str) -> Vec<String> {
    const OPS: &[&str] = &["**=", "//=", "==", "!=", "<=", ">=", "//", "**", "+=", "-=", "*=", "/=", "%=", "->"];
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        } else if c.is_alphanumeric() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '.' && chars[start].is_ascii_digit()) {
                i += 1;
            }
        } else if c == '"' || c == '\'' {
            i += 1;
            while i < chars.len() && chars[i] != c {
                i += if chars[i] == '\\' { 2 } else { 1 };
            }
            i = (i + 1).min(chars.len());
        } else {
            let rest: String = chars[i..].iter().take(3).collect();
            i += OPS.iter().find(|op| rest.starts_with(**op)).map_or(1, |op| op.len());
        }
        out.push(chars[start..i].iter().collect());
    }
    out
}

/// Tokens removed and inserted between two versions of a line, from a
/// longest-common-subsequence alignment. Operands the edit does not touch
/// drop out, so the same bug applied to differently written statements
/// yields the same delta.
fn token_delta(before: &str, after: &str) -> (Vec<String>, Vec<String>) {
    let (a, b) = (line_tokens(before), line_tokens(after));
    let mut lcs = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in (0..a.len()).rev() {
        for j in (0..b.len()).rev() {
            lcs[i][j] = if a[i] == b[j] { lcs[i + 1][j + 1] + 1 } else { lcs[i + 1][j].max(lcs[i][j + 1]) };
        }
    }
    let (mut removed, mut inserted) = (Vec::new(), Vec::new());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if i < a.len() && j < b.len() && a[i] == b[j] {
            i += 1;
            j += 1;
        } else if j < b.len() && (i == a.len() || lcs[i][j + 1] >= lcs[i + 1][j]) {
            inserted.push(b[j].clone());
            j += 1;
        } else {
            removed.push(a[i].clone());
            i += 1;
        }
    }
    (removed, inserted)
}

fn deltas(lines: &[(String, String)]) -> Vec<(Vec<String>, Vec<String>)> {
    let mut v: Vec<_> = lines.iter().map(|(x, y)| token_delta(x, y)).collect();
    v.sort();
    v
}

#[test]
fn token_delta_ignores_rewritten_operands() {
    assert_eq!(token_delta("seen = set()", "seen = str(set())"), token_delta("seen = make_seen()", "seen = str(make_seen())"));
    assert_eq!(token_delta("if a < b:", "if a >= b:"), (vec!["<".to_string()], vec![">=".to_string()]));
    assert_ne!(token_delta("x = a + b", "x = a - b"), token_delta("x = a + b", "x = a * b"));
}

#[test]
fn bug_injection() {
    let r = runs();
    let mut problems = Vec::new();
    let mut pairs = [0usize; 3];
    let mut insufficient = 0;
    let kill_timeout = Duration::from_secs(10);
    let killed = |u: &ProgramUnit| harness().run(u, kill_timeout).map(|t| !t.all_passed()).map_err(|e| e.to_string());
    for id in evolved_ids(&r.summary_a).iter().take(12) {
        let (original, champion, lineage) = load_evolved(&r.a.join(id)).unwrap();
        for order in 1..=3usize {
            let seed = 1000 * order as u64 + id.len() as u64;
            let pair = match inject_bugs(&original, &champion, &lineage.history, order, seed, killed) {
                Ok(p) => p,
                Err(OperatorError::InsufficientSites { .. }) => {
                    insufficient += 1;
                    continue;
                }
                Err(e) => {
                    problems.push(format!("{id} order {order}: {e}"));
                    continue;
                }
            };
            pairs[order - 1] += 1;
            let da = changed_lines(&original, &pair.original);
            let db = changed_lines(&champion, &pair.transformed);
            match (da, db) {
                (Some(da), Some(db)) => {
                    if da.len() != order || db.len() != order {
                        problems.push(format!("{id} order {order}: diff sizes {} and {}", da.len(), db.len()));
                    }
                    if deltas(&da) != deltas(&db) {
                        problems.push(format!("{id} order {order}: edits differ {da:?} vs {db:?}"));
                    }
                }
                _ => problems.push(format!("{id} order {order}: line structure changed")),
            }
            for (which, m) in [("original", &pair.original), ("transformed", &pair.transformed)] {
                let run = harness().run(m, kill_timeout).unwrap();
                if run.all_passed() {
                    problems.push(format!("{id} order {order}: {which} mutant survives"));
                }
            }
        }
    }
    report(
        "bug injection",
        problems.is_empty() && pairs.iter().all(|&n| n >= 5),
        &format!(
            "pairs by order {pairs:?}, {insufficient} units lacked sites, problems: {problems:?}"
        ),
    );
}

// ---------------------------------------------------------------------------
// determinism and diversity

fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

const TOKEN_ORACLE: &str = r#"
import io, json, sys, tokenize
SKIP = {tokenize.NEWLINE, tokenize.NL, tokenize.INDENT, tokenize.DEDENT, tokenize.COMMENT,
        tokenize.ENDMARKER, tokenize.ENCODING}
def tokens(paths):
    out = set()
    for p in paths:
        with open(p, 'rb') as fh:
            out |= {t.string for t in tokenize.tokenize(fh.readline) if t.type not in SKIP}
    return out
pairs = json.loads(sys.stdin.read())
res = []
for a, b in pairs:
    x, y = tokens(a), tokens(b)
    res.append(len(x & y) / len(x | y) if x | y else 1.0)
print(json.dumps(res))
"#;

/// Token-set Jaccard computed with Python's tokenizer.
fn python_jaccard(pairs: &[(Vec<PathBuf>, Vec<PathBuf>)]) -> Vec<f64> {
    use std::io::Write;
    let mut child = Command::new("python3")
        .arg("-c")
        .arg(TOKEN_ORACLE)
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(serde_json::to_string(pairs).unwrap().as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    serde_json::from_slice(&out.stdout).unwrap()
}

fn source_paths(dir: &Path, unit: &ProgramUnit) -> Vec<PathBuf> {
    unit.manifest.source_files.iter().map(|f| dir.join(f)).collect()
}

#[test]
fn determinism() {
    let r = runs();
    let (ta, ta2) = (tree(&r.a), tree(&r.a_again));
    let identical = ta == ta2;
    let differing: Vec<&PathBuf> = ta.keys().filter(|k| ta.get(*k) != ta2.get(*k)).take(5).collect();

    let diversity = cmd_report(&[r.a.clone(), r.b.clone()], None).unwrap();
    let mut ours = Vec::new();
    let mut pairs = Vec::new();
    for id in evolved_ids(&r.summary_a) {
        let (pa, pb) = (r.a.join(&id), r.b.join(&id));
        let (ua, ub) = (ProgramUnit::load(&pa).unwrap(), ProgramUnit::load(&pb).unwrap());
        ours.push(jaccard(&token_set(&ua), &token_set(&ub)));
        pairs.push((source_paths(&pa, &ua), source_paths(&pb, &ub)));
    }
    let theirs = python_jaccard(&pairs);
    let agree = ours.len() == theirs.len() && ours.iter().zip(&theirs).all(|(x, y)| (x - y).abs() < 1e-9);
    let distinct = ours.iter().filter(|&&j| j < 1.0).count() as f64 / ours.len() as f64;
    let mean = ours.iter().sum::<f64>() / ours.len() as f64;
    let reported = diversity.mean_champion_jaccard.unwrap_or(f64::NAN);
    let ok = identical
        && agree
        && distinct >= 0.8
        && (0.3..=0.8).contains(&mean)
        && (reported - mean).abs() < 1e-9;
    report(
        "determinism",
        ok,
        &format!(
            "same seed identical: {identical} ({} files, first differing {differing:?}); different seeds: {:.0}% distinct, mean Jaccard {mean:.3} (report {reported:.3}), python tokenizer agrees: {agree}",
            ta.len(),
            100.0 * distinct
        ),
    );
}

#[test]
fn sample_corpus_has_twenty_units() {
    let n = evobench_core::unit::discover_units(&sample_corpus()).unwrap().len();
    assert!(n >= 20, "{n} units");
}

#[test]
fn lineage_files_carry_schema_version() {
    let r = runs();
    for id in evolved_ids(&r.summary_a) {
        let text = fs::read_to_string(r.a.join(&id).join("lineage.json")).unwrap();
        let lineage = LineageFile::from_json(&text).unwrap();
        assert_eq!(lineage.unit_id, id);
        let ids: BTreeSet<_> = lineage.history.iter().map(|h| h.iteration).collect();
        assert!(ids.iter().all(|&i| i >= 1));
    }
}
