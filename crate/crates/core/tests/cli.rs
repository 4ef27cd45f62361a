//! End-to-end checks of the `evobench` binary on small corpora.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_evobench"))
}

fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("evobench runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn copy_unit(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for e in fs::read_dir(from).unwrap() {
        let p = e.unwrap().path();
        if p.is_file() {
            fs::copy(&p, to.join(p.file_name().unwrap())).unwrap();
        }
    }
}

#[test]
fn shipped_profile_is_reproducible_from_the_reference_corpus() {
    let shipped = fs::read_to_string(repo("crates/core/data/default_profile.json")).unwrap();
    let date = json(&repo("crates/core/data/default_profile.json"))["provenance"]["date"]
        .as_str()
        .unwrap()
        .to_string();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.json");
    let o = run(bin().arg("profile").arg(repo("corpus/reference")).arg("-o").arg(&out).args(["--date", &date]));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(&out).unwrap(), shipped);
}

#[test]
fn profile_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(bin().arg("profile").arg(dir.path()).arg("-o").arg(dir.path().join("p.json")));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn analyze_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(bin().arg("analyze").arg(repo("corpus/sample")).arg("-o").arg(dir.path()));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&dir.path().join("analysis.json"));
    assert_eq!(report["schema_version"], 1);
    let units = report["units"].as_array().unwrap().len();
    let csv = fs::read_to_string(dir.path().join("analysis.csv")).unwrap();
    assert_eq!(csv.lines().count(), units + 1);
    assert!(csv.starts_with("id,C1,"));
    assert!(report["distribution"]["rc"]["median"].is_number());
}

#[test]
fn manifest_errors_abort_before_evolution() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    copy_unit(&repo("corpus/sample/median"), &corpus.join("median"));
    fs::create_dir_all(corpus.join("bad")).unwrap();
    fs::write(corpus.join("bad/manifest.json"), "{\n  \"id\": \"bad\",\n  \"source_files\": 3\n}\n").unwrap();
    let o = run(bin().arg("evolve").arg(&corpus).arg("-o").arg(dir.path().join("out")));
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line"), "{err}");
    assert!(!dir.path().join("out/median").exists());
}

/// A small run covering evolved, skipped and failing units, followed by bug
/// injection and the diversity report on its output.
#[test]
fn evolve_inject_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    copy_unit(&repo("corpus/sample/median"), &corpus.join("median"));
    copy_unit(&repo("corpus/sample/below_zero"), &corpus.join("below_zero"));
    copy_unit(&repo("corpus/outliers/common"), &corpus.join("common"));
    copy_unit(&repo("corpus/sample/incr_list"), &corpus.join("broken"));
    let manifest = fs::read_to_string(corpus.join("broken/manifest.json")).unwrap();
    fs::write(corpus.join("broken/manifest.json"), manifest.replace("\"incr_list\"", "\"broken\"")).unwrap();
    fs::write(corpus.join("broken/solution.py"), "def incr_list(values):\n    return values\n").unwrap();

    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"evolution": {"max_iterations": 2, "offspring_cap": 8}}"#).unwrap();
    let out = dir.path().join("out");
    let o = run(bin()
        .arg("evolve")
        .arg(&corpus)
        .arg("--config")
        .arg(&config)
        .args(["--seed", "3", "--budget", "120", "--breed", "0.2", "--jobs", "2", "-o"])
        .arg(&out));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.contains("corpus mean"), "{table}");

    let summary = json(&out.join("summary.json"));
    let status = |id: &str| {
        summary["units"]
            .as_array()
            .unwrap()
            .iter()
            .find(|u| u["id"] == id)
            .unwrap()["status"]
            .as_str()
            .unwrap()
            .to_string()
    };
    assert_eq!(status("median"), "evolved");
    assert_eq!(status("below_zero"), "evolved");
    assert_eq!(status("common"), "skipped");
    assert_eq!(status("broken"), "skipped");
    assert!(out.join("common/skipped.json").is_file());
    assert_eq!(
        fs::read_to_string(out.join("broken/solution.py")).unwrap(),
        fs::read_to_string(corpus.join("broken/solution.py")).unwrap()
    );
    let lineage = json(&out.join("median/lineage.json"));
    assert_eq!(lineage["schema_version"], 1);
    assert!(out.join("median/original/solution.py").is_file());
    assert!(fs::read_to_string(out.join("summary.csv")).unwrap().starts_with("id,status,rc_before"));

    let o = run(bin()
        .arg("inject-bugs")
        .arg(out.join("below_zero"))
        .args(["--order", "1", "--count", "2", "--seed", "5"]));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let bugs = json(&out.join("below_zero/mutants/order1/report.json"));
    assert_eq!(bugs["schema_version"], 1);
    let mutants = bugs["mutants"].as_array().unwrap();
    assert_eq!(mutants.len(), 2, "{bugs}");
    assert_eq!(mutants[0]["record"]["edits"].as_array().unwrap().len(), 1);
    assert!(out.join("below_zero/mutants/order1/0/transformed/solution.py").is_file());

    let o = run(bin().arg("inject-bugs").arg(out.join("median")).args(["--order", "3", "--count", "1"]));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let bugs: Value = serde_json::from_slice(&o.stdout).unwrap();
    if bugs["mutants"].as_array().unwrap().is_empty() {
        assert!(bugs["error"].as_str().unwrap().contains("sites"), "{bugs}");
    }

    let o = run(bin().arg("report").arg(&out).arg("-o").arg(dir.path()));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&dir.path().join("diversity.json"));
    let units = report["units"].as_array().unwrap();
    assert_eq!(units.len(), 2);
    assert_eq!(units[0]["pairs"][0]["a"], "original");
}

#[test]
fn bad_order_is_a_configuration_error() {
    let o = run(bin().arg("inject-bugs").arg("/nonexistent").args(["--order", "4"]));
    assert_eq!(o.status.code(), Some(2));
}
