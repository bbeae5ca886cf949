use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn small_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/small.cfg")
}

fn taylorom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_taylorom")).args(args).output().unwrap()
}

fn run_ok(args: &[&str]) -> Output {
    let out = taylorom(args);
    assert!(
        out.status.success(),
        "{args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

fn artifact_digest(m: &Value, name: &str) -> String {
    m["artifacts"]
        .as_array()
        .unwrap()
        .iter()
        .find(|a| a["path"] == name)
        .unwrap_or_else(|| panic!("no artifact {name}"))["sha256"]
        .as_str()
        .unwrap()
        .to_owned()
}

#[test]
fn missing_config_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("run");
    let out = taylorom(&["solve-full", "-c", "/nonexistent/run.cfg", "-o", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/run.cfg"));
}

#[test]
fn bad_override_is_a_usage_error() {
    let cfg = small_config();
    let out = taylorom(&["solve-full", "-c", cfg.to_str().unwrap(), "--set", "dt=0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dt"));
}

#[test]
fn inadmissible_alpha_is_a_numerical_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config();
    let out = taylorom(&[
        "solve-full",
        "-c",
        cfg.to_str().unwrap(),
        "-o",
        tmp.path().to_str().unwrap(),
        "--alpha",
        "-1e6",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("theta non-positive"));
}

#[test]
fn repeated_runs_are_bitwise_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config();
    let dirs = [tmp.path().join("a"), tmp.path().join("b")];
    for d in &dirs {
        run_ok(&["compare", "-c", cfg.to_str().unwrap(), "-o", d.to_str().unwrap()]);
    }
    let (a, b) = (manifest(&dirs[0]), manifest(&dirs[1]));
    for name in ["traces_rom.csv", "traces_full.csv", "basis.morf"] {
        assert_eq!(artifact_digest(&a, name), artifact_digest(&b, name), "{name}");
    }
    assert_eq!(a["results"]["average_error"], b["results"]["average_error"]);
}

#[test]
fn replay_reproduces_recorded_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config();
    let first = tmp.path().join("first");
    run_ok(&["build-basis", "-c", cfg.to_str().unwrap(), "-o", first.to_str().unwrap(), "--degree", "1"]);
    let again = tmp.path().join("again");
    let out = run_ok(&[
        "replay",
        "--manifest",
        first.join("manifest.json").to_str().unwrap(),
        "-o",
        again.to_str().unwrap(),
    ]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("replay matched"));
    assert_eq!(
        artifact_digest(&manifest(&first), "basis.morf"),
        artifact_digest(&manifest(&again), "basis.morf")
    );
}

#[test]
fn stored_basis_feeds_rom_solve() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config();
    let build = tmp.path().join("build");
    run_ok(&["build-basis", "-c", cfg.to_str().unwrap(), "-o", build.to_str().unwrap()]);
    let solve = tmp.path().join("solve");
    run_ok(&[
        "rom-solve",
        "-c",
        cfg.to_str().unwrap(),
        "-o",
        solve.to_str().unwrap(),
        "--basis",
        build.join("basis.morf").to_str().unwrap(),
        "--reference",
    ]);
    let m = manifest(&solve);
    assert!(m["results"]["average_error"].as_f64().unwrap() < 0.05);
    let inputs = m["inputs"].as_array().unwrap();
    assert!(inputs.iter().any(|i| i["path"].as_str().unwrap().ends_with("basis.morf")));
}

#[test]
fn coarse_line_search_is_flagged() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config();
    let run = |points: &str, dir: &Path| {
        run_ok(&["linesearch", "-c", cfg.to_str().unwrap(), "-o", dir.to_str().unwrap(), "--points", points]);
        manifest(dir)
    };
    let coarse = run("5", &tmp.path().join("coarse"));
    assert_eq!(coarse["results"]["coarse_grid"], Value::Bool(true));
    let fine = run("21", &tmp.path().join("fine"));
    assert_eq!(fine["results"]["coarse_grid"], Value::Bool(false));
    assert!(fine["results"]["alpha_star"].as_f64().unwrap().is_finite());
}
