//! End-to-end runs of the `loopcover` binary.

use std::path::Path;
use std::process::{Command, Output};

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn loopcover(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loopcover"))
        .args(args)
        .output()
        .unwrap()
}

const COVER: &str = r#"
kind = "cover-prob"
sizes = [5]
budget = 2000
seed = 1

[killing]
rule = "fixed"
c = 0.5

[params]
oracle = "mc"
"#;

#[test]
fn success_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), COVER);
    let out = loopcover(&["cover-prob", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("n,c,oracle,estimate,ci_low,ci_high"), "{text}");
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn out_and_json_format() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), COVER);
    let target = dir.path().join("result.json");
    let out = loopcover(&[
        "cover-prob",
        "--config",
        config.to_str().unwrap(),
        "--out",
        target.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(value["kind"], "cover-prob");
    assert_eq!(value["rows"].as_array().unwrap().len(), 1);
}

#[test]
fn seed_override_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), COVER);
    let path = config.to_str().unwrap();
    let a = loopcover(&["cover-prob", "--config", path, "--seed", "9"]);
    let b = loopcover(&["cover-prob", "--config", path, "--seed", "9"]);
    let c = loopcover(&["cover-prob", "--config", path, "--seed", "10"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for bad in [
        "sizes = [5]\nunknown_key = 1\n",
        "sizes = [5]\n[killing]\nrule = \"fixed\"\nc = -1.0\n",
        "kind = \"soup\"\nsizes = [5]\n",
    ] {
        let config = write_config(dir.path(), bad);
        let out = loopcover(&["cover-prob", "--config", config.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{bad}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn infeasible_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "sizes = [20]\n[killing]\nrule = \"fixed\"\nc = 0.5\n[params]\noracle = \"dp\"\n",
    );
    let out = loopcover(&["cover-prob", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}
