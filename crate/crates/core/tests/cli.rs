//! Golden-output and exit-status tests for the `orient` binary.
//!
//! Set `ORIENT_BLESS=1` to rewrite the golden files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn orient(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orient"))
        .args(args)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .expect("orient runs")
}

fn tasks() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tasks");
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    v.sort();
    v
}

fn check_golden(name: &str, actual: &[u8]) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("ORIENT_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read(&path).unwrap_or_else(|_| panic!("missing golden file {name}"));
    assert!(
        expected == actual,
        "{name} differs:\n--- expected\n{}\n--- actual\n{}",
        String::from_utf8_lossy(&expected),
        String::from_utf8_lossy(actual)
    );
}

#[test]
fn example_tasks_match_golden_output() {
    for task in tasks() {
        let stem = task.file_stem().unwrap().to_str().unwrap().to_string();
        let rel = format!("tasks/{stem}.toml");
        for (mode, ext) in [("text", "txt"), ("machine", "json")] {
            let first = orient(&["run", &rel, "--output", mode]);
            assert_eq!(first.status.code(), Some(0), "{rel}: {}", String::from_utf8_lossy(&first.stderr));
            let second = orient(&["run", &rel, "--output", mode]);
            assert_eq!(first.stdout, second.stdout, "{rel} is not deterministic");
            check_golden(&format!("{stem}.{ext}"), &first.stdout);
        }
    }
}

#[test]
fn machine_output_is_json_with_rational_strings() {
    let out = orient(&["run", "tasks/fgl-inverse.toml", "--output", "machine"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["task"], "fgl-inverse");
    let c = &v["result"]["coefficients"][2]["terms"][0];
    assert_eq!(c["coefficient"], "-1/1");
    assert_eq!(c["exponents"]["beta"], 2);
}

#[test]
fn failed_expectation_exits_one() {
    let out = orient(&["run", "tests/fixtures/bad-expect.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn parse_errors_exit_two() {
    for f in ["tests/fixtures/malformed.toml", "tests/fixtures/unknown-field.toml", "tests/fixtures/absent.toml"] {
        let out = orient(&["run", f]);
        assert_eq!(out.status.code(), Some(2), "{f}");
        assert!(out.stdout.is_empty());
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "));
    }
}

#[test]
fn truncation_ceiling_exits_three() {
    let out = orient(&["run", "tasks/euler-characteristic.toml", "--max-raise", "3"]);
    assert_eq!(out.status.code(), Some(3));
    let out = orient(&["run", "tasks/euler-characteristic.toml", "--max-raise", "3", "--output", "machine"]);
    assert_eq!(out.status.code(), Some(3));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["truncation"], true);
}

#[test]
fn truncation_flag_sets_the_starting_cap() {
    let out = orient(&["run", "tasks/p1-obstruction.toml", "--truncation", "7", "--output", "machine"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["truncation"]["cap"], 7);
}

#[test]
fn check_axioms_subcommand() {
    let out = orient(&["check-axioms", "--theory", "chow", "--order", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let out = orient(&["check-axioms", "--theory", "ktheory", "--order", "6", "--fault", "perturb-inverse"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    let failing: Vec<_> = text.lines().filter(|l| l.contains("FAIL")).collect();
    assert!(failing.iter().any(|l| l.starts_with("formal inverse")), "{text}");
    assert!(failing.iter().all(|l| l.starts_with("formal inverse") || l.starts_with("status")), "{text}");
}

#[test]
fn timing_goes_to_stderr() {
    let out = orient(&["run", "tasks/bezout.toml"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("elapsed"));
    assert!(!String::from_utf8_lossy(&out.stdout).contains("elapsed"));
}
