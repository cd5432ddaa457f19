//! End-to-end tests driving the compiled binary: exit codes, output
//! determinism, and the wire formats of every verb.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn segcalc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_segcalc"))
}

fn run(args: &[&str]) -> Output {
    segcalc().args(args).output().expect("binary runs")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

fn temp_path(name: &str) -> PathBuf {
    let mut path = std::env::temp_dir();
    path.push(format!("segcalc-test-{}-{name}", std::process::id()));
    path
}

fn write_config(name: &str, body: &str) -> PathBuf {
    let path = temp_path(name);
    fs::write(&path, body).expect("write config");
    path
}

const SMALL_CONFIG: &str = "q=2\nell=7\nm_max=3\nn_max=6\ns_max=2\nlevels=0,1/2\nendo=Theta\n";

#[test]
fn invariants_matches_worked_example() {
    let output = run(&[
        "invariants", "--q", "2", "--ell", "7", "--n", "3", "--s", "1", "--k", "1", "--a", "3",
    ]);
    assert!(output.status.success());
    let text = stdout_of(&output);
    assert!(text.contains("w=3"), "{text}");
    assert!(text.contains("t=2"), "{text}");
    assert!(text.contains("c=7"), "{text}");
    assert!(text.contains("eps=3"), "{text}");
}

#[test]
fn invariants_reports_forbidden_tuples() {
    // w = 7, c = 7, ell = 7 has no integral class count
    let output = run(&[
        "invariants", "--q", "2", "--ell", "7", "--n", "3", "--k", "7", "--a", "1",
    ]);
    assert_eq!(output.status.code(), Some(1));
    let err = String::from_utf8(output.stderr).unwrap();
    assert!(err.contains("error"), "{err}");
}

#[test]
fn unknown_verb_is_usage_error() {
    let output = run(&["frobnicate"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn malformed_flag_is_usage_error() {
    let output = run(&["invariants", "--q", "notanumber", "--ell", "7", "--n", "1"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn unknown_verify_suite_is_usage_error() {
    let output = run(&["verify", "nonsense"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn enumerate_is_deterministic_and_json() {
    let config = write_config("enum.conf", SMALL_CONFIG);
    let first = run(&["enumerate", "--config", config.to_str().unwrap()]);
    let second = run(&["enumerate", "--config", config.to_str().unwrap()]);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout, "byte-identical across runs");
    let text = stdout_of(&first);
    assert!(!text.is_empty());
    for line in text.lines() {
        let row: serde_json::Value = serde_json::from_str(line).expect("valid JSON line");
        assert_eq!(row["q"], 2);
        assert_eq!(row["ell"], 7);
        assert!(row["w"].is_u64());
        assert!(row["t"].is_u64());
    }
    fs::remove_file(config).ok();
}

#[test]
fn enumerate_flags_override_config() {
    let config = write_config("override.conf", SMALL_CONFIG);
    let narrowed = run(&[
        "enumerate",
        "--config",
        config.to_str().unwrap(),
        "--n_max",
        "1",
        "--levels",
        "0",
    ]);
    assert!(narrowed.status.success());
    let text = stdout_of(&narrowed);
    for line in text.lines() {
        let row: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(row["n_tors"], 1, "n_max override respected");
        assert_eq!(row["level"], "0");
    }
    fs::remove_file(config).ok();
}

#[test]
fn census_counts_cells() {
    let config = write_config("census.conf", SMALL_CONFIG);
    let output = run(&["census", "--config", config.to_str().unwrap(), "--j", "0"]);
    assert!(output.status.success());
    let text = stdout_of(&output);
    let mut saw_w1 = false;
    for line in text.lines() {
        let row: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(row["j"], "0");
        assert!(row["count"].as_u64().unwrap() > 0);
        if row["w"] == 1 {
            saw_w1 = true;
        }
    }
    assert!(saw_w1, "w = 1 cell present: {text}");
    fs::remove_file(config).ok();
}

#[test]
fn verify_mackey_passes_and_is_json() {
    let output = run(&["verify", "mackey", "--bmax", "3", "--nmax", "6"]);
    assert!(output.status.success(), "exit 0 on all-pass");
    let text = stdout_of(&output);
    let mut count = 0;
    for line in text.lines() {
        let row: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(row["check"], "mackey");
        assert_eq!(row["pass"], true);
        assert!(row["params"]["b"].is_u64());
        count += 1;
    }
    assert_eq!(count, 3 * (1 + 2 + 3 + 4 + 5), "cuts for n in 2..=6 per b");
}

#[test]
fn verify_all_passes() {
    let output = segcalc()
        .args(["verify", "all", "--wmax", "32", "--vmax", "4", "--cases", "25"])
        .env("SEGCALC_THREADS", "2")
        .output()
        .expect("binary runs");
    assert!(
        output.status.success(),
        "verify all must exit 0: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let text = stdout_of(&output);
    assert!(text.lines().count() > 100);
    for line in text.lines() {
        let row: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(row["pass"], true, "{line}");
    }
}

#[test]
fn bad_thread_env_is_usage_error() {
    let output = segcalc()
        .args(["hasse", "3"])
        .env("SEGCALC_THREADS", "zero")
        .output()
        .expect("binary runs");
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn transfer_emits_signed_records() {
    let config = write_config("transfer.conf", SMALL_CONFIG);
    let universe = temp_path("u.jsonl");
    let enumerate = run(&[
        "enumerate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        universe.to_str().unwrap(),
    ]);
    assert!(enumerate.status.success());
    let output = run(&[
        "transfer",
        "--universe",
        universe.to_str().unwrap(),
        "--rmax",
        "2",
    ]);
    assert!(output.status.success());
    let text = stdout_of(&output);
    let mut saw_negative_sign = false;
    for line in text.lines() {
        let row: serde_json::Value = serde_json::from_str(line).unwrap();
        let source = &row["source"];
        let target = &row["target"];
        assert_eq!(target["r"], 1);
        for key in ["n_tors", "c", "w", "t", "level", "degree"] {
            assert_eq!(source[key], target[key], "{key} preserved: {line}");
        }
        match source["r"].as_u64().unwrap() {
            1 => assert_eq!(row["sign"], 1),
            2 => {
                assert_eq!(row["sign"], -1);
                saw_negative_sign = true;
            }
            _ => {}
        }
    }
    assert!(saw_negative_sign);
    fs::remove_file(config).ok();
    fs::remove_file(universe).ok();
}

#[test]
fn hasse_matches_worked_example() {
    let output = run(&["hasse", "3"]);
    assert!(output.status.success());
    assert_eq!(stdout_of(&output), "(1,1,1) -> (2,1)\n(2,1) -> (3)\n");
}

#[test]
fn hasse_has_only_cover_edges() {
    let output = run(&["hasse", "6"]);
    let text = stdout_of(&output);
    // (1,1,1,1,1,1) covers only (2,1,1,1,1); the full chain is longer
    assert!(text.contains("(1,1,1,1,1,1) -> (2,1,1,1,1)"));
    assert!(!text.contains("(1,1,1,1,1,1) -> (3"), "no skip edges: {text}");
    // dominance on partitions of 6 is not a total order
    assert!(text.contains("(3,1,1,1) -> (3,2,1)"));
    assert!(text.contains("(2,2,2) -> (3,2,1)"));
}
