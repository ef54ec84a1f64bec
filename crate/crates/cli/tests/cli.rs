//! End-to-end checks of the `immunolearn` binary.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_immunolearn")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn simulate_writes_versioned_csv_and_tagged_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "simulate",
        "--M",
        "20",
        "--N",
        "10",
        "--p",
        "0.1",
        "--lambda-m",
        "0.5",
        "--replicates",
        "8",
        "--seed",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path(), "trajectories.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# immunolearn trajectories v1"));
    assert_eq!(lines.next(), Some("time,all_ones_count,replicate"));
    assert_eq!(lines.next(), Some("0,0,0"));
    let summary: serde_json::Value = serde_json::from_str(&read(dir.path(), "summary.json")).unwrap();
    assert_eq!(summary["config"]["M"], 20);
    assert_eq!(summary["config"]["lambda_m"], 0.5);
    for (_, pred) in summary["predictions"].as_object().unwrap() {
        assert!(pred["formula_id"].is_string(), "{pred}");
    }
}

#[test]
fn echoed_config_replays_identically() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = run(&[
        "sample-steady",
        "--M",
        "10",
        "--N",
        "5",
        "--pd",
        "0.2",
        "--pm",
        "0.01",
        "--replicates",
        "50",
        "--seed",
        "9",
        "--out",
        a.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&first), 0);
    let summary = a.path().join("summary.json");
    let again = run(&["sample-steady", "--config", summary.to_str().unwrap(), "--out", b.path().to_str().unwrap()]);
    assert_eq!(code(&again), 0, "{}", String::from_utf8_lossy(&again.stderr));
    assert_eq!(read(a.path(), "summary.json"), read(b.path(), "summary.json"));
    assert_eq!(read(a.path(), "steady_draws.csv"), read(b.path(), "steady_draws.csv"));
}

#[test]
fn toml_config_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "model = \"single-column\"\nM = 4\nalpha = 1.0\np = 0.5\nseed = 1\n").unwrap();
    let out = run(&["analyze", "--config", cfg.to_str().unwrap(), "--M", "2", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["M"], 2);
    let mean = v["predictions"]["hitting_time_mean_exact"]["value"].as_f64().unwrap();
    assert!((mean - 10.0).abs() < 1e-12);
}

#[test]
fn invalid_configurations_exit_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "M = 4\ncolour = \"blue\"\n").unwrap();
    assert_eq!(code(&run(&["analyze", "--config", cfg.to_str().unwrap()])), 1);
    assert_eq!(code(&run(&["figure-data", "--replicates", "0"])), 1);
    assert_eq!(code(&run(&["simulate", "--replicates", "0"])), 1);
    assert_eq!(code(&run(&["analyze", "--p", "1.5"])), 1);
    assert_eq!(code(&run(&["analyze", "--pd", "0.1", "--p", "0.1"])), 1);
    assert_eq!(code(&run(&["simulate", "--no-such-flag"])), 1);
}

#[test]
fn io_failures_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let target = blocker.join("sub");
    assert_eq!(code(&run(&["analyze", "--out", target.to_str().unwrap()])), 2);
    assert_eq!(code(&run(&["analyze", "--config", dir.path().join("missing.toml").to_str().unwrap()])), 2);
}

#[test]
fn verify_small_passes() {
    let out = run(&["verify", "--small", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], true);
}

#[test]
fn figure_data_emits_both_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "figure-data",
        "--M",
        "20",
        "--N",
        "10",
        "--replicates",
        "5",
        "--grid-points",
        "11",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let curve = read(dir.path(), "count_vs_time.csv");
    // comment + header + 11 grid points for each of the two p_m values
    assert_eq!(curve.lines().count(), 2 + 22);
    let sweep = read(dir.path(), "transition_vs_pm.csv");
    assert_eq!(sweep.lines().count(), 2 + 61);
    assert!(sweep.lines().nth(2).unwrap().starts_with("0.0001,"));
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let dirs: Vec<_> = ["1", "3"]
        .iter()
        .map(|threads| {
            let dir = tempfile::tempdir().unwrap();
            let out = run(&[
                "figure-data",
                "--M",
                "24",
                "--N",
                "12",
                "--replicates",
                "16",
                "--grid-points",
                "9",
                "--seed",
                "2",
                "--threads",
                threads,
                "--out",
                dir.path().to_str().unwrap(),
            ]);
            assert_eq!(code(&out), 0);
            dir
        })
        .collect();
    for name in ["summary.json", "count_vs_time.csv", "transition_vs_pm.csv"] {
        assert_eq!(read(dirs[0].path(), name), read(dirs[1].path(), name), "{name}");
    }
}
