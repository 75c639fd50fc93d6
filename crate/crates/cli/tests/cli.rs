// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn seedbs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seedbs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_series(dir: &TempDir, name: &str, values: impl IntoIterator<Item = f64>) -> String {
    let path = dir.path().join(name);
    let text: String = values.into_iter().map(|v| format!("{v}\n")).collect();
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn teeth_file(dir: &TempDir) -> String {
    write_series(dir, "teeth.txt", (0..1000).map(|i| ((i / 5) % 2) as f64))
}

fn json(o: &Output) -> Value {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    serde_json::from_str(&stdout(o)).unwrap()
}

fn without_runtime(csv: &str) -> Vec<String> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let mut f: Vec<&str> = l.split(',').collect();
            f.remove(5);
            f.join(",")
        })
        .collect()
}

#[test]
fn detect_noiseless_teeth() {
    let dir = TempDir::new().unwrap();
    let r = json(&seedbs(&["detect", &teeth_file(&dir)]));
    let keys: Vec<&str> = r.as_object().unwrap().keys().map(String::as_str).collect();
    let mut expected = vec![
        "n",
        "sigma_hat",
        "method",
        "threshold_or_criterion",
        "change_points",
        "runtime_ms",
    ];
    expected.sort_unstable();
    let mut keys_sorted = keys.clone();
    keys_sorted.sort_unstable();
    assert_eq!(keys_sorted, expected);
    assert_eq!(r["n"], 1000);
    let cpts: Vec<u64> = r["change_points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .collect();
    assert_eq!(cpts, (1..200).map(|k| 5 * k).collect::<Vec<_>>());
}

#[test]
fn detect_constant_file() {
    let dir = TempDir::new().unwrap();
    let f = write_series(&dir, "flat.txt", std::iter::repeat_n(2.5, 50));
    let r = json(&seedbs(&["detect", &f]));
    assert_eq!(r["change_points"].as_array().unwrap().len(), 0);
}

#[test]
fn detect_not_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let noisy =
        (0..400).map(|i| ((i / 40) % 2) as f64 + 0.3 * ((i * 7919 % 101) as f64 / 101.0 - 0.5));
    let f = write_series(&dir, "noisy.txt", noisy);
    let run = || {
        let mut r = json(&seedbs(&["detect", &f, "--selection", "not"]));
        r.as_object_mut().unwrap().remove("runtime_ms");
        r.to_string()
    };
    assert_eq!(run(), run());
}

#[test]
fn detect_flags_reach_the_detector() {
    let dir = TempDir::new().unwrap();
    let f = teeth_file(&dir);
    let r = json(&seedbs(&[
        "detect",
        &f,
        "--selection",
        "aseedbs",
        "--noise-method",
        "jfnl_lag(2,4)",
        "--decay",
        "1.2",
        "--C",
        "2",
    ]));
    assert_eq!(r["method"], "aseedbs_threshold_jfnl_lag(2,4)");
    let r = json(&seedbs(&[
        "detect",
        &f,
        "--selection",
        "wbs",
        "-M",
        "500",
        "--seed",
        "4",
    ]));
    assert_eq!(r["method"], "wbs_threshold_jfnl");
    let r = json(&seedbs(&["detect", &f, "--model-sel", "bic_unknown"]));
    assert_eq!(r["change_points"].as_array().unwrap().len(), 199);
}

#[test]
fn config_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let f = teeth_file(&dir);
    for args in [
        vec!["detect", f.as_str(), "--selection", "wbs"],
        vec!["detect", f.as_str(), "--seed", "3"],
        vec!["detect", f.as_str(), "--selection", "bogus"],
        vec!["detect", f.as_str(), "--decay", "3"],
        vec![
            "detect",
            f.as_str(),
            "--selection",
            "not",
            "--model-sel",
            "bic_known",
        ],
        vec!["simulate", "--methods", "nope_thr_jfnl", "--reps", "1"],
        vec!["simulate", "--scenario", "no.such.signal", "--reps", "1"],
        vec!["bench", "--t-list", "2"],
    ] {
        let o = seedbs(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn input_errors_exit_3() {
    let dir = TempDir::new().unwrap();
    let garbage = dir.path().join("bad.txt");
    fs::write(&garbage, "x\n1\nnot-a-number\n").unwrap();
    let two = write_series(&dir, "two.txt", [1.0, 2.0]);
    let bad_spec = dir.path().join("spec.json");
    fs::write(&bad_spec, "{\"T\": 10, \"change_points\": [5]}").unwrap();
    for args in [
        vec!["detect", "/definitely/missing.txt"],
        vec!["detect", garbage.to_str().unwrap()],
        vec!["detect", two.as_str()],
        vec!["noise", garbage.to_str().unwrap()],
        vec![
            "simulate",
            "--scenario",
            bad_spec.to_str().unwrap(),
            "--reps",
            "1",
        ],
    ] {
        let o = seedbs(&args);
        assert_eq!(o.status.code(), Some(3), "{args:?}");
    }
}

#[test]
fn noise_lists_every_estimator() {
    let dir = TempDir::new().unwrap();
    let r = json(&seedbs(&["noise", &teeth_file(&dir)]));
    assert_eq!(r["n"], 1000);
    let methods: Vec<&str> = r["estimates"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["method"].as_str().unwrap())
        .collect();
    assert_eq!(
        methods,
        ["jfnl", "jfnl_tilde", "jfnl_lag", "mad", "ensemble"]
    );
}

#[test]
fn simulate_noiseless_single_rep() {
    let o = seedbs(&["simulate", "--sigma", "0", "--reps", "1"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mut lines = out.lines();
    assert!(lines.next().unwrap().starts_with("# config: {"));
    assert_eq!(
        lines.next().unwrap(),
        "replication,method,sigma_true,sigma_hat,n_detected,runtime_ms,seed"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[1], "seedbs_thr_jfnl");
    assert_eq!(row[4], "199");
    assert!(lines.next().is_none());
}

#[test]
fn simulate_is_reproducible_and_worker_independent() {
    let args = |w: &'static str| {
        vec![
            "simulate",
            "--sigma",
            "0.3,0.45",
            "--reps",
            "4",
            "--methods",
            "seedbs_thr_jfnl,not_thr_mad,wbs_thr_jfnl",
            "--wbs-draws",
            "300",
            "--base-seed",
            "11",
            "--workers",
            w,
        ]
    };
    let a = stdout(&seedbs(&args("1")));
    let b = stdout(&seedbs(&args("1")));
    let c = stdout(&seedbs(&args("4")));
    assert_eq!(without_runtime(&a), without_runtime(&b));
    let mut rows_a = without_runtime(&a);
    let mut rows_c = without_runtime(&c);
    rows_a.sort();
    rows_c.sort();
    assert_eq!(rows_a, rows_c);
    assert_eq!(rows_a.len(), 1 + 2 * 4 * 3);
}

#[test]
fn simulate_from_spec_file_with_summary() {
    let dir = TempDir::new().unwrap();
    let spec = dir.path().join("signal.json");
    fs::write(
        &spec,
        r#"{"T": 300, "change_points": [100, 200], "means": [0, 3, 0], "name": "bumps"}"#,
    )
    .unwrap();
    let summary = dir.path().join("summary.json");
    let o = seedbs(&[
        "simulate",
        "--scenario",
        spec.to_str().unwrap(),
        "--sigma",
        "0.5",
        "--reps",
        "10",
        "--methods",
        "seedbs_thr1.3_jfnl",
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s: Value = serde_json::from_str(&fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(s["true_change_points"], 2);
    assert_eq!(s["summary"][0]["reps"], 10);
    assert_eq!(s["summary"][0]["n_detected"]["median"], 2.0);
    assert_eq!(s["config"]["reps"], 10);
}

#[test]
fn simulate_json_report() {
    let r = json(&seedbs(&[
        "simulate",
        "--reps",
        "2",
        "--json",
        "--scenario",
        "stairs10",
    ]));
    assert_eq!(r["rows"].as_array().unwrap().len(), 2);
    assert_eq!(r["true_change_points"], 49);
}

#[test]
fn bench_csv() {
    let o = seedbs(&["bench", "--t-list", "1024,2048,4096", "--repeats", "2"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let rows: Vec<Vec<f64>> = out
        .lines()
        .skip_while(|l| l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert!(out.contains("T,intervals,total_length,median_ms,min_ms"));
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][1], 3483.0);
    for w in rows.windows(2) {
        assert!(w[1][1] / w[0][1] <= 2.5);
    }
}

#[test]
fn help_lists_subcommands() {
    let o = seedbs(&["--help"]);
    let text = stdout(&o);
    for sub in ["detect", "noise", "simulate", "bench"] {
        assert!(text.contains(sub));
    }
    assert!(Path::new(env!("CARGO_BIN_EXE_seedbs")).exists());
}

#[test]
fn simulate_extreme_teeth_median_near_truth() {
    let dir = TempDir::new().unwrap();
    let summary = dir.path().join("s.json");
    let o = seedbs(&[
        "simulate",
        "--reps",
        "100",
        "--base-seed",
        "3",
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let s: Value = serde_json::from_str(&fs::read_to_string(&summary).unwrap()).unwrap();
    let median = s["summary"][0]["n_detected"]["median"].as_f64().unwrap();
    assert!((179.0..=219.0).contains(&median), "median {median}");
}
