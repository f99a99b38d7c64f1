use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn npivq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_npivq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

/// Deterministic pseudo-data with some dependence between x and w.
fn write_data(dir: &Path, n: usize, zero_y: bool) -> PathBuf {
    let mut text = String::from("y,x,w\n");
    let mut state = 12345u64;
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    for _ in 0..n {
        let w = next();
        let x = 0.6 * w + 0.4 * next();
        let y = if zero_y {
            0.0
        } else {
            (3.0 * x).cos() + 0.3 * (next() - 0.5)
        };
        text.push_str(&format!("{y},{},{}\n", 2.0 * x - 1.0, 10.0 * w));
    }
    let path = dir.join(format!("d{n}_{zero_y}.csv"));
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn estimate_reports_fields() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path(), 400, false);
    let v = json_of(&npivq(&[
        "estimate",
        "--data",
        data.to_str().unwrap(),
        "--basis",
        "cosine",
        "--j",
        "4",
    ]));
    for key in ["f_loo", "f_plugin", "j", "k", "tau_hat", "v_hat", "n", "rescaling", "tolerances"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert!(v["f_loo"].is_f64());
    assert_eq!(v["n"], 400);
    assert_eq!(v["k"], 4);
    assert_eq!(v["tool"]["name"], "npivq");
    assert!(v["tool"]["version"].is_string());
    assert!((v["rescaling"]["w"]["max"].as_f64().unwrap() - 10.0).abs() < 0.1);
}

#[test]
fn zero_response_gives_zero() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path(), 200, true);
    let v = json_of(&npivq(&["estimate", "--data", data.to_str().unwrap(), "--j", "3"]));
    assert_eq!(v["f_loo"].as_f64().unwrap(), 0.0);
}

#[test]
fn nan_row_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "y,x,w\n1,0.1,0.2\n2,NaN,0.4\n3,0.5,0.9\n").unwrap();
    let out = npivq(&["estimate", "--data", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("row 2"), "{err}");
}

#[test]
fn missing_header_column_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "y,x,z\n1,0.1,0.2\n").unwrap();
    let out = npivq(&["estimate", "--data", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn adapt_reports_candidates_and_thresholds() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path(), 500, false);
    let v = json_of(&npivq(&["adapt", "--data", data.to_str().unwrap(), "--c0", "0.5"]));
    assert!(v["j_hat"].is_u64());
    let cands = v["result"]["candidate_set"]["candidates"].as_array().unwrap();
    assert!(!cands.is_empty());
    let table = v["result"]["thresholds"].as_array().unwrap();
    assert_eq!(table.len(), cands.len());
    let j_hat = v["j_hat"].as_u64().unwrap();
    assert!(j_hat >= v["j_min"].as_u64().unwrap());
    assert!(j_hat <= v["j_max_hat"].as_u64().unwrap());
}

#[test]
fn adapt_with_zero_c0_selects_largest() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path(), 500, false);
    let v = json_of(&npivq(&["adapt", "--data", data.to_str().unwrap(), "--c0", "0"]));
    assert_eq!(v["j_hat"], v["j_max_hat"]);
}

#[test]
fn adapt_needs_sixteen_rows() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path(), 12, false);
    let out = npivq(&["adapt", "--data", data.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tabulated_weight_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path(), 300, false);
    let weight = dir.path().join("mu.csv");
    fs::write(&weight, "x,mu\n0,1\n0.5,2\n1,1\n").unwrap();
    let spec = format!("file:{}", weight.display());
    let v = json_of(&npivq(&[
        "estimate",
        "--data",
        data.to_str().unwrap(),
        "--j",
        "3",
        "--weight",
        &spec,
    ]));
    let flat = json_of(&npivq(&["estimate", "--data", data.to_str().unwrap(), "--j", "3"]));
    assert_ne!(v["f_plugin"], flat["f_plugin"]);
    let out = npivq(&["estimate", "--data", data.to_str().unwrap(), "--weight", "gauss"]);
    assert_eq!(out.status.code(), Some(2));
}

/// The shipped file with a small grid and two replications.
fn shrunk_config(dir: &Path, name: &str, replications: &str) -> PathBuf {
    let text = fs::read_to_string(shipped(name)).unwrap();
    let mut out = String::new();
    for line in text.lines() {
        if line.starts_with("sample_sizes") {
            out.push_str("sample_sizes = [200, 400, 800]\n");
        } else if line.starts_with("replications") {
            out.push_str(&format!("replications = {replications}\n"));
        } else {
            out.push_str(line);
            out.push('\n');
        }
    }
    let path = dir.join(name);
    fs::write(&path, out).unwrap();
    path
}

#[test]
fn rates_reports_theoretical_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = shrunk_config(dir.path(), "mild_irregular.cfg", "2");
    let out_dir = dir.path().join("out");
    let out = npivq(&[
        "rates",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("rates.json")).unwrap()).unwrap();
    let e = v["theoretical_exponent"].as_f64().unwrap();
    assert!((e - 0.307_692_307_692).abs() < 1e-9);
    for key in ["slope", "stderr", "theorem31_pass_rate", "seed", "config", "tool"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let plot = fs::read_to_string(out_dir.join("rates_plot.csv")).unwrap();
    assert!(plot.starts_with("estimator,n,rmse\n"));
    assert_eq!(plot.lines().count(), 1 + 2 * 3);
}

#[test]
fn single_replication_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = shrunk_config(dir.path(), "mild_irregular.cfg", "1");
    let out = npivq(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("experiment.replications"));
}

#[test]
fn bad_key_reports_path() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(shipped("severe.cfg"))
        .unwrap()
        .replace("c0 = 0.5", "c0 = \"half\"");
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, text).unwrap();
    let out = npivq(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tuning.c0"));
}

#[test]
fn simulate_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = shrunk_config(dir.path(), "severe.cfg", "2");
    let run = |sub: &str, threads: &str| {
        let out_dir = dir.path().join(format!("{sub}{threads}"));
        let out = npivq(&[
            sub,
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--seed",
            "77",
            "--threads",
            threads,
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out_dir
    };
    let a = run("simulate", "1");
    let b = run("simulate", "2");
    let ca = fs::read(a.join("results.csv")).unwrap();
    assert_eq!(ca, fs::read(b.join("results.csv")).unwrap());
    let header = String::from_utf8_lossy(&ca);
    assert!(header.starts_with("n,rep,estimator,estimate,j_used,tau_hat,wall_ms,status\n"));
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 77);
}
