use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use bosonic_cert::certifier::{CertificationReport, Verdict};
use bosonic_cert::measurement::MeasurementRecord;
use serde_json::{json, Value};

fn run(config: &Value, out: &Path, extra: &[&str], env: &[(&str, &str)]) -> Output {
    let cfg = out.join("config.json");
    std::fs::create_dir_all(out).unwrap();
    std::fs::write(&cfg, serde_json::to_string_pretty(config).unwrap()).unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_certify"));
    cmd.arg("--config").arg(&cfg).arg("--out").arg(out).args(extra);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).unwrap_or_else(|_| panic!("stderr is not JSON: {}", String::from_utf8_lossy(&o.stderr)))
}

fn cat(alpha: f64) -> Value {
    json!({"alpha": [alpha, 0.0], "family": "two_component"})
}

fn certify_config(alpha: f64, eps: f64) -> Value {
    json!({
        "task": "certify",
        "state": {"family": {"kind": "cat", "params": cat(alpha)}},
        "witness": {"kind": "cat", "params": cat(alpha)},
        "epsilon": eps,
        "delta": 0.05,
        "seed": 5,
        "cutoff": 60
    })
}

#[test]
fn certify_accepts_exact_cat() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&certify_config(2.0, 0.1), dir.path(), &[], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let report: CertificationReport = serde_json::from_str(&text).unwrap();
    assert_eq!(report.verdict, Verdict::Accept);
    assert_eq!(report.seed, 5);
    let meta = read_json(&dir.path().join("metadata.json"));
    assert_eq!(meta["task"], "certify");
}

#[test]
fn identical_config_gives_identical_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = certify_config(1.0, 0.2);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(run(&cfg, &a, &[], &[]).status.code(), Some(0));
    assert_eq!(run(&cfg, &b, &[], &[("BOSONIC_THREADS", "2")]).status.code(), Some(0));
    let ra = std::fs::read(a.join("report.json")).unwrap();
    let rb = std::fs::read(b.join("report.json")).unwrap();
    assert_eq!(ra, rb);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&certify_config(1.0, 0.3), dir.path(), &["--seed", "41"], &[]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read_json(&dir.path().join("report.json"))["seed"], 41);
}

#[test]
fn zero_epsilon_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = certify_config(1.0, 0.1);
    cfg["epsilon"] = json!(0.0);
    let o = run(&cfg, dir.path(), &[], &[]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr_json(&o);
    assert_eq!(e["error"], "validation");
    assert_eq!(e["field"], "epsilon");
    assert!(!dir.path().join("report.json").exists());
}

#[test]
fn unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = certify_config(1.0, 0.1);
    cfg["epsilonn"] = json!(0.1);
    let o = run(&cfg, dir.path(), &[], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_json(&o)["message"].as_str().unwrap().contains("epsilonn"));
}

#[test]
fn bad_thread_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&certify_config(1.0, 0.3), dir.path(), &[], &[("BOSONIC_THREADS", "0")]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["field"], "BOSONIC_THREADS");
}

#[test]
fn complexity_without_gkp_is_squeezed_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "task": "complexity",
        "complexity": {"n_s": 2, "n_gkp": 0, "m": 1, "r": 0.6, "epsilon": 0.1, "delta": 0.05,
                       "sigma": [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]}
    });
    let o = run(&cfg, dir.path(), &[], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&dir.path().join("complexity.json"));
    // 33·ln(8/δ)/ε² · N_s²·e^{2r}·σ₂
    let want = 33.0 * (8.0f64 / 0.05).ln() / 0.01 * 4.0 * 1.2f64.exp() * 2.0;
    let total = r["resource"]["total"].as_f64().unwrap();
    assert!((total - want).abs() < 1e-9 * want, "{total} vs {want}");
    assert_eq!(r["resource"]["gkp_term"].as_f64().unwrap(), 0.0);
    assert_eq!(r["sigma_source"], "config");
}

#[test]
fn complexity_derives_oracle_moments() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "task": "complexity",
        "state": {"family": {"kind": "gaussian", "input": {"kind": "squeezed_vacuum", "r": 0.3, "axis": "momentum"}}},
        "witness": {"kind": "resource",
                    "graph": {"mode_kinds": ["squeezed_vacuum"]},
                    "resource": {"sigma": 0.3, "m": 1, "squeezing_r": 0.3}},
        "cutoff": 40,
        "complexity": {"n_s": 1, "n_gkp": 0, "m": 1, "r": 0.3, "epsilon": 0.1, "delta": 0.1, "sigma": []}
    });
    let o = run(&cfg, dir.path(), &[], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&dir.path().join("complexity.json"));
    assert_eq!(r["sigma_source"], "oracle");
    assert_eq!(r["params"]["sigma"].as_array().unwrap().len(), 6);
    assert!(r["resource"]["total"].as_f64().unwrap() > 0.0);
}

#[test]
fn witness_report_cat_settings_and_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "task": "witness_report",
        "witness": {"kind": "cat", "params": cat(2.0)},
        "certify": {"strategy": "homodyne"}
    });
    assert_eq!(run(&cfg, dir.path(), &[], &[]).status.code(), Some(0));
    let r = read_json(&dir.path().join("witness.json"));
    let mut angles: Vec<f64> = r["decomposition"]["settings"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["angles"][0].as_f64().unwrap())
        .collect();
    angles.sort_by(f64::total_cmp);
    let want = [-PI / 4.0, 0.0, PI / 4.0, PI / 2.0];
    assert_eq!(angles.len(), 4);
    for (a, b) in angles.iter().zip(want) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!(r["spectrum"]["max_eigenvalue"].as_f64().unwrap() <= 1.0 + 1e-6);
    assert_eq!(r["spectrum"]["code_eigenspace_dimension"], 2);
}

#[test]
fn witness_report_gkp_spectrum_bounded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "task": "witness_report",
        "witness": {"kind": "gkp_plus", "params": {"sigma": 0.3, "m": 1, "logical": "plus"}},
        "cutoff": 80
    });
    assert_eq!(run(&cfg, dir.path(), &[], &[]).status.code(), Some(0));
    let r = read_json(&dir.path().join("witness.json"));
    assert!(r["spectrum"]["max_eigenvalue"].as_f64().unwrap() <= 1.0 + 1e-6);
}

#[test]
fn witness_report_resource_term_bound() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "task": "witness_report",
        "witness": {"kind": "resource",
                    "graph": {"mode_kinds": ["squeezed_vacuum", "gkp_plus", "squeezed_vacuum"], "edges": [[0, 1], [1, 2]]},
                    "resource": {"sigma": 0.3, "m": 1, "squeezing_r": 0.6}}
    });
    assert_eq!(run(&cfg, dir.path(), &[], &[]).status.code(), Some(0));
    let r = read_json(&dir.path().join("witness.json"));
    let bound = r["term_bound"].as_f64().unwrap();
    assert_eq!(bound, 5f64.powi(6));
    assert!(r["normal_ordered_terms"].as_f64().unwrap() <= bound);
    assert!(r["spectrum"].is_null());
}

#[test]
fn sample_dump_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "task": "sample_dump",
        "state": {"family": {"kind": "cat", "params": cat(1.5)}, "loss": 0.9},
        "cutoff": 40,
        "seed": 3,
        "sample": {"measurement": {"kind": "homodyne", "angles": [0.3]}, "shots": 5000, "bin_width": 0.1}
    });
    assert_eq!(run(&cfg, dir.path(), &[], &[]).status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("samples.csv")).unwrap();
    let rec = MeasurementRecord::read_csv(text.as_bytes()).unwrap();
    assert_eq!(rec.shots, 5000);
    assert_eq!(rec.seed, 3);
    let mut hist = csv::Reader::from_path(dir.path().join("histogram.csv")).unwrap();
    assert_eq!(hist.headers().unwrap(), vec!["bin_left", "count"]);
    let total: u64 = hist.records().map(|r| r.unwrap()[1].parse::<u64>().unwrap()).sum();
    assert_eq!(total, 5000);
}

#[test]
fn truncation_guard_trips_and_can_be_overridden() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "task": "sample_dump",
        "state": {"family": {"kind": "cat", "params": cat(3.0)}},
        "cutoff": 12,
        "sample": {"measurement": {"kind": "parity"}, "shots": 100}
    });
    let o = run(&cfg, &dir.path().join("strict"), &[], &[]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_json(&o)["error"], "resource");
    let o = run(&cfg, &dir.path().join("override"), &["--override-truncation-guard"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}
