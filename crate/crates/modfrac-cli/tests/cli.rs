use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn modfrac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modfrac"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,re,im,err"));
    lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect())
        .collect()
}

#[test]
fn cusp_class_at_level_49() {
    let v = json(&modfrac(&["group", "cusp-class", "--group", "gamma0:49", "--cusp", "1/7"]));
    assert_eq!(v["infinity_class"], false);
    assert_eq!(v["class"], "1/7");
    let v = json(&modfrac(&["group", "normalizer", "--n", "45"]));
    assert_eq!(v["transitive"], true);
    let v = json(&modfrac(&["group", "normalizer", "--n", "49"]));
    assert_eq!(v["transitive"], false);
    let v = json(&modfrac(&["group", "atkin-lehner", "--n", "45", "--q", "9"]));
    assert_eq!(v["det"], 9);
    assert_eq!(v["shape_ok"], true);
}

#[test]
fn afe_report_schema() {
    let v = json(&modfrac(&["afe", "--form", "theta", "--alpha", "1", "--x0", "0/1"]));
    for k in ["A_hat", "B_hat", "slope", "threshold", "pass"] {
        assert!(v.get(k).is_some(), "missing {k}");
    }
    assert_eq!(v["pass"], true);
    let b = v["B_hat"][0].as_f64().unwrap();
    assert!((b - 1.0).abs() < 1e-2, "{b}");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("afe.json");
    let out = modfrac(&[
        "afe",
        "--form",
        "delta",
        "--alpha",
        "11",
        "--x0",
        "0",
        "--mode",
        "eichler",
        "--report",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
}

#[test]
fn holder_golden() {
    let v = json(&modfrac(&["holder", "--form", "theta", "--alpha", "1", "--point", "golden"]));
    assert_eq!(v["point"], "golden");
    assert_eq!(v["theory"]["beta"], 0.75);
    assert_eq!(v["theory"]["beta_star"], 0.75);
    assert_eq!(v["theory"]["beta_star_star"], 0.5);
    let b = v["estimate"]["beta_hat"].as_f64().unwrap();
    assert!((b - 0.75).abs() <= 0.15);
    assert_eq!(v["pass"], true);
    // decimals carry no tau_x: theory is withheld, the estimate still runs
    let v = json(&modfrac(&["holder", "--form", "theta", "--alpha", "1", "--point", "0.3"]));
    assert!(v["theory"].is_null());
    assert!(v["pass"].is_null());
    let v = json(&modfrac(&["holder", "--form", "theta", "--alpha", "1", "--point", "1/2"]));
    assert_eq!(v["differentiability"]["NotDifferentiable"].is_object(), true);
}

#[test]
fn spectrum_and_coefficients() {
    let v = json(&modfrac(&["spectrum", "--form", "theta", "--alpha", "1"]));
    let seg = &v["spectrum"]["segments"][0];
    assert_eq!(seg["lo"], 0.5);
    assert_eq!(seg["hi"], 0.75);
    assert_eq!(seg["slope"], 4.0);
    assert_eq!(seg["intercept"], -2.0);
    let v = json(&modfrac(&["coeffs", "--form", "delta", "--n", "4"]));
    let c: Vec<f64> = v["terms"].as_array().unwrap().iter().map(|t| t["coef"][0].as_f64().unwrap()).collect();
    assert_eq!(&c[..3], &[1.0, -24.0, 252.0]);
    assert_eq!(v["terms"][0]["freq"], 1.0);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&modfrac(&["verify", "nonexistent"])), 2);
    assert_eq!(code(&modfrac(&["eval", "--form", "theta", "--alpha", "1", "--grid", "0:1:0"])), 2);
    assert_eq!(code(&modfrac(&["eval", "--form", "theta", "--alpha", "0.3", "--x", "0.5"])), 3);
    assert_eq!(code(&modfrac(&["eval", "--form", "nosuchform", "--alpha", "1", "--x", "0.5"])), 3);
    assert_eq!(code(&modfrac(&["coeffs", "--fetch", "11.2.a.a", "--offline"])), 3);
    assert_eq!(code(&modfrac(&["plotdata", "--points", "0", "--out", "/tmp/never"])), 2);
    assert_eq!(code(&modfrac(&["plotdata", "--only", "nothing", "--out", "/tmp/never"])), 2);
    assert_eq!(code(&modfrac(&["eval", "--alpha", "1", "--x", "0.5"])), 2);
}

#[test]
fn verify_group_suite() {
    let v = json(&modfrac(&["verify", "group"]));
    assert_eq!(v["pass"], true);
    let names: Vec<&str> = v["criteria"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.iter().any(|n| n.contains("normalizer")));
}

#[test]
fn eval_riemann_value_and_precision() {
    let out = modfrac(&["eval", "--form", "theta", "--alpha", "1", "--x", "1/2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    // 17 significant digits: one leading digit and 16 after the point
    let mantissa = row[2].split('e').next().unwrap();
    assert_eq!(mantissa.len(), 18, "{}", row[2]);
    let im: f64 = row[2].parse().unwrap();
    assert!((im / 2.0 - std::f64::consts::PI.powi(2) / 8.0).abs() < 1e-8);
}

#[test]
fn output_is_independent_of_thread_count() {
    let args = |t: &'static str| ["--threads", t, "eval", "--form", "theta", "--alpha", "1", "--grid", "0:1:17"];
    let one = modfrac(&args("1"));
    let again = modfrac(&args("1"));
    let four = modfrac(&args("4"));
    assert!(one.status.success());
    assert_eq!(one.stdout, again.stdout);
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"form": "delta", "alpha": 7, "grid": {"start": 0, "end": 0.5, "points": 3}}"#).unwrap();
    let out = modfrac(&["--config", cfg.to_str().unwrap(), "eval"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 4);
    std::fs::write(&cfg, r#"{"grid": {"start": 0, "end": 1, "points": 0}}"#).unwrap();
    assert_eq!(code(&modfrac(&["--config", cfg.to_str().unwrap(), "eval"])), 2);
}

#[test]
fn plotdata_riemann_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out = modfrac(&["plotdata", "--only", "riemann", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.path().join("riemann.csv"));
    assert_eq!(rows.len(), 4096);
    assert_eq!(rows[0][0], 0.0);
    assert_eq!(rows[4095][0], 2.0);
    // phi = Im / 2 is odd about 1 and vanishes at 0, 1 and 2
    assert!(rows[0][2].abs() < 1e-10 && rows[4095][2].abs() < 1e-8);
    let m: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["figures"][0]["name"], "riemann");
    assert_eq!(m["files"][0]["rows"], 4096);
}

#[test]
fn plotdata_newform_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = modfrac(&["plotdata", "--only", "level14,level45,level49,patterns", "--points", "24", "--out", d]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in [
        "level14.csv",
        "level14_detail_1_2.csv",
        "level45.csv",
        "level45_detail_1_3.csv",
        "level45_conjugate.csv",
        "level49.csv",
        "level49_detail_1_7.csv",
        "pattern_theta.csv",
        "pattern_theta2.csv",
    ] {
        let rows = csv_rows(&dir.path().join(f));
        assert_eq!(rows.len(), 24, "{f}");
        assert!(rows.iter().all(|r| r.iter().all(|v| v.is_finite())), "{f}");
    }
    let first = std::fs::read(dir.path().join("level45_conjugate.csv")).unwrap();
    let out = modfrac(&["plotdata", "--only", "level45", "--points", "24", "--out", d]);
    assert!(out.status.success());
    assert_eq!(std::fs::read(dir.path().join("level45_conjugate.csv")).unwrap(), first);
}
