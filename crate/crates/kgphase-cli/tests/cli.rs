use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kgphase(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kgphase")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = kgphase(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn small_state(dir: &Path, name: &str, extra: &[&str]) -> String {
    let path = dir.join(name).to_str().unwrap().to_string();
    let mut args = vec!["gaussian", "--n", "128", "--p-max", "8", "-o", &path];
    args.extend_from_slice(extra);
    ok(&args);
    path
}

#[test]
fn gaussian_state_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = small_state(dir.path(), "s.json", &["--sigma2", "0.5", "--charge", "-1", "--p0", "0.3"]);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["format_version"], 1);
    assert_eq!(v["grid"]["n"], 128);
    assert_eq!(v["representation"], "fv");
    assert_eq!(v["psi_minus"].as_array().unwrap().len(), 128);
    assert!(v["psi_plus"].as_array().unwrap().iter().all(|z| z[0] == 0.0 && z[1] == 0.0));
    let check = json(&ok(&["check", &path]));
    assert_eq!(check["pass"], true);
    assert!((check["charge_norm"].as_f64().unwrap() + 1.0).abs() < 1e-10);
}

#[test]
fn default_grid_is_applied() {
    let v: Value = serde_json::from_slice(&ok(&["gaussian", "--sigma2", "1.0", "--charge", "+1"]).stdout).unwrap();
    assert_eq!(v["grid"]["n"], 1024);
    assert_eq!(v["grid"]["p_max"], 16.0);
}

#[test]
fn validation_errors_exit_2_on_one_line() {
    let out = kgphase(&["gaussian", "--sigma2", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("error[invalid-argument]") && err.contains("sigma2"), "{err}");

    let out = kgphase(&["gaussian", "--sigma2", "1", "--n", "127"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("error[invalid-grid]"));

    let out = kgphase(&["gaussian", "--sigma2", "1", "--charge", "2"]);
    assert_eq!(out.status.code(), Some(2));

    let out = kgphase(&["check", "/nonexistent/state.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("error[io]"));
}

#[test]
fn invalid_state_files_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = small_state(dir.path(), "s.json", &["--sigma2", "0.5"]);
    // a non-decaying tail makes the state invalid, not a contract failure
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    v["psi_plus"][0][0] = Value::from(1e-3);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, v.to_string()).unwrap();
    assert_eq!(kgphase(&["check", bad.to_str().unwrap()]).status.code(), Some(2));
    let out = kgphase(&["moments", bad.to_str().unwrap(), "--n", "2"]);
    assert_eq!(out.status.code(), Some(2));
    // the purity criterion has nothing to probe for an empty odd part, which
    // is reported as null rather than failing
    let p = json(&ok(&["purity", &path]));
    assert!(p["criterion_odd_max_residual"].is_null());
}

#[test]
fn evolve_round_trip_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let path = small_state(dir.path(), "s.json", &["--sigma2", "0.5", "--q0", "-1"]);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    ok(&["evolve", &path, "--t", "1.5", "-o", a.to_str().unwrap()]);
    ok(&["evolve", &path, "--t", "1.5", "-o", b.to_str().unwrap()]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let back = dir.path().join("back.json");
    ok(&["evolve", a.to_str().unwrap(), "--t", "-1.5", "-o", back.to_str().unwrap()]);
    let v0: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let v1: Value = serde_json::from_str(&std::fs::read_to_string(&back).unwrap()).unwrap();
    let d = v0["psi_plus"]
        .as_array()
        .unwrap()
        .iter()
        .zip(v1["psi_plus"].as_array().unwrap())
        .map(|(x, y)| (x[0].as_f64().unwrap() - y[0].as_f64().unwrap()).abs() + (x[1].as_f64().unwrap() - y[1].as_f64().unwrap()).abs())
        .fold(0.0, f64::max);
    assert!(d < 1e-14);
}

#[test]
fn moments_report() {
    let v = json(&ok(&["moments", "--n", "2", &small_state(tempfile::tempdir().unwrap().path(), "s.json", &["--sigma2", "0.5"])]));
    assert_eq!(v["order"], 2);
    let usual = v["second_moment_usual_term"].as_f64().unwrap();
    let corr = v["second_moment_correction_term"].as_f64().unwrap();
    assert!((usual - 0.5).abs() < 1e-10);
    assert!((v["formula"].as_f64().unwrap() - (usual - corr)).abs() < 1e-10);
    assert!((v["grid"].as_f64().unwrap() - v["formula"].as_f64().unwrap()).abs() < 1e-6 * 0.5);
}

#[test]
fn wigner_csv_and_purity_from_it() {
    let dir = tempfile::tempdir().unwrap();
    let path = small_state(dir.path(), "s.json", &["--sigma2", "0.5", "--p0", "0.2"]);
    let csv = dir.path().join("w.csv");
    ok(&["wigner", &path, "-o", csv.to_str().unwrap()]);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# grid n=128"));
    assert!(lines.next().unwrap().starts_with("# state_sha256 "));
    assert_eq!(lines.next().unwrap(), "# stride 1");
    assert_eq!(lines.next().unwrap(), "p,q,w_pp,w_mm,re_w_pm,im_w_pm");
    assert_eq!(lines.count(), 128 * 128);

    let from_csv = json(&ok(&["purity", csv.to_str().unwrap()]));
    let from_state = json(&ok(&["purity", &path]));
    let r = from_csv["ratio"].as_f64().unwrap();
    assert!((r - 1.0).abs() < 1e-8, "{r}");
    assert!((r - from_state["ratio"].as_f64().unwrap()).abs() < 1e-12);

    let strided = ok(&["wigner", &path, "--stride", "4"]).stdout;
    let body = String::from_utf8(strided).unwrap();
    assert_eq!(body.lines().filter(|l| !l.starts_with('#')).count(), 1 + 32 * 32);
    let sparse = dir.path().join("sparse.csv");
    std::fs::write(&sparse, body).unwrap();
    assert_eq!(kgphase(&["purity", sparse.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn fig2_curve_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    ok(&["fig2", "--sigma2-min", "0.0001", "--sigma2-max", "16", "--points", "60", "-o", out.to_str().unwrap()]);
    let text = std::fs::read_to_string(&out).unwrap();
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "sigma_p,dx2_usual,dx2_corrected,reference_dx2");
    assert_eq!(data.len(), 61);
    assert!(text.contains("# threshold_sigma_p 2.76307"));
    let again = ok(&["fig2", "--sigma2-min", "0.0001", "--sigma2-max", "16", "--points", "60"]).stdout;
    assert_eq!(again, std::fs::read(&out).unwrap());
    assert_eq!(kgphase(&["fig2", "--sigma2-min", "2", "--sigma2-max", "1"]).status.code(), Some(2));
}
