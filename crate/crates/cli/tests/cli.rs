use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_steplike-ist"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn json_file(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stdout_json(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn error_code(o: &Output) -> String {
    let err = String::from_utf8_lossy(&o.stderr);
    let line = err.lines().rev().find(|l| l.starts_with('{')).expect("json error line");
    let v: Value = serde_json::from_str(line).unwrap();
    v["error"]["code"].as_str().unwrap().to_string()
}

const SOLITON: &str = r#"{"c_minus": 0, "c_plus": 0, "kind": "sech2"}"#;
const STEP: &str = r#"{"c_minus": 0, "c_plus": 1, "kind": "step"}"#;
const FREE: &str = r#"{"c_minus": 0, "c_plus": 0, "kind": "free"}"#;

#[test]
fn direct_free_potential() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "free.json", FREE);
    let s = stdout_json(&run(&["direct", "free.json", "--out", "o"], dir.path()));
    assert_eq!(s["eigenvalues"].as_array().unwrap().len(), 0);
    assert_eq!(s["resonant"], Value::Bool(true));
    let data = json_file(&dir.path().join("o/scattering.json"));
    for key in ["R_plus", "R_minus"] {
        for sample in data[key].as_array().unwrap() {
            assert!(sample["re"].as_f64().unwrap().abs() < 1e-12 && sample["im"].as_f64().unwrap().abs() < 1e-12);
        }
    }
}

#[test]
fn direct_soliton_and_step() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "sol.json", SOLITON);
    write(dir.path(), "step.json", STEP);
    let s = stdout_json(&run(&["direct", "sol.json", "--out", "sol"], dir.path()));
    let e = &s["eigenvalues"][0];
    assert!((e["lambda_j"].as_f64().unwrap() + 1.0).abs() < 1e-8);
    assert!((e["gamma_plus"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert!((e["gamma_minus"].as_f64().unwrap() - 2.0).abs() < 1e-6);

    let s = stdout_json(&run(&["direct", "step.json", "--out", "step"], dir.path()));
    assert_eq!(s["resonant"], Value::Bool(false));
    let data = json_file(&dir.path().join("step/scattering.json"));
    let samples = data["R_minus"].as_array().unwrap();
    assert!(samples.len() > 100);
    for sample in samples.iter().filter(|v| v["lambda"].as_f64().unwrap() > 1.0) {
        let l = sample["lambda"].as_f64().unwrap();
        let (km, kp) = (l.sqrt(), (l - 1.0).sqrt());
        let exact = (km - kp) / (km + kp);
        assert!((sample["re"].as_f64().unwrap() - exact).abs() < 1e-8, "λ = {l}");
        assert!(sample["im"].as_f64().unwrap().abs() < 1e-8);
    }
}

#[test]
fn inverse_gates_on_checker_and_force_reports_inconsistency() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "sol.json", SOLITON);
    assert!(run(&["direct", "sol.json", "--out", "d"], dir.path()).status.success());
    let s = stdout_json(&run(&["inverse", "d/scattering.json", "--out", "good"], dir.path()));
    assert_eq!(s["consistency"]["pass"], Value::Bool(true));
    let rec = std::fs::read_to_string(dir.path().join("good/potential.csv")).unwrap();
    for line in rec.lines().skip(1) {
        let mut it = line.split(',').map(|v| v.parse::<f64>().unwrap());
        let (x, q) = (it.next().unwrap(), it.next().unwrap());
        if x.abs() <= 5.0 {
            assert!((q + 2.0 / x.cosh().powi(2)).abs() < 1e-3, "x = {x}");
        }
    }

    let mut data = json_file(&dir.path().join("d/scattering.json"));
    let g = data["eigenvalues"][0]["gamma_plus"].as_f64().unwrap();
    data["eigenvalues"][0]["gamma_plus"] = Value::from(1.1 * g);
    write(dir.path(), "bad.json", &data.to_string());

    let o = run(&["inverse", "bad.json", "--out", "bad"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_code(&o), "checker_failed");
    assert!(!dir.path().join("bad/potential.csv").exists());

    let o = run(&["inverse", "bad.json", "--out", "forced", "--force"], dir.path());
    let s = stdout_json(&o);
    assert_eq!(s["consistency"]["pass"], Value::Bool(false));
    assert!(String::from_utf8_lossy(&o.stderr).contains("CONSISTENCY FAIL"));
    assert!(dir.path().join("forced/recovery.csv").exists());
}

#[test]
fn roundtrip_free_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "free.json", FREE);
    let s = stdout_json(&run(&["roundtrip", "free.json", "--out", "o"], dir.path()));
    assert!(s["sup_error"].as_f64().unwrap() < 1e-10);
    for f in ["scattering.json", "checks.json", "recovery.csv", "comparison.csv", "kernel_plus.csv", "kernel_minus.csv"] {
        assert!(dir.path().join("o").join(f).exists(), "{f}");
    }
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "step.json", STEP);
    let a = bin().args(["direct", "step.json", "--out", "a"]).current_dir(dir.path()).env("STEPLIKE_IST_THREADS", "1").output().unwrap();
    let b = bin().args(["direct", "step.json", "--out", "b"]).current_dir(dir.path()).env("STEPLIKE_IST_THREADS", "3").output().unwrap();
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let fa = std::fs::read(dir.path().join("a/scattering.json")).unwrap();
    let fb = std::fs::read(dir.path().join("b/scattering.json")).unwrap();
    assert_eq!(fa, fb);
}

#[test]
fn errors_are_machine_readable() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "step.json", STEP);
    write(dir.path(), "broken.json", "{\n  \"c_minus\": 0,\n  \"kind\": \n}");
    let cases: [(&[&str], &str); 7] = [
        (&["direct"], "usage_error"),
        (&["frobnicate", "step.json"], "usage_error"),
        (&["direct", "missing.json"], "io_error"),
        (&["direct", "broken.json"], "parse_error"),
        (&["direct", "step.json", "--tol", "bogus=1"], "invalid_input"),
        (&["direct", "step.json", "--xmax=-2"], "invalid_input"),
        (&["asymptotics", "step.json", "--order", "2"], "order_exceeds_smoothness"),
    ];
    for (args, code) in cases {
        let o = run(args, dir.path());
        assert!(!o.status.success(), "{args:?}");
        assert_eq!(error_code(&o), code, "{args:?}");
    }
    let o = run(&["direct", "broken.json"], dir.path());
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));
}

#[test]
fn bad_thread_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "free.json", FREE);
    let o = bin().args(["direct", "free.json"]).current_dir(dir.path()).env("STEPLIKE_IST_THREADS", "zero").output().unwrap();
    assert_eq!(error_code(&o), "invalid_input");
}

#[test]
fn asymptotics_reports_rates() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "sol.json", SOLITON);
    let s = stdout_json(&run(&["asymptotics", "sol.json", "--order", "2", "--out", "o"], dir.path()));
    assert_eq!(s["residual"]["pass"], Value::Bool(true));
    assert_eq!(s["reflection_rate_bounded"], Value::Bool(true));
    let csv = std::fs::read_to_string(dir.path().join("o/residual.csv")).unwrap();
    assert!(csv.starts_with("lambda,residual_abs,fitted_slope\n"));
    assert_eq!(csv.lines().count(), 13);
    let coeffs = std::fs::read_to_string(dir.path().join("o/coefficients.csv")).unwrap();
    assert!(coeffs.starts_with("x,u0,u1,u2,m1,m2\n"));
}
