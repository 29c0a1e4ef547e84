use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use serde_json::Value;
use tempfile::TempDir;

use sephier::cli::{run, EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("sephier").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn json(args: &[&str]) -> (i32, Value) {
    let (code, out, err) = call(args);
    let v = serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out} / {err}"));
    (code, v)
}

const X1_SQ: &str = r#"{"type":"real_polynomial","vars":2,"degree":2,
    "terms":[{"exponents":[2,0],"coeff":1.0}]}"#;

const PHI: &str = r#"{"type":"complex_hermitian","n":2,"d":2,
    "entries":[[0,0,0.5,0],[0,3,0.5,0],[3,3,0.5,0]]}"#;

#[test]
fn bound_on_a_square() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "sq.json", X1_SQ);
    let (code, r) = json(&["bound", p.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!((r["upper_bound"].as_f64().unwrap() - 1.0).abs() < 1e-5);
    assert!((r["lower_bound"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    let cert = r["certificate"].as_str().unwrap();
    assert!(Path::new(cert).ends_with("sq.level0.cert.json"));
    assert!(Path::new(cert).exists());
}

#[test]
fn certify_accepts_then_rejects_perturbed() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "sq.json", X1_SQ);
    let ps = p.to_str().unwrap();
    let (code, r) = json(&["bound", ps, "--level", "1"]);
    assert_eq!(code, EXIT_OK);
    let cert = r["certificate"].as_str().unwrap().to_string();
    let (code, r) = json(&["certify", ps, &cert]);
    assert_eq!(code, EXIT_OK, "{r}");
    assert_eq!(r["valid"], Value::Bool(true));

    let mut c: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    let nu = c["nu"].as_f64().unwrap();
    c["nu"] = Value::from(nu - 1e-3);
    let bad = write(dir.path(), "bad.json", &c.to_string());
    let (code, r) = json(&["certify", ps, bad.to_str().unwrap()]);
    assert_eq!(code, EXIT_NUMERICAL);
    assert_eq!(r["valid"], Value::Bool(false));
}

#[test]
fn dps_on_maximally_entangled_state() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "phi.json", PHI);
    let (code, r) = json(&["dps", p.to_str().unwrap(), "--ppt"]);
    assert_eq!(code, EXIT_OK);
    assert!((r["value"].as_f64().unwrap() - 0.5).abs() < 1e-6);
}

#[test]
fn witness_detects_maximally_entangled_state() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "phi.json", PHI);
    let (code, r) = json(&["witness", p.to_str().unwrap(), "--ppt"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(r["detected"], Value::Bool(true));
    assert!(r["validated_margin"].as_f64().unwrap() >= -1e-6);
}

#[test]
fn oracle_and_net_bracket() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "sq.json", X1_SQ);
    let (code, r) = json(&["oracle", p.to_str().unwrap(), "--net", "0.01"]);
    assert_eq!(code, EXIT_OK);
    assert!((r["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    let b = r["bracket"].as_array().unwrap();
    assert!(b[0].as_f64().unwrap() <= 1.0 + 1e-12 && b[1].as_f64().unwrap() >= 1.0);
}

#[test]
fn groebner_reports_zero_dimensional_ideal() {
    let dir = TempDir::new().unwrap();
    let p = write(
        dir.path(),
        "q.json",
        r#"{"type":"real_polynomial","vars":2,"degree":4,
            "terms":[{"exponents":[2,2],"coeff":1.0}]}"#,
    );
    let (code, r) = json(&["groebner", p.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(r["status"], "complete");
    assert_eq!(r["zero_dimensional"], Value::Bool(true));
}

#[test]
fn kkt_dump_lists_one_minor_for_two_variables() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "sq.json", X1_SQ);
    let (code, r) = json(&["kkt", "dump", p.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(r["minors"].as_array().unwrap().len(), 1);
}

#[test]
fn bad_input_and_usage_codes() {
    let dir = TempDir::new().unwrap();
    let odd = write(
        dir.path(),
        "odd.json",
        r#"{"type":"real_polynomial","vars":2,"degree":3,"terms":[]}"#,
    );
    let (code, _, err) = call(&["bound", odd.to_str().unwrap()]);
    assert_eq!(code, EXIT_INPUT);
    assert!(!err.is_empty());
    let (code, _, _) = call(&["bound", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(code, EXIT_INPUT);
    let (code, _, _) = call(&["bound"]);
    assert_eq!(code, EXIT_USAGE);
    let (code, _, _) = call(&["frobnicate"]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn reports_are_deterministic_without_timings() {
    let dir = TempDir::new().unwrap();
    let p = write(
        dir.path(),
        "f.json",
        r#"{"type":"real_polynomial","vars":3,"degree":4,
            "terms":[{"exponents":[2,2,0],"coeff":1.0},{"exponents":[0,1,3],"coeff":-0.7},
                     {"exponents":[4,0,0],"coeff":0.3}]}"#,
    );
    let ps = p.to_str().unwrap();
    let (_, a, _) = call(&["bound", ps, "--level", "1", "--no-timings"]);
    let (_, b, _) = call(&["bound", ps, "--level", "1", "--no-timings"]);
    assert_eq!(a, b);
}

#[test]
fn binary_writes_report_file() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "sq.json", X1_SQ);
    let out = dir.path().join("report.json");
    let status = Command::new(env!("CARGO_BIN_EXE_sephier"))
        .args([
            "oracle",
            p.to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(EXIT_OK));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["command"], "oracle");
    let status = Command::new(env!("CARGO_BIN_EXE_sephier"))
        .stderr(Stdio::null())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(EXIT_USAGE));
}
