use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use sephier_ffi::*;

const SQUARE: &str = r#"{"type":"real_polynomial","vars":2,"degree":2,
    "terms":[{"exponents":[2,0],"coeff":1.0}]}"#;

const PHI: &str = r#"{"type":"complex_hermitian","n":2,"d":2,
    "entries":[[0,0,0.5,0],[0,3,0.5,0],[3,3,0.5,0]]}"#;

fn problem(text: &str) -> *mut SephierProblem {
    let s = CString::new(text).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(
        unsafe { sephier_problem_from_json(s.as_ptr(), &mut p) },
        SephierStatus::Ok
    );
    assert!(!p.is_null());
    p
}

fn last_error() -> Option<String> {
    let e = sephier_last_error();
    (!e.is_null()).then(|| unsafe { CStr::from_ptr(e) }.to_string_lossy().into_owned())
}

#[test]
fn bound_certificate_and_round_trip() {
    let p = problem(SQUARE);
    unsafe {
        assert_eq!(sephier_problem_num_vars(p), 2);
        assert_eq!(sephier_problem_degree(p), 2);
        let mut bound = 0.0;
        let mut cert = ptr::null_mut();
        assert_eq!(
            sephier_hierarchy_bound(p, 1, true, 1e-8, &mut bound, &mut cert),
            SephierStatus::Ok
        );
        assert!((bound - 1.0).abs() < 1e-5);
        assert_eq!(sephier_certificate_nu(cert), bound);

        let mut text = ptr::null_mut();
        assert_eq!(
            sephier_certificate_to_json(cert, &mut text),
            SephierStatus::Ok
        );
        let mut back = ptr::null_mut();
        assert_eq!(
            sephier_certificate_from_json(text, &mut back),
            SephierStatus::Ok
        );
        sephier_string_free(text);

        let (mut res, mut eig) = (1.0, -1.0);
        assert_eq!(
            sephier_certificate_verify(p, back, &mut res, &mut eig),
            SephierStatus::Ok
        );
        assert!(res <= 1e-8, "{res}");
        assert!(eig >= -1e-8);
        sephier_certificate_free(back);
        sephier_certificate_free(cert);

        let mut lower = 0.0;
        assert_eq!(sephier_oracle_value(p, 5, 0, &mut lower), SephierStatus::Ok);
        assert!((lower - 1.0).abs() < 1e-9);
        sephier_problem_free(p);
    }
}

#[test]
fn dps_value_and_operator_checks() {
    let phi = problem(PHI);
    let sq = problem(SQUARE);
    unsafe {
        assert_eq!(sephier_problem_num_vars(phi), 4);
        let mut v = 0.0;
        assert_eq!(
            sephier_dps_value(phi, 1, true, 1e-8, &mut v),
            SephierStatus::Ok
        );
        assert!((v - 0.5).abs() < 1e-6, "{v}");
        assert_eq!(
            sephier_dps_value(sq, 1, true, 1e-8, &mut v),
            SephierStatus::InvalidInput
        );
        assert!(last_error().unwrap().contains("complex_hermitian"));
        assert_eq!(
            sephier_dps_value(phi, 1, true, -1.0, &mut v),
            SephierStatus::InvalidInput
        );
        sephier_problem_free(phi);
        sephier_problem_free(sq);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(
            sephier_problem_from_json(ptr::null(), &mut p),
            SephierStatus::NullPointer
        );
        let bad = CString::new("{\"type\":\"real_polynomial\"").unwrap();
        assert_eq!(
            sephier_problem_from_json(bad.as_ptr(), &mut p),
            SephierStatus::Parse
        );
        assert!(p.is_null());
        assert!(last_error().is_some());
        let odd =
            CString::new(r#"{"type":"real_polynomial","vars":2,"degree":3,"terms":[]}"#).unwrap();
        assert_eq!(
            sephier_problem_from_json(odd.as_ptr(), &mut p),
            SephierStatus::InvalidInput
        );
        let invalid = [0xffu8, 0];
        assert_eq!(
            sephier_problem_from_json(invalid.as_ptr().cast(), &mut p),
            SephierStatus::InvalidUtf8
        );
        let mut v = 0.0;
        assert_eq!(
            sephier_oracle_value(ptr::null(), 1, 0, &mut v),
            SephierStatus::NullPointer
        );
        let q = problem(SQUARE);
        assert!(last_error().is_none());
        assert_eq!(
            sephier_oracle_value(q, 1, 0, ptr::null_mut()),
            SephierStatus::NullPointer
        );
        sephier_problem_free(q);
        sephier_problem_free(ptr::null_mut());
        assert!(sephier_certificate_nu(ptr::null()).is_nan());
    }
    let name = unsafe { CStr::from_ptr(sephier_status_name(SephierStatus::Numerical)) };
    assert_eq!(name.to_str().unwrap(), "numerical failure");
    let version = unsafe { CStr::from_ptr(sephier_version()) };
    assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

/// Test builds only link the rlib, so build the static library on its own.
fn static_library() -> PathBuf {
    let target = Path::new(env!("CARGO_TARGET_TMPDIR")).join("staticlib");
    let out = Command::new(env!("CARGO"))
        .args([
            "build",
            "--release",
            "--lib",
            "-p",
            "sephier-ffi",
            "--target-dir",
        ])
        .arg(&target)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    target.join("release/libsephier_ffi.a")
}

#[test]
fn header_lists_every_export() {
    let header =
        std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/sephier.h"))
            .unwrap();
    for name in [
        "sephier_last_error",
        "sephier_status_name",
        "sephier_version",
        "sephier_problem_from_json",
        "sephier_problem_free",
        "sephier_hierarchy_bound",
        "sephier_oracle_value",
        "sephier_dps_value",
        "sephier_certificate_from_json",
        "sephier_certificate_to_json",
        "sephier_certificate_verify",
        "sephier_certificate_free",
        "sephier_string_free",
        "SEPHIER_STATUS_NUMERICAL = 5",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

#[test]
fn c_program_links_against_static_library() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = static_library();
    let dir = tempfile::TempDir::new().unwrap();
    let exe = dir.path().join("smoke");
    let out = Command::new("cc")
        .arg("-std=c11")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .output()
        .expect("a C compiler is required");
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let run = Command::new(&exe).output().unwrap();
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(String::from_utf8_lossy(&run.stdout).contains("parse error"));
}
