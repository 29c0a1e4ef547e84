//! C ABI over `sephier`.
//!
//! Every fallible call returns a `SephierStatus` and writes results through
//! out-pointers. On failure the thread's last error message is set and can
//! be read with `sephier_last_error`. Handles are opaque and must be
//! released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sephier::io::{parse_problem, Problem};
use sephier::oracle::multistart;
use sephier::relaxation::{
    solve_dps, solve_hierarchy, verify_certificate, CertificateJson, HierarchyConfig,
    SosCertificate,
};
use sephier::sdp::{SolverOptions, SolverStatus};
use sephier::tensor_poly::SymmetricTensor;
use sephier::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SephierStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidInput = 4,
    Numerical = 5,
    Io = 6,
    Panic = 7,
}

/// A parsed problem together with its symmetric tensor.
pub struct SephierProblem {
    problem: Problem,
    tensor: SymmetricTensor,
}

/// An SOS certificate `ν - f = σ + Σ χ g` produced by the hierarchy.
pub struct SephierCertificate {
    cert: SosCertificate,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> SephierStatus {
    match e {
        Error::Parse(_) | Error::Json(_) => SephierStatus::Parse,
        Error::Io(_) => SephierStatus::Io,
        Error::NumericalFailure(_)
        | Error::SolverFailure(_)
        | Error::DualInfeasible(_)
        | Error::InconsistentConstraints(_)
        | Error::CapExceeded { .. } => SephierStatus::Numerical,
        _ => SephierStatus::InvalidInput,
    }
}

struct Fail(SephierStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SephierStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SephierStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SephierStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(SephierStatus::NullPointer, format!("{what} is null"))
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, v: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| Fail(SephierStatus::InvalidUtf8, format!("{what}: {e}")))
}

fn options(tol: f64) -> Result<SolverOptions, Fail> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Fail(
            SephierStatus::InvalidInput,
            format!("tolerance {tol} must be positive"),
        ));
    }
    Ok(SolverOptions {
        feas_tol: tol / 10.0,
        gap_tol: tol,
        ..Default::default()
    })
}

fn require_optimal(s: SolverStatus) -> Result<(), Fail> {
    if s == SolverStatus::Optimal {
        Ok(())
    } else {
        Err(Fail(
            SephierStatus::Numerical,
            format!("solver stopped with status {s:?}"),
        ))
    }
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next `sephier_*` call on the same thread.
#[no_mangle]
pub extern "C" fn sephier_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn sephier_status_name(status: SephierStatus) -> *const c_char {
    let s: &'static CStr = match status {
        SephierStatus::Ok => c"ok",
        SephierStatus::NullPointer => c"null pointer",
        SephierStatus::InvalidUtf8 => c"invalid utf-8",
        SephierStatus::Parse => c"parse error",
        SephierStatus::InvalidInput => c"invalid input",
        SephierStatus::Numerical => c"numerical failure",
        SephierStatus::Io => c"i/o error",
        SephierStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn sephier_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a problem document (`complex_hermitian` or `real_polynomial`).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn sephier_problem_from_json(
    json: *const c_char,
    out: *mut *mut SephierProblem,
) -> SephierStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(ptr::null_mut());
        let problem = parse_problem(read_str(json, "json")?)?;
        let tensor = problem.tensor()?;
        out.write(Box::into_raw(Box::new(SephierProblem { problem, tensor })));
        Ok(())
    })
}

/// # Safety
/// `p` must come from `sephier_problem_from_json` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sephier_problem_free(p: *mut SephierProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of real variables of the objective; `2n` for an operator on `(C^n)^{⊗d}`.
///
/// # Safety
/// `p` must be a live problem handle or null.
#[no_mangle]
pub unsafe extern "C" fn sephier_problem_num_vars(p: *const SephierProblem) -> usize {
    p.as_ref().map_or(0, |p| p.tensor.num_vars())
}

/// Degree `2d` of the objective form.
///
/// # Safety
/// `p` must be a live problem handle or null.
#[no_mangle]
pub unsafe extern "C" fn sephier_problem_degree(p: *const SephierProblem) -> u32 {
    p.as_ref().map_or(0, |p| 2 * p.tensor.half_rank())
}

/// Solves the level-`level` hierarchy. Writes the certified upper bound to
/// `out_bound`; when `out_cert` is non-null it receives the certificate.
///
/// # Safety
/// `p` must be a live problem handle; `out_bound` must be writable;
/// `out_cert` may be null.
#[no_mangle]
pub unsafe extern "C" fn sephier_hierarchy_bound(
    p: *const SephierProblem,
    level: u32,
    kkt: bool,
    tol: f64,
    out_bound: *mut f64,
    out_cert: *mut *mut SephierCertificate,
) -> SephierStatus {
    guard(|| {
        if !out_cert.is_null() {
            out_cert.write(ptr::null_mut());
        }
        let p = as_ref(p, "problem")?;
        if out_bound.is_null() {
            return Err(null("out_bound"));
        }
        let opts = options(tol)?;
        let t = &p.tensor;
        let cfg = HierarchyConfig::new(t.num_vars(), t.half_rank(), level, kkt);
        let r = solve_hierarchy(t, &cfg, &opts)?;
        require_optimal(r.status())?;
        out_bound.write(r.upper_bound());
        if !out_cert.is_null() {
            let cert = r.certificate.ok_or_else(|| {
                Fail(
                    SephierStatus::Numerical,
                    "no certificate could be extracted".into(),
                )
            })?;
            out_cert.write(Box::into_raw(Box::new(SephierCertificate { cert })));
        }
        Ok(())
    })
}

/// Best value found by `restarts` seeded local ascents, a lower bound on
/// the maximum over the sphere.
///
/// # Safety
/// `p` must be a live problem handle; `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sephier_oracle_value(
    p: *const SephierProblem,
    restarts: u32,
    seed: u64,
    out_value: *mut f64,
) -> SephierStatus {
    guard(|| {
        let p = as_ref(p, "problem")?;
        let r = multistart(&p.tensor, restarts as usize, seed)?;
        write_out(out_value, r.best_value, "out_value")
    })
}

/// Level-`k` symmetric-extension bound on a `complex_hermitian` operator
/// over `n ⊗ n`, optionally with PPT constraints.
///
/// # Safety
/// `p` must be a live problem handle; `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sephier_dps_value(
    p: *const SephierProblem,
    k: u32,
    ppt: bool,
    tol: f64,
    out_value: *mut f64,
) -> SephierStatus {
    guard(|| {
        let p = as_ref(p, "problem")?;
        let op = p.problem.as_operator().ok_or_else(|| {
            Fail(
                SephierStatus::InvalidInput,
                "dps needs a complex_hermitian operator".into(),
            )
        })?;
        let opts = options(tol)?;
        let r = solve_dps(op, k as usize, ppt, &opts)?;
        require_optimal(r.status)?;
        write_out(out_value, r.value.max(r.dual_value), "out_value")
    })
}

/// Parses a certificate document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn sephier_certificate_from_json(
    json: *const c_char,
    out: *mut *mut SephierCertificate,
) -> SephierStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(ptr::null_mut());
        let doc: CertificateJson =
            serde_json::from_str(read_str(json, "json")?).map_err(Error::from)?;
        let cert = SosCertificate::from_json(&doc)?;
        out.write(Box::into_raw(Box::new(SephierCertificate { cert })));
        Ok(())
    })
}

/// Serializes the certificate. Release the string with `sephier_string_free`.
///
/// # Safety
/// `c` must be a live certificate handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sephier_certificate_to_json(
    c: *const SephierCertificate,
    out: *mut *mut c_char,
) -> SephierStatus {
    guard(|| {
        let c = as_ref(c, "certificate")?;
        let text = serde_json::to_string(&c.cert.to_json()).map_err(Error::from)?;
        let s = CString::new(text).map_err(|e| Fail(SephierStatus::Panic, e.to_string()))?;
        write_out(out, s.into_raw(), "out")
    })
}

/// The bound `ν` the certificate claims; NaN for a null handle.
///
/// # Safety
/// `c` must be a live certificate handle or null.
#[no_mangle]
pub unsafe extern "C" fn sephier_certificate_nu(c: *const SephierCertificate) -> f64 {
    c.as_ref().map_or(f64::NAN, |c| c.cert.nu)
}

/// Checks the certificate identity against the problem. Writes the largest
/// coefficient mismatch and the smallest Gram eigenvalue. The caller
/// decides acceptance from those two numbers.
///
/// # Safety
/// Handles must be live; both out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn sephier_certificate_verify(
    p: *const SephierProblem,
    c: *const SephierCertificate,
    out_residual: *mut f64,
    out_min_eigenvalue: *mut f64,
) -> SephierStatus {
    guard(|| {
        let p = as_ref(p, "problem")?;
        let c = as_ref(c, "certificate")?;
        if out_residual.is_null() || out_min_eigenvalue.is_null() {
            return Err(null("output pointer"));
        }
        let residual = verify_certificate(&p.tensor, &c.cert)?;
        out_residual.write(residual);
        out_min_eigenvalue.write(c.cert.min_gram_eigenvalue());
        Ok(())
    })
}

/// # Safety
/// `c` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sephier_certificate_free(c: *mut SephierCertificate) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// # Safety
/// `s` must be a string returned by this library, or null.
#[no_mangle]
pub unsafe extern "C" fn sephier_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
