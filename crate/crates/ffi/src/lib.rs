//! C ABI over `ripscover`.
//!
//! Objects are opaque handles released with their `_free` function. Every
//! fallible call returns an [`RcStatus`]; the message of the last failure on
//! the calling thread is available from [`rc_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ripscover::criteria::{transport_cycle, Criterion, CriterionError, Evaluation};
use ripscover::field::Rational;
use ripscover::optcycle::lp::LpError;
use ripscover::optcycle::{minimal_coverage_cycle, CycleJson, FenceCost, OptError};
use ripscover::oracle::grid_coverage_check;
use ripscover::scenario::{generate_perturbation, validate_perturbation, Perturbation, PerturbationCheck, Scenario};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    AssumptionFailure = 4,
    Internal = 5,
    Panic = 6,
}

/// Scenario handle.
pub struct RcScenario(Scenario);

/// Perturbation handle.
pub struct RcPerturbation(Perturbation);

/// Built complex and persistence of one scenario.
pub struct RcEvaluation {
    scenario: Scenario,
    grid_step: f64,
    inner: Evaluation<Rational>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(s));
}

fn fail(status: RcStatus, msg: impl Into<String>) -> RcStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> RcStatus) -> RcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(RcStatus::Panic, "panic inside ripscover"),
    }
}

fn criterion_status(e: &CriterionError) -> RcStatus {
    match e {
        CriterionError::AssumptionFailure(_) => RcStatus::AssumptionFailure,
        CriterionError::BadPerturbation { .. } | CriterionError::Scenario(_) | CriterionError::Rips(_) => RcStatus::InvalidInput,
        _ => RcStatus::Internal,
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, RcStatus> {
    if p.is_null() {
        return Err(fail(RcStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(RcStatus::InvalidUtf8, "string is not UTF-8"))
}

fn give_string(s: String, out: *mut *mut c_char) -> RcStatus {
    match CString::new(s) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            RcStatus::Ok
        }
        Err(_) => fail(RcStatus::Internal, "output contains NUL"),
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length, 0 when none.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn rc_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn rc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn rc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `json` must be a NUL-terminated string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rc_scenario_from_json(json: *const c_char, out: *mut *mut RcScenario) -> RcStatus {
    guard(|| {
        if out.is_null() {
            return fail(RcStatus::NullPointer, "null output");
        }
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match Scenario::from_json(text) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(RcScenario(s)));
                RcStatus::Ok
            }
            Err(e) => fail(RcStatus::InvalidInput, e.to_string()),
        }
    })
}

/// # Safety
/// `s` must come from [`rc_scenario_from_json`] or be null.
#[no_mangle]
pub unsafe extern "C" fn rc_scenario_free(s: *mut RcScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of sensors, 0 for null.
///
/// # Safety
/// `s` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn rc_scenario_len(s: *const RcScenario) -> usize {
    s.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `s` must be a live handle, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rc_perturbation_generate(s: *const RcScenario, seed: u64, out: *mut *mut RcPerturbation) -> RcStatus {
    guard(|| {
        let (Some(s), false) = (s.as_ref(), out.is_null()) else {
            return fail(RcStatus::NullPointer, "null argument");
        };
        *out = Box::into_raw(Box::new(RcPerturbation(generate_perturbation(&s.0, seed))));
        RcStatus::Ok
    })
}

/// Parses `{"targets":[[x,y],...]}` and validates it against `s`.
///
/// # Safety
/// `s` must be a live handle, `json` NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn rc_perturbation_from_json(
    s: *const RcScenario,
    json: *const c_char,
    out: *mut *mut RcPerturbation,
) -> RcStatus {
    guard(|| {
        let (Some(s), false) = (s.as_ref(), out.is_null()) else {
            return fail(RcStatus::NullPointer, "null argument");
        };
        let text = match read_str(json) {
            Ok(t) => t,
            Err(st) => return st,
        };
        let p: Perturbation = match serde_json::from_str(text) {
            Ok(p) => p,
            Err(e) => return fail(RcStatus::InvalidInput, e.to_string()),
        };
        match validate_perturbation(&s.0, &p) {
            Ok(PerturbationCheck::Pass) => {
                *out = Box::into_raw(Box::new(RcPerturbation(p)));
                RcStatus::Ok
            }
            Ok(PerturbationCheck::Fail { index, clause }) => {
                fail(RcStatus::InvalidInput, format!("sensor {index} violates {clause:?}"))
            }
            Err(e) => fail(RcStatus::InvalidInput, e.to_string()),
        }
    })
}

/// # Safety
/// `p` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn rc_perturbation_free(p: *mut RcPerturbation) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Checks assumptions and builds the relative complex up to `r_w + ε`.
///
/// # Safety
/// `s` must be a live handle, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rc_evaluate(s: *const RcScenario, grid_step: f64, out: *mut *mut RcEvaluation) -> RcStatus {
    guard(|| {
        let (Some(s), false) = (s.as_ref(), out.is_null()) else {
            return fail(RcStatus::NullPointer, "null argument");
        };
        match Evaluation::prepare(&s.0, grid_step) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(RcEvaluation { scenario: s.0.clone(), grid_step, inner }));
                RcStatus::Ok
            }
            Err(e) => fail(criterion_status(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `e` must come from [`rc_evaluate`] or be null.
#[no_mangle]
pub unsafe extern "C" fn rc_evaluation_free(e: *mut RcEvaluation) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

fn criterion(stable: bool) -> Criterion {
    if stable {
        Criterion::Stable
    } else {
        Criterion::Dsg
    }
}

/// # Safety
/// `e` must be a live handle, `holds` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rc_evaluation_verdict(e: *const RcEvaluation, stable: bool, holds: *mut bool) -> RcStatus {
    guard(|| {
        let (Some(e), false) = (e.as_ref(), holds.is_null()) else {
            return fail(RcStatus::NullPointer, "null argument");
        };
        match e.inner.verdict(criterion(stable), &e.scenario) {
            Ok(v) => {
                *holds = v.holds;
                RcStatus::Ok
            }
            Err(err) => fail(criterion_status(&err), err.to_string()),
        }
    })
}

/// Verdict JSON; release with [`rc_string_free`].
///
/// # Safety
/// `e` must be a live handle, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rc_evaluation_verdict_json(e: *const RcEvaluation, stable: bool, out: *mut *mut c_char) -> RcStatus {
    guard(|| {
        let (Some(e), false) = (e.as_ref(), out.is_null()) else {
            return fail(RcStatus::NullPointer, "null argument");
        };
        match e.inner.verdict(criterion(stable), &e.scenario) {
            Ok(v) => give_string(serde_json::to_string(&v.to_json(&e.inner.complex, None)).unwrap_or_default(), out),
            Err(err) => fail(criterion_status(&err), err.to_string()),
        }
    })
}

/// Grid-oracle coverage of the sensors, moved by `p` when non-null.
///
/// # Safety
/// `s` must be a live handle, `p` live or null, `covered` valid.
#[no_mangle]
pub unsafe extern "C" fn rc_coverage_check(
    s: *const RcScenario,
    p: *const RcPerturbation,
    grid_step: f64,
    covered: *mut bool,
) -> RcStatus {
    guard(|| {
        let (Some(s), false) = (s.as_ref(), covered.is_null()) else {
            return fail(RcStatus::NullPointer, "null argument");
        };
        let pts = p.as_ref().map_or_else(|| s.0.sensors().to_vec(), |p| p.0.targets.clone());
        match grid_coverage_check(&pts, s.0.radii().r_c, &s.0, grid_step) {
            Ok(r) => {
                *covered = r.covered();
                RcStatus::Ok
            }
            Err(e) => fail(RcStatus::InvalidInput, e.to_string()),
        }
    })
}

/// Transports the stable witness through `p` and returns the minimal
/// coverage cycle as JSON. `*out` is set to null when the stable criterion
/// fails.
///
/// # Safety
/// `e` and `p` must be live handles, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rc_optimize(e: *const RcEvaluation, p: *const RcPerturbation, out: *mut *mut c_char) -> RcStatus {
    guard(|| {
        let (Some(e), Some(p), false) = (e.as_ref(), p.as_ref(), out.is_null()) else {
            return fail(RcStatus::NullPointer, "null argument");
        };
        *out = ptr::null_mut();
        let s = &e.scenario;
        let v = match e.inner.verdict(Criterion::Stable, s) {
            Ok(v) => v,
            Err(err) => return fail(criterion_status(&err), err.to_string()),
        };
        let Some(w) = v.witness else { return RcStatus::Ok };
        let t = match transport_cycle(&e.inner, s, &w.cycle, &p.0, e.grid_step) {
            Ok(t) => t,
            Err(err) => return fail(criterion_status(&err), err.to_string()),
        };
        let r = s.radii();
        let k = &t.evaluation.complex;
        match minimal_coverage_cycle(k, &t.chain, r.r_s, r.r_c, FenceCost::Charged) {
            Ok((sol, cov)) => give_string(serde_json::to_string(&CycleJson::new(k, &sol, &cov, s.len())).unwrap_or_default(), out),
            Err(err @ OptError::Lp(LpError::TooLarge { .. })) => fail(RcStatus::InvalidInput, err.to_string()),
            Err(err) => fail(RcStatus::Internal, err.to_string()),
        }
    })
}
