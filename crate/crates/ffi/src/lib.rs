//! C ABI over periodlab.
//!
//! Every function returns a `PlStatus`. Objects are opaque handles created by
//! `*_new` and released by the matching `*_free`. Strings returned to C are
//! owned by the caller and released with `pl_string_free`. The message of the
//! last failure on the calling thread is available from `pl_last_error`.
//!
//! # Safety
//!
//! Every pointer argument must be null or valid for the access its type
//! implies. Handles must come from the matching `*_new` and be freed once.
//! Null pointers are reported as `PlStatus::NullPointer`.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use periodlab::abgroup::FinAbGroup;
use periodlab::casestudy::{run_example_257, run_section5_case, CaseError, CaseReport};
use periodlab::quadclass::{class_group, real_class_group};
use periodlab::ssprimes::{scan_supersingular, trace, EllipticCurve, SsError};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvariantViolation = 3,
    OutOfRange = 4,
    Panic = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(s));
}

fn fail(status: PlStatus, msg: impl Into<String>) -> PlStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> PlStatus) -> PlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(PlStatus::Panic, "panic inside periodlab"),
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length, 0 if none.
#[no_mangle]
pub unsafe extern "C" fn pl_last_error(buf: *mut c_char, len: usize) -> usize {
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

#[no_mangle]
pub unsafe extern "C" fn pl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn give_string(s: String, out: *mut *mut c_char) -> PlStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            PlStatus::Ok
        }
        Err(_) => fail(PlStatus::InvariantViolation, "output contains NUL"),
    }
}

// ---------------------------------------------------------------------------
// Class groups

pub struct PlClassGroup {
    group: FinAbGroup,
}

/// Class group of `disc` (narrow when `narrow` is nonzero and `disc > 0`).
#[no_mangle]
pub unsafe extern "C" fn pl_classgroup_new(disc: i64, narrow: bool, out: *mut *mut PlClassGroup) -> PlStatus {
    guard(|| {
        if out.is_null() {
            return fail(PlStatus::NullPointer, "out is null");
        }
        let g = if disc < 0 { class_group(disc) } else { real_class_group(disc, narrow) };
        match g {
            Ok(g) => {
                *out = Box::into_raw(Box::new(PlClassGroup { group: g.group }));
                PlStatus::Ok
            }
            Err(e) => fail(PlStatus::InvalidArgument, e.to_string()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn pl_classgroup_free(h: *mut PlClassGroup) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

#[no_mangle]
pub unsafe extern "C" fn pl_classgroup_order(h: *const PlClassGroup, out: *mut u64) -> PlStatus {
    guard(|| {
        let (Some(h), false) = (h.as_ref(), out.is_null()) else {
            return fail(PlStatus::NullPointer, "null argument");
        };
        match u64::try_from(h.group.order()) {
            Ok(n) => {
                *out = n;
                PlStatus::Ok
            }
            Err(_) => fail(PlStatus::OutOfRange, "order exceeds u64"),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn pl_classgroup_rank(h: *const PlClassGroup, out: *mut usize) -> PlStatus {
    guard(|| {
        let (Some(h), false) = (h.as_ref(), out.is_null()) else {
            return fail(PlStatus::NullPointer, "null argument");
        };
        *out = h.group.rank();
        PlStatus::Ok
    })
}

/// The `i`-th invariant factor, `d_1 | d_2 | ...`.
#[no_mangle]
pub unsafe extern "C" fn pl_classgroup_invariant(h: *const PlClassGroup, i: usize, out: *mut i64) -> PlStatus {
    guard(|| {
        let (Some(h), false) = (h.as_ref(), out.is_null()) else {
            return fail(PlStatus::NullPointer, "null argument");
        };
        match h.group.invariants().get(i) {
            Some(&d) => {
                *out = d;
                PlStatus::Ok
            }
            None => fail(PlStatus::OutOfRange, format!("index {i} but rank {}", h.group.rank())),
        }
    })
}

// ---------------------------------------------------------------------------
// Elliptic curves

pub struct PlCurve {
    curve: EllipticCurve,
}

fn ss_status(e: &SsError) -> PlStatus {
    match e {
        SsError::Pool(_) => PlStatus::InvariantViolation,
        _ => PlStatus::InvalidArgument,
    }
}

/// `a` points to the five coefficients `a1, a2, a3, a4, a6`.
#[no_mangle]
pub unsafe extern "C" fn pl_curve_new(a: *const i64, out: *mut *mut PlCurve) -> PlStatus {
    guard(|| {
        if a.is_null() || out.is_null() {
            return fail(PlStatus::NullPointer, "null argument");
        }
        let coeffs = std::slice::from_raw_parts(a, 5);
        match EllipticCurve::from_slice(coeffs) {
            Ok(curve) => {
                *out = Box::into_raw(Box::new(PlCurve { curve }));
                PlStatus::Ok
            }
            Err(e) => fail(ss_status(&e), e.to_string()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn pl_curve_free(h: *mut PlCurve) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// `a_p` at a prime of good reduction.
#[no_mangle]
pub unsafe extern "C" fn pl_curve_trace(h: *const PlCurve, p: u64, out: *mut i64) -> PlStatus {
    guard(|| {
        let (Some(h), false) = (h.as_ref(), out.is_null()) else {
            return fail(PlStatus::NullPointer, "null argument");
        };
        match trace(&h.curve, p) {
            Ok(ap) => {
                *out = ap;
                PlStatus::Ok
            }
            Err(e) => fail(ss_status(&e), e.to_string()),
        }
    })
}

/// Number of good primes `p <= bound` with `a_p = 0`.
#[no_mangle]
pub unsafe extern "C" fn pl_curve_count_supersingular(
    h: *const PlCurve,
    bound: u64,
    jobs: usize,
    out: *mut usize,
) -> PlStatus {
    guard(|| {
        let (Some(h), false) = (h.as_ref(), out.is_null()) else {
            return fail(PlStatus::NullPointer, "null argument");
        };
        match scan_supersingular(&h.curve, bound, jobs) {
            Ok(v) => {
                *out = v.len();
                PlStatus::Ok
            }
            Err(e) => fail(ss_status(&e), e.to_string()),
        }
    })
}

// ---------------------------------------------------------------------------
// Reports

unsafe fn report_json(r: &CaseReport, out: *mut *mut c_char) -> PlStatus {
    let s = serde_json::to_string(r).expect("report serializes");
    let st = give_string(s, out);
    if st == PlStatus::Ok && !r.passed {
        return fail(PlStatus::InvariantViolation, "report has failing checks");
    }
    st
}

/// JSON report of the Q(sqrt -257) example. The string is written even when a
/// check fails, in which case the status is `InvariantViolation`.
#[no_mangle]
pub unsafe extern "C" fn pl_example_257_json(out: *mut *mut c_char) -> PlStatus {
    guard(|| {
        if out.is_null() {
            return fail(PlStatus::NullPointer, "out is null");
        }
        report_json(&run_example_257(), out)
    })
}

/// JSON report of the order-`order` construction on the order-32 model.
#[no_mangle]
pub unsafe extern "C" fn pl_section5_json(order: i64, out: *mut *mut c_char) -> PlStatus {
    guard(|| {
        if out.is_null() {
            return fail(PlStatus::NullPointer, "out is null");
        }
        match run_section5_case(order) {
            Ok(r) => report_json(&r, out),
            Err(e @ CaseError::FixtureTooSmall(_)) => fail(PlStatus::InvalidArgument, e.to_string()),
            Err(e) => fail(PlStatus::InvariantViolation, e.to_string()),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn last_error() -> String {
        let mut buf = vec![0 as c_char; 256];
        let n = unsafe { pl_last_error(buf.as_mut_ptr(), buf.len()) };
        let bytes: Vec<u8> = buf[..n.min(255)].iter().map(|&c| c as u8).collect();
        String::from_utf8(bytes).unwrap()
    }

    #[test]
    fn classgroup_roundtrip() {
        unsafe {
            let mut h = ptr::null_mut();
            assert_eq!(pl_classgroup_new(-1028, false, &mut h), PlStatus::Ok);
            let (mut n, mut r, mut d) = (0u64, 0usize, 0i64);
            assert_eq!(pl_classgroup_order(h, &mut n), PlStatus::Ok);
            assert_eq!(pl_classgroup_rank(h, &mut r), PlStatus::Ok);
            assert_eq!(pl_classgroup_invariant(h, 0, &mut d), PlStatus::Ok);
            assert_eq!((n, r, d), (16, 1, 16));
            assert_eq!(pl_classgroup_invariant(h, 1, &mut d), PlStatus::OutOfRange);
            pl_classgroup_free(h);
            assert_eq!(pl_classgroup_new(-9, false, &mut h), PlStatus::InvalidArgument);
            assert!(last_error().contains("-9"));
            assert_eq!(pl_classgroup_new(-4, false, ptr::null_mut()), PlStatus::NullPointer);
            assert_eq!(pl_classgroup_order(ptr::null(), &mut n), PlStatus::NullPointer);
        }
    }

    #[test]
    fn curves() {
        unsafe {
            let a = [0i64, 0, 0, -1, 0];
            let mut c = ptr::null_mut();
            assert_eq!(pl_curve_new(a.as_ptr(), &mut c), PlStatus::Ok);
            let mut ap = 0;
            assert_eq!(pl_curve_trace(c, 5, &mut ap), PlStatus::Ok);
            assert_eq!(ap, -2);
            assert_eq!(pl_curve_trace(c, 2, &mut ap), PlStatus::InvalidArgument);
            let mut n = 0;
            assert_eq!(pl_curve_count_supersingular(c, 100, 2, &mut n), PlStatus::Ok);
            assert_eq!(n, 13);
            pl_curve_free(c);
            let z = [0i64; 5];
            assert_eq!(pl_curve_new(z.as_ptr(), &mut c), PlStatus::InvalidArgument);
        }
    }

    #[test]
    fn reports() {
        unsafe {
            let mut s = ptr::null_mut();
            assert_eq!(pl_example_257_json(&mut s), PlStatus::Ok);
            let json = std::ffi::CStr::from_ptr(s).to_str().unwrap().to_owned();
            pl_string_free(s);
            let v: serde_json::Value = serde_json::from_str(&json).unwrap();
            assert_eq!(v["passed"], true);
            assert_eq!(pl_section5_json(8, &mut s), PlStatus::Ok);
            pl_string_free(s);
            assert_eq!(pl_section5_json(16, &mut s), PlStatus::InvalidArgument);
        }
    }
}
