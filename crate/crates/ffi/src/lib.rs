// SPDX-License-Identifier: MIT OR Apache-2.0

//! C interface to the distcp change-point library.
//!
//! Every object is an opaque handle created by a `distcp_*` constructor and
//! released with the matching `*_free`. Fallible calls return a
//! [`DistcpStatus`] and write their result through an out-pointer; on failure
//! the message is available from [`distcp_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use distcp::metrics::build_distance_matrix;
use distcp::segmentation::{mcpd_dp, ChangePointSet, SegmentationConfig};
use distcp::{
    permutation_test, scan_curve, DetectionResult, DistanceMatrix, Error, Metric, MetricObject,
    PermutationPlan, ScanProfile,
};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistcpStatus {
    Ok = 0,
    NullPointer = 1,
    /// Shape or dimension mismatch.
    Dimension = 2,
    /// Invalid matrix or object values.
    Invalid = 3,
    /// Parameter out of range.
    Config = 4,
    /// Index out of range.
    OutOfRange = 5,
    Panic = 6,
}

pub struct DistcpMatrix(DistanceMatrix);
pub struct DistcpProfile(ScanProfile);
pub struct DistcpResult(DetectionResult);
pub struct DistcpChangePoints(ChangePointSet);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> DistcpStatus {
    match e {
        Error::Dimension(_) | Error::Grid(_) => DistcpStatus::Dimension,
        Error::Config(_) | Error::Argument(_) => DistcpStatus::Config,
        _ => DistcpStatus::Invalid,
    }
}

fn fail(status: DistcpStatus, message: impl Into<String>) -> DistcpStatus {
    set_error(message.into());
    status
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), DistcpStatus>) -> DistcpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DistcpStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(DistcpStatus::Panic, "internal panic"),
    }
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, DistcpStatus> {
    p.as_ref()
        .ok_or_else(|| fail(DistcpStatus::NullPointer, "null handle"))
}

fn non_null<T>(p: *const T) -> Result<(), DistcpStatus> {
    if p.is_null() {
        Err(fail(DistcpStatus::NullPointer, "null pointer argument"))
    } else {
        Ok(())
    }
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn distcp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn distcp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Distance matrix from `n * n` row-major entries.
///
/// # Safety
/// `entries` must point to `n * n` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn distcp_matrix_new(
    n: usize,
    entries: *const f64,
    out: *mut *mut DistcpMatrix,
) -> DistcpStatus {
    guard(|| {
        non_null(entries)?;
        non_null(out)?;
        let len = n
            .checked_mul(n)
            .ok_or_else(|| fail(DistcpStatus::Dimension, "n * n overflows"))?;
        let values = std::slice::from_raw_parts(entries, len).to_vec();
        let d = DistanceMatrix::new(n, values, "c");
        let d = d.map_err(|e| fail(status_of(&e), e.to_string()))?;
        put(out, DistcpMatrix(d));
        Ok(())
    })
}

/// Euclidean distance matrix of `n` points of dimension `dim`, row-major.
///
/// # Safety
/// `points` must point to `n * dim` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn distcp_matrix_euclidean(
    points: *const f64,
    n: usize,
    dim: usize,
    out: *mut *mut DistcpMatrix,
) -> DistcpStatus {
    guard(|| {
        non_null(points)?;
        non_null(out)?;
        if dim == 0 {
            return Err(fail(DistcpStatus::Dimension, "dimension must be positive"));
        }
        let len = n
            .checked_mul(dim)
            .ok_or_else(|| fail(DistcpStatus::Dimension, "n * dim overflows"))?;
        let objects: Vec<MetricObject> = std::slice::from_raw_parts(points, len)
            .chunks(dim)
            .map(|c| MetricObject::Vector(c.to_vec()))
            .collect();
        let d = build_distance_matrix(&objects, Metric::Euclidean);
        let d = d.map_err(|e| fail(status_of(&e), e.to_string()))?;
        put(out, DistcpMatrix(d));
        Ok(())
    })
}

/// Number of observations, or 0 for a null handle.
///
/// # Safety
/// `m` must be NULL or a live matrix handle.
#[no_mangle]
pub unsafe extern "C" fn distcp_matrix_len(m: *const DistcpMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.n())
}

/// # Safety
/// `m` must be NULL or a matrix handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn distcp_matrix_free(m: *mut DistcpMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Scan curve over splits with fractions in `[c, 1 - c]`.
///
/// # Safety
/// `m` must be a live matrix handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn distcp_scan(
    m: *const DistcpMatrix,
    c: f64,
    out: *mut *mut DistcpProfile,
) -> DistcpStatus {
    guard(|| {
        let m = handle(m)?;
        non_null(out)?;
        let p = scan_curve(&m.0, c).map_err(|e| fail(status_of(&e), e.to_string()))?;
        put(out, DistcpProfile(p));
        Ok(())
    })
}

/// # Safety
/// `p` must be NULL or a live profile handle.
#[no_mangle]
pub unsafe extern "C" fn distcp_profile_len(p: *const DistcpProfile) -> usize {
    p.as_ref().map_or(0, |p| p.0.len())
}

/// Split index and statistic of entry `i`.
///
/// # Safety
/// `p` must be a live profile handle; `split` and `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn distcp_profile_get(
    p: *const DistcpProfile,
    i: usize,
    split: *mut usize,
    value: *mut f64,
) -> DistcpStatus {
    guard(|| {
        let p = handle(p)?;
        non_null(split)?;
        non_null(value)?;
        if i >= p.0.len() {
            return Err(fail(
                DistcpStatus::OutOfRange,
                format!("entry {i} of {}", p.0.len()),
            ));
        }
        *split = p.0.splits()[i];
        *value = p.0.values()[i];
        Ok(())
    })
}

/// # Safety
/// `p` must be NULL or a profile handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn distcp_profile_free(p: *mut DistcpProfile) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Permutation test for a single change. `workers` of 0 uses the global pool.
///
/// # Safety
/// `m` must be a live matrix handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn distcp_detect(
    m: *const DistcpMatrix,
    c: f64,
    permutations: usize,
    seed: u64,
    workers: usize,
    out: *mut *mut DistcpResult,
) -> DistcpStatus {
    guard(|| {
        let m = handle(m)?;
        non_null(out)?;
        let mut plan = PermutationPlan::new(permutations, seed);
        if workers > 0 {
            plan = plan.with_workers(workers);
        }
        let r = permutation_test(&m.0, c, &plan).map_err(|e| fail(status_of(&e), e.to_string()))?;
        put(out, DistcpResult(r));
        Ok(())
    })
}

/// # Safety
/// `r` must be a live result handle.
#[no_mangle]
pub unsafe extern "C" fn distcp_result_statistic(r: *const DistcpResult) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.0.statistic)
}

/// # Safety
/// `r` must be a live result handle.
#[no_mangle]
pub unsafe extern "C" fn distcp_result_tau_index(r: *const DistcpResult) -> usize {
    r.as_ref().map_or(0, |r| r.0.tau_index)
}

/// Permutation p-value, NaN when absent.
///
/// # Safety
/// `r` must be a live result handle.
#[no_mangle]
pub unsafe extern "C" fn distcp_result_p_value(r: *const DistcpResult) -> f64 {
    r.as_ref().and_then(|r| r.0.p_value).unwrap_or(f64::NAN)
}

/// # Safety
/// `r` must be NULL or a result handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn distcp_result_free(r: *mut DistcpResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Seeded binary segmentation with a threshold from `permutations` draws.
///
/// # Safety
/// `m` must be a live matrix handle and `out` writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn distcp_segment(
    m: *const DistcpMatrix,
    c: f64,
    gamma: f64,
    min_len: usize,
    q: f64,
    permutations: usize,
    seed: u64,
    out: *mut *mut DistcpChangePoints,
) -> DistcpStatus {
    guard(|| {
        let m = handle(m)?;
        non_null(out)?;
        let config = SegmentationConfig {
            gamma,
            min_len,
            c,
            q,
            plan: PermutationPlan::new(permutations, seed),
        };
        let set = mcpd_dp(&m.0, &config).map_err(|e| fail(status_of(&e), e.to_string()))?;
        put(out, DistcpChangePoints(set));
        Ok(())
    })
}

/// # Safety
/// `s` must be NULL or a live change-point handle.
#[no_mangle]
pub unsafe extern "C" fn distcp_changepoints_len(s: *const DistcpChangePoints) -> usize {
    s.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `s` must be a live change-point handle.
#[no_mangle]
pub unsafe extern "C" fn distcp_changepoints_threshold(s: *const DistcpChangePoints) -> f64 {
    s.as_ref().map_or(f64::NAN, |s| s.0.threshold)
}

/// Index and statistic of the `i`-th point in increasing order.
///
/// # Safety
/// `s` must be a live change-point handle; `index` and `statistic` writable.
#[no_mangle]
pub unsafe extern "C" fn distcp_changepoints_get(
    s: *const DistcpChangePoints,
    i: usize,
    index: *mut usize,
    statistic: *mut f64,
) -> DistcpStatus {
    guard(|| {
        let s = handle(s)?;
        non_null(index)?;
        non_null(statistic)?;
        let point =
            s.0.points
                .get(i)
                .ok_or_else(|| fail(DistcpStatus::OutOfRange, format!("point {i} of {}", s.0.len())))?;
        *index = point.index;
        *statistic = point.statistic;
        Ok(())
    })
}

/// # Safety
/// `s` must be NULL or a change-point handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn distcp_changepoints_free(s: *mut DistcpChangePoints) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}
