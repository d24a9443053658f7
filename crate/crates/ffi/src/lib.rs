//! C interface to `skewmat`.
//!
//! Objects cross the boundary as opaque pointers created by `*_new` or
//! `*_compute` functions and released by the matching `*_free`. Every
//! fallible call returns an [`SkmStatus`]; on failure the message is kept per
//! thread and read with [`skm_last_error_message`]. Matrices are passed in
//! row-major order.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use skewmat::approx::compute_summary;
use skewmat::group::{multi_pass_topk, recover_heavy, CandidateEntry, ConvolutionMode, GroupOptions};
use skewmat::linalg::entrywise_norm;
use skewmat::{multiply_exact, DenseMatrix, EntrySummary, Error};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkmStatus {
    Ok = 0,
    NullPointer = 1,
    DimensionMismatch = 2,
    NegativeValue = 3,
    NonFinite = 4,
    OutOfRange = 5,
    InvalidParameter = 6,
    Parse = 7,
    Io = 8,
    /// A Rust panic was caught at the boundary.
    Internal = 9,
}

impl From<&Error> for SkmStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::DimensionMismatch { .. } => SkmStatus::DimensionMismatch,
            Error::NegativeValue { .. } => SkmStatus::NegativeValue,
            Error::NonFinite { .. } => SkmStatus::NonFinite,
            Error::IndexOutOfRange { .. } => SkmStatus::OutOfRange,
            Error::InvalidParameter { .. } | Error::EmptyInput => SkmStatus::InvalidParameter,
            Error::Parse { .. } => SkmStatus::Parse,
            Error::Io(_) | Error::Csv(_) => SkmStatus::Io,
        }
    }
}

/// Dense real matrix.
pub struct SkmMatrix(DenseMatrix);

/// Summary of a nonnegative product.
pub struct SkmSummary(EntrySummary);

/// Entries returned by the recovery routines.
pub struct SkmEntryList(Vec<CandidateEntry>);

/// One recovered entry and the group that found it.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkmEntry {
    pub row: usize,
    pub col: usize,
    pub weight: f64,
    pub prime: usize,
    pub residue: usize,
}

/// Convolution used for the group counters.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkmConvolution {
    Naive = 0,
    Fft = 1,
    Auto = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkmGroupOptions {
    pub convolution: SkmConvolution,
    pub parallel: bool,
    pub dead_zone: f64,
    pub zipf_constant: f64,
}

impl From<SkmGroupOptions> for GroupOptions {
    fn from(o: SkmGroupOptions) -> Self {
        GroupOptions {
            mode: match o.convolution {
                SkmConvolution::Naive => ConvolutionMode::Naive,
                SkmConvolution::Fft => ConvolutionMode::Fft,
                SkmConvolution::Auto => ConvolutionMode::Auto,
            },
            parallel: o.parallel,
            dead_zone: o.dead_zone,
            zipf_constant: o.zipf_constant,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(SkmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(SkmStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SkmStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SkmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SkmStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(format!("internal error: {msg}"));
            SkmStatus::Internal
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn skm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Copies `rows * cols` row-major values into a new matrix.
///
/// # Safety
/// `values` must point to `rows * cols` readable doubles (may be null when
/// that product is 0); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn skm_matrix_new(
    rows: usize,
    cols: usize,
    values: *const f64,
    out: *mut *mut SkmMatrix,
) -> SkmStatus {
    guard(|| {
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| Failure(SkmStatus::InvalidParameter, "matrix too large".into()))?;
        let data = if len == 0 {
            Vec::new()
        } else {
            if values.is_null() {
                return Err(null("values"));
            }
            std::slice::from_raw_parts(values, len).to_vec()
        };
        let m = DenseMatrix::from_row_major(rows, cols, data)?;
        write_out(out, Box::into_raw(Box::new(SkmMatrix(m))))
    })
}

/// # Safety
/// `m` must come from this library and not be freed twice; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn skm_matrix_free(m: *mut SkmMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live matrix or null; `rows` and `cols` must be writable.
#[no_mangle]
pub unsafe extern "C" fn skm_matrix_shape(m: *const SkmMatrix, rows: *mut usize, cols: *mut usize) -> SkmStatus {
    guard(|| {
        let m = deref(m, "matrix")?;
        write_out(rows, m.0.rows())?;
        write_out(cols, m.0.cols())
    })
}

/// # Safety
/// `m` must be a live matrix or null; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn skm_matrix_get(m: *const SkmMatrix, i: usize, j: usize, out: *mut f64) -> SkmStatus {
    guard(|| {
        let m = deref(m, "matrix")?;
        write_out(out, m.0.try_get(i, j)?)
    })
}

/// Exact product `a * b`.
///
/// # Safety
/// `a` and `b` must be live matrices or null; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn skm_matrix_multiply(
    a: *const SkmMatrix,
    b: *const SkmMatrix,
    out: *mut *mut SkmMatrix,
) -> SkmStatus {
    guard(|| {
        let c = multiply_exact(&deref(a, "a")?.0, &deref(b, "b")?.0)?;
        write_out(out, Box::into_raw(Box::new(SkmMatrix(c))))
    })
}

/// Entrywise `p`-norm after dropping the `k` largest magnitudes.
///
/// # Safety
/// `m` must be a live matrix or null; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn skm_matrix_norm(m: *const SkmMatrix, p: u32, k: usize, out: *mut f64) -> SkmStatus {
    guard(|| {
        let r = entrywise_norm(&deref(m, "matrix")?.0, p, k)?;
        write_out(out, r.value)
    })
}

/// Summary of capacity `capacity` of the nonnegative product `a * b`.
///
/// # Safety
/// `a` and `b` must be live matrices or null; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn skm_summary_compute(
    a: *const SkmMatrix,
    b: *const SkmMatrix,
    capacity: usize,
    out: *mut *mut SkmSummary,
) -> SkmStatus {
    guard(|| {
        let s = compute_summary(&deref(a, "a")?.0, &deref(b, "b")?.0, capacity)?;
        write_out(out, Box::into_raw(Box::new(SkmSummary(s))))
    })
}

/// Estimate of entry `(i, j)`; 0 for entries the summary does not hold.
///
/// # Safety
/// `s` must be a live summary or null; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn skm_summary_estimate(s: *const SkmSummary, i: usize, j: usize, out: *mut f64) -> SkmStatus {
    guard(|| {
        let s = deref(s, "summary")?;
        write_out(out, s.0.estimate_entry(i, j)?)
    })
}

/// Number of stored entries; 0 for null.
///
/// # Safety
/// `s` must be a live summary or null.
#[no_mangle]
pub unsafe extern "C" fn skm_summary_len(s: *const SkmSummary) -> usize {
    s.as_ref().map_or(0, |s| s.0.len())
}

/// Stored entry `index` in position order.
///
/// # Safety
/// `s` must be a live summary or null; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn skm_summary_entry(
    s: *const SkmSummary,
    index: usize,
    row: *mut usize,
    col: *mut usize,
    weight: *mut f64,
) -> SkmStatus {
    guard(|| {
        let s = deref(s, "summary")?;
        let &(pos, w) = s.0.slots().get(index).ok_or_else(|| {
            Failure(
                SkmStatus::OutOfRange,
                format!("entry {index} of a summary holding {}", s.0.len()),
            )
        })?;
        write_out(row, pos.row)?;
        write_out(col, pos.col)?;
        write_out(weight, w)
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn skm_summary_free(s: *mut SkmSummary) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

#[no_mangle]
pub extern "C" fn skm_group_options_default() -> SkmGroupOptions {
    let d = GroupOptions::default();
    SkmGroupOptions {
        convolution: SkmConvolution::Auto,
        parallel: d.parallel,
        dead_zone: d.dead_zone,
        zipf_constant: d.zipf_constant,
    }
}

unsafe fn options(opts: *const SkmGroupOptions) -> GroupOptions {
    opts.as_ref().map_or_else(GroupOptions::default, |o| (*o).into())
}

/// At most `budget` verified entries of `a * b`, heaviest first.
///
/// # Safety
/// `a` and `b` must be live matrices or null; `opts` may be null for the
/// defaults; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn skm_recover_heavy(
    a: *const SkmMatrix,
    b: *const SkmMatrix,
    budget: usize,
    opts: *const SkmGroupOptions,
    out: *mut *mut SkmEntryList,
) -> SkmStatus {
    guard(|| {
        let found = recover_heavy(&deref(a, "a")?.0, &deref(b, "b")?.0, budget, &options(opts))?;
        write_out(out, Box::into_raw(Box::new(SkmEntryList(found))))
    })
}

/// The `k * s` heaviest entries of a Zipf(`z`)-skewed product, `k` per round.
///
/// # Safety
/// As [`skm_recover_heavy`].
#[no_mangle]
pub unsafe extern "C" fn skm_multi_pass_topk(
    a: *const SkmMatrix,
    b: *const SkmMatrix,
    k: usize,
    s: usize,
    z: f64,
    opts: *const SkmGroupOptions,
    out: *mut *mut SkmEntryList,
) -> SkmStatus {
    guard(|| {
        let found = multi_pass_topk(&deref(a, "a")?.0, &deref(b, "b")?.0, k, s, z, &options(opts))?;
        write_out(out, Box::into_raw(Box::new(SkmEntryList(found))))
    })
}

/// # Safety
/// `list` must be a live list or null.
#[no_mangle]
pub unsafe extern "C" fn skm_entry_list_len(list: *const SkmEntryList) -> usize {
    list.as_ref().map_or(0, |l| l.0.len())
}

/// # Safety
/// `list` must be a live list or null; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn skm_entry_list_get(list: *const SkmEntryList, index: usize, out: *mut SkmEntry) -> SkmStatus {
    guard(|| {
        let l = deref(list, "entry list")?;
        let e = l.0.get(index).ok_or_else(|| {
            Failure(SkmStatus::OutOfRange, format!("entry {index} of a list holding {}", l.0.len()))
        })?;
        write_out(
            out,
            SkmEntry {
                row: e.row,
                col: e.col,
                weight: e.weight,
                prime: e.prime,
                residue: e.residue,
            },
        )
    })
}

/// # Safety
/// `list` must come from this library and not be freed twice; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn skm_entry_list_free(list: *mut SkmEntryList) {
    if !list.is_null() {
        drop(Box::from_raw(list));
    }
}
