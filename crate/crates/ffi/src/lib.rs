//! C ABI over `qha-core`.
//!
//! Objects are opaque heap handles created by `qha_*_new`-style functions and released with the
//! matching `qha_*_free`. Every entry point returns a [`QhaStatus`]; on failure the message is
//! kept per thread and read back with [`qha_last_error`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use qha_core::operator::{random_state, FiniteRankOperator, LinearOperator};
use qha_core::quantization::{op_tau, tau_wigner_op, TauSymbol};
use qha_core::schwartz::{schwartz_score, Verdict, WeightParam};
use qha_core::{GridSpec, PhaseSpaceFunction, QhaError, Signal, Tau};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QhaStatus {
    Ok = 0,
    /// A required pointer argument was null.
    Null = 1,
    InvalidArgument = 2,
    GridMismatch = 3,
    Guardrail = 4,
    /// An internal panic was caught.
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QhaVerdict {
    SchwartzConsistent = 0,
    NotSchwartzConsistent = 1,
}

/// A sampled signal on a periodized grid.
pub struct QhaSignal {
    inner: Signal,
}

/// A finite-rank operator `sum f_n (x) g_n`.
pub struct QhaOperator {
    inner: FiniteRankOperator,
}

/// A function on the phase-space lattice, stored row-major over (x index, omega index).
pub struct QhaPsf {
    inner: PhaseSpaceFunction,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &QhaError) -> QhaStatus {
    match e {
        QhaError::GridMismatch(_) | QhaError::ShapeMismatch(_) => QhaStatus::GridMismatch,
        QhaError::Guardrail(_) | QhaError::RankTooLarge { .. } => QhaStatus::Guardrail,
        _ => QhaStatus::InvalidArgument,
    }
}

enum Fail {
    Null(&'static str),
    Qha(QhaError),
}

impl From<QhaError> for Fail {
    fn from(e: QhaError) -> Self {
        Fail::Qha(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> QhaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            QhaStatus::Ok
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            QhaStatus::Null
        }
        Ok(Err(Fail::Qha(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            QhaStatus::Panic
        }
    }
}

unsafe fn href<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn hmut<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn clear<T>(out: *mut *mut T) {
    if !out.is_null() {
        *out = ptr::null_mut();
    }
}

unsafe fn read_complex(re: *const f64, im: *const f64, len: usize) -> Result<Vec<Complex64>, Fail> {
    if re.is_null() {
        return Err(Fail::Null("re"));
    }
    if im.is_null() {
        return Err(Fail::Null("im"));
    }
    let (re, im) = (std::slice::from_raw_parts(re, len), std::slice::from_raw_parts(im, len));
    Ok(re.iter().zip(im).map(|(a, b)| Complex64::new(*a, *b)).collect())
}

unsafe fn write_complex(values: &[Complex64], re: *mut f64, im: *mut f64, cap: usize) -> Result<(), Fail> {
    if re.is_null() {
        return Err(Fail::Null("re"));
    }
    if im.is_null() {
        return Err(Fail::Null("im"));
    }
    if cap < values.len() {
        return Err(QhaError::InvalidArgument(format!("buffer holds {cap} values, {} needed", values.len())).into());
    }
    let (re, im) = (std::slice::from_raw_parts_mut(re, cap), std::slice::from_raw_parts_mut(im, cap));
    for (i, v) in values.iter().enumerate() {
        re[i] = v.re;
        im[i] = v.im;
    }
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qha_version() -> *const c_char {
    static VERSION: &[u8] = concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes();
    VERSION.as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated, always
/// NUL-terminated when `cap > 0`). Returns the full message length without the terminator.
///
/// # Safety
/// `buf` must be null or valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn qha_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// New signal on the grid `(n, l)` from `n` real and `n` imaginary parts.
///
/// # Safety
/// `re` and `im` must be valid for `n` reads; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qha_signal_new(
    n: usize,
    l: f64,
    re: *const f64,
    im: *const f64,
    out: *mut *mut QhaSignal,
) -> QhaStatus {
    clear(out);
    guard(|| {
        let grid = GridSpec::new(n, l)?;
        let values = read_complex(re, im, n)?;
        put(out, QhaSignal { inner: Signal::new(grid, values)? })
    })
}

/// The unit-norm Gaussian `2^(1/4) exp(-pi t^2)` sampled on `(n, l)`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qha_signal_gaussian(n: usize, l: f64, out: *mut *mut QhaSignal) -> QhaStatus {
    clear(out);
    guard(|| {
        let grid = GridSpec::new(n, l)?;
        put(out, QhaSignal { inner: qha_core::tfa::gaussian(grid).normalized()? })
    })
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `sig` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qha_signal_len(sig: *const QhaSignal) -> usize {
    sig.as_ref().map_or(0, |s| s.inner.values().len())
}

/// # Safety
/// `re` and `im` must be valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn qha_signal_values(sig: *const QhaSignal, re: *mut f64, im: *mut f64, cap: usize) -> QhaStatus {
    guard(|| write_complex(href(sig, "signal")?.inner.values(), re, im, cap))
}

/// # Safety
/// `sig` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qha_signal_free(sig: *mut QhaSignal) {
    if !sig.is_null() {
        drop(Box::from_raw(sig));
    }
}

/// The rank-one operator `f (x) g`, i.e. `psi -> <psi, g> f`.
///
/// # Safety
/// Handles must be live; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qha_operator_rank_one(
    f: *const QhaSignal,
    g: *const QhaSignal,
    out: *mut *mut QhaOperator,
) -> QhaStatus {
    clear(out);
    guard(|| {
        let op = FiniteRankOperator::rank_one(&href(f, "f")?.inner, &href(g, "g")?.inner)?;
        put(out, QhaOperator { inner: op })
    })
}

/// Seeded random positive state of the given rank with unit trace.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qha_operator_random_state(
    n: usize,
    l: f64,
    rank: usize,
    seed: u64,
    out: *mut *mut QhaOperator,
) -> QhaStatus {
    clear(out);
    guard(|| {
        let grid = GridSpec::new(n, l)?;
        put(out, QhaOperator { inner: random_state(grid, rank, seed)? })
    })
}

/// Appends the term `f (x) g`.
///
/// # Safety
/// Handles must be live.
#[no_mangle]
pub unsafe extern "C" fn qha_operator_push(op: *mut QhaOperator, f: *const QhaSignal, g: *const QhaSignal) -> QhaStatus {
    guard(|| {
        let op = hmut(op, "op")?;
        op.inner.push(href(f, "f")?.inner.clone(), href(g, "g")?.inner.clone())?;
        Ok(())
    })
}

/// # Safety
/// `op` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qha_operator_rank(op: *const QhaOperator) -> usize {
    op.as_ref().map_or(0, |o| o.inner.rank())
}

/// Trace `sum <f_n, g_n>`.
///
/// # Safety
/// `re` and `im` must be valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn qha_operator_trace(op: *const QhaOperator, re: *mut f64, im: *mut f64) -> QhaStatus {
    guard(|| {
        let t = href(op, "op")?.inner.trace_terms();
        write_complex(&[t], re, im, 1)
    })
}

/// # Safety
/// `op` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qha_operator_free(op: *mut QhaOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

fn tau(v: f64) -> Result<Tau, Fail> {
    Ok(Tau::new(v)?)
}

/// `W_tau S` on the phase-space lattice.
///
/// # Safety
/// `op` must be live; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qha_tau_wigner(op: *const QhaOperator, tau_value: f64, out: *mut *mut QhaPsf) -> QhaStatus {
    clear(out);
    guard(|| {
        let w = tau_wigner_op(&href(op, "op")?.inner, tau(tau_value)?);
        put(out, QhaPsf { inner: w.into_values() })
    })
}

/// Cross distribution `W_tau(f, g)`.
///
/// # Safety
/// Handles must be live; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qha_cross_tau_wigner(
    f: *const QhaSignal,
    g: *const QhaSignal,
    tau_value: f64,
    out: *mut *mut QhaPsf,
) -> QhaStatus {
    clear(out);
    guard(|| {
        let w = qha_core::tfa::cross_tau_wigner(&href(f, "f")?.inner, &href(g, "g")?.inner, tau(tau_value)?)?;
        put(out, QhaPsf { inner: w })
    })
}

/// Operator convolution `S * T`.
///
/// # Safety
/// Handles must be live; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qha_conv_op_op(
    s: *const QhaOperator,
    t: *const QhaOperator,
    out: *mut *mut QhaPsf,
) -> QhaStatus {
    clear(out);
    guard(|| {
        let c = qha_core::conv::conv_op_op(&href(s, "s")?.inner, &href(t, "t")?.inner)?;
        put(out, QhaPsf { inner: c })
    })
}

/// `Op_tau(a)` as a finite-rank operator; singular values below `svd_tol` times the largest
/// are dropped.
///
/// # Safety
/// `a` must be live; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qha_quantize(
    a: *const QhaPsf,
    tau_value: f64,
    svd_tol: f64,
    out: *mut *mut QhaOperator,
) -> QhaStatus {
    clear(out);
    guard(|| {
        let t = tau(tau_value)?;
        if !(svd_tol.is_finite() && svd_tol >= 0.0) {
            return Err(QhaError::InvalidArgument(format!("svd_tol must be >= 0, got {svd_tol}")).into());
        }
        let k = op_tau(&TauSymbol::new(href(a, "a")?.inner.clone(), t), t)?;
        put(out, QhaOperator { inner: k.to_finite_rank(svd_tol) })
    })
}

/// New phase-space function on `(n, l)` from `n * n` real and imaginary parts.
///
/// # Safety
/// `re` and `im` must be valid for `n * n` reads; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qha_psf_new(n: usize, l: f64, re: *const f64, im: *const f64, out: *mut *mut QhaPsf) -> QhaStatus {
    clear(out);
    guard(|| {
        let grid = GridSpec::new(n, l)?;
        let values = read_complex(re, im, n * n)?;
        put(out, QhaPsf { inner: PhaseSpaceFunction::new(grid, values)? })
    })
}

/// Grid size `N` (the function has `N * N` values), or 0 for a null handle.
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qha_psf_n(f: *const QhaPsf) -> usize {
    f.as_ref().map_or(0, |p| p.inner.n())
}

/// # Safety
/// `re` and `im` must be valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn qha_psf_values(f: *const QhaPsf, re: *mut f64, im: *mut f64, cap: usize) -> QhaStatus {
    guard(|| write_complex(href(f, "psf")?.inner.values(), re, im, cap))
}

/// # Safety
/// `f` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qha_psf_free(f: *mut QhaPsf) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Weighted-norm score of `W_tau S` over `s_len` exponents. Writes the fitted slope, the
/// threshold used and the verdict. `slope_fraction <= 0` selects the default rule.
///
/// # Safety
/// `s_list` must be valid for `s_len` reads; the output pointers for one write each.
#[no_mangle]
pub unsafe extern "C" fn qha_schwartz_score(
    op: *const QhaOperator,
    s_list: *const f64,
    s_len: usize,
    tau_value: f64,
    slope_fraction: f64,
    slope: *mut f64,
    threshold: *mut f64,
    verdict: *mut QhaVerdict,
) -> QhaStatus {
    guard(|| {
        let op = href(op, "op")?;
        if s_list.is_null() {
            return Err(Fail::Null("s_list"));
        }
        if slope.is_null() || threshold.is_null() || verdict.is_null() {
            return Err(Fail::Null("output"));
        }
        let ws = std::slice::from_raw_parts(s_list, s_len)
            .iter()
            .map(|v| WeightParam::new(*v))
            .collect::<Result<Vec<_>, _>>()?;
        let frac = (slope_fraction > 0.0).then_some(slope_fraction);
        let rep = schwartz_score(&op.inner, &ws, tau(tau_value)?, frac)?;
        *slope = rep.slope.unwrap_or(f64::NAN);
        *threshold = rep.slope_threshold.unwrap_or(f64::NAN);
        *verdict = match rep.verdict {
            Verdict::SchwartzConsistent => QhaVerdict::SchwartzConsistent,
            _ => QhaVerdict::NotSchwartzConsistent,
        };
        Ok(())
    })
}

/// Grid size of an operator, or 0 for a null handle.
///
/// # Safety
/// `op` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qha_operator_n(op: *const QhaOperator) -> usize {
    op.as_ref().map_or(0, |o| LinearOperator::grid(&o.inner).n())
}

#[doc(hidden)]
pub fn last_error_string() -> String {
    LAST_ERROR.with(|e| e.borrow().clone())
}

#[doc(hidden)]
pub fn version_str() -> &'static str {
    // SAFETY: qha_version returns a static NUL-terminated string.
    unsafe { CStr::from_ptr(qha_version()) }.to_str().unwrap_or("")
}
