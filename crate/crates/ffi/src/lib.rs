//! C ABI for `quadext`.
//!
//! Objects are opaque handles created by `qx_*_new` (or
//! `qx_instance_from_json`) and released by the matching `qx_*_free`.
//! Matrices are passed as row-major `double` arrays. Every function that can
//! fail returns a [`QxStatus`]; the message for the most recent failure on
//! the calling thread is available from [`qx_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use quadext::instance::InstanceFile;
use quadext::verify::{verify_extension, VerifyOptions};
use quadext::{Error, ExtensionReport, InnerProduct, QuadOnSubspace, Subspace, SymForm, TwoEllipsoidSpace};

/// Status codes. The first four match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QxStatus {
    Ok = 0,
    InvalidInput = 1,
    VerificationFailed = 2,
    DegenerateZ = 3,
    NullPointer = 4,
    Infeasible = 5,
    Internal = 6,
    Panic = 7,
}

/// A two-ellipsoid space `(ℝⁿ, Π₁, Π₂)`.
pub struct QxSpace(TwoEllipsoidSpace);

/// A 2-polynomial on a subspace: basis rows plus the form in that basis.
pub struct QxQuad(QuadOnSubspace);

/// Result of `qx_extend`.
pub struct QxExtension(ExtensionReport);

/// Norm with its sandwich certificate.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QxNorm {
    pub value: f64,
    /// Upper end of the bisection bracket, where the certificate holds.
    pub upper: f64,
    pub alpha: f64,
    pub beta: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QxVerification {
    pub restriction_residual: f64,
    pub original_norm: f64,
    pub extended_norm: f64,
    pub sampled_lower_bound: f64,
    /// 1 if every check passed, 0 otherwise.
    pub passed: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let text = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn status_of(e: &Error) -> QxStatus {
    match e {
        Error::InvalidInput(_)
        | Error::DimensionMismatch { .. }
        | Error::NotPositiveDefinite { .. }
        | Error::RankDeficient { .. } => QxStatus::InvalidInput,
        Error::Infeasible { .. } | Error::HypothesisViolated { .. } => QxStatus::Infeasible,
        Error::DegenerateZ { .. } => QxStatus::DegenerateZ,
        Error::VerificationFailed(_) => QxStatus::VerificationFailed,
        Error::Internal(_) => QxStatus::Internal,
    }
}

enum Failure {
    Lib(Error),
    Null(&'static str),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> QxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            QxStatus::Ok
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(name))) => {
            set_error(&format!("{name} is null"));
            QxStatus::NullPointer
        }
        Ok(Err(Failure::Input(msg))) => {
            set_error(&msg);
            QxStatus::InvalidInput
        }
        Err(_) => {
            set_error("internal panic");
            QxStatus::Panic
        }
    }
}

fn non_null<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    // SAFETY: callers pass handles obtained from this library or null.
    unsafe { p.as_ref() }.ok_or(Failure::Null(name))
}

fn slice<'a>(p: *const f64, len: usize, name: &'static str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    // SAFETY: the caller guarantees `len` readable doubles at `p`.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

fn matrix(p: *const f64, rows: usize, cols: usize, name: &'static str) -> Result<nalgebra::DMatrix<f64>, Failure> {
    let data = slice(p, rows * cols, name)?;
    Ok(nalgebra::DMatrix::from_row_slice(rows, cols, data))
}

fn write_out<T>(out: *mut *mut T, value: T, name: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(name));
    }
    // SAFETY: `out` is a valid pointer to a handle slot.
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

/// Nulls the handle slot so it stays null on every failure path.
///
/// # Safety
/// `out` must be null or writable.
unsafe fn clear<T>(out: *mut *mut T) {
    if !out.is_null() {
        *out = ptr::null_mut();
    }
}

/// Message describing the last failure on this thread (empty after a
/// success). Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn qx_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qx_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a space from two `n×n` positive-definite matrices.
///
/// # Safety
/// `pi1` and `pi2` must point to `n*n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qx_space_new(n: usize, pi1: *const f64, pi2: *const f64, out: *mut *mut QxSpace) -> QxStatus {
    clear(out);
    guard(|| {
        if n == 0 {
            return Err(Failure::Input("dimension must be at least 1".into()));
        }
        let a1 = InnerProduct::new(SymForm::new(matrix(pi1, n, n, "pi1")?)?)?;
        let a2 = InnerProduct::new(SymForm::new(matrix(pi2, n, n, "pi2")?)?)?;
        write_out(out, QxSpace(TwoEllipsoidSpace::new(a1, a2)?), "out")
    })
}

/// # Safety
/// `space` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qx_space_free(space: *mut QxSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// # Safety
/// `space` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qx_space_dim(space: *const QxSpace) -> usize {
    space.as_ref().map_or(0, |s| s.0.dim())
}

/// Builds a 2-polynomial on the span of the `k` rows of `basis` (`k×n`) with
/// the `k×k` matrix `form` in that basis.
///
/// # Safety
/// `basis` must point to `k*n` doubles, `form` to `k*k`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qx_quad_new(
    n: usize,
    k: usize,
    basis: *const f64,
    form: *const f64,
    out: *mut *mut QxQuad,
) -> QxStatus {
    clear(out);
    guard(|| {
        if k == 0 || k > n {
            return Err(Failure::Input(format!("subspace dimension {k} must be in 1..={n}")));
        }
        let sub = Subspace::new(matrix(basis, k, n, "basis")?)?;
        let f = SymForm::new(matrix(form, k, k, "form")?)?;
        write_out(out, QxQuad(QuadOnSubspace::new(sub, f)?), "out")
    })
}

/// # Safety
/// `quad` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qx_quad_free(quad: *mut QxQuad) {
    if !quad.is_null() {
        drop(Box::from_raw(quad));
    }
}

/// Parses an instance document (the CLI's JSON format).
///
/// # Safety
/// `json` must be a NUL-terminated string; `space` and `quad` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qx_instance_from_json(
    json: *const c_char,
    space: *mut *mut QxSpace,
    quad: *mut *mut QxQuad,
) -> QxStatus {
    clear(space);
    clear(quad);
    guard(|| {
        if json.is_null() {
            return Err(Failure::Null("json"));
        }
        if space.is_null() || quad.is_null() {
            return Err(Failure::Null("out"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Failure::Input(format!("json is not UTF-8: {e}")))?;
        let inst = quadext::instance::from_json::<InstanceFile>(text)?.validate()?;
        write_out(space, QxSpace(inst.space), "space")?;
        write_out(quad, QxQuad(inst.p), "quad")
    })
}

/// Norm of `quad` in `space`. If `witness` is non-null it receives a vector
/// of length `dim` attaining (nearly) the norm.
///
/// # Safety
/// Handles must be live; `out` writable; `witness` null or `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn qx_norm(
    space: *const QxSpace,
    quad: *const QxQuad,
    tol: f64,
    out: *mut QxNorm,
    witness: *mut f64,
) -> QxStatus {
    guard(|| {
        let s = non_null(space, "space")?;
        let q = non_null(quad, "quad")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let r = quadext::norm_on_subspace(&q.0, &s.0, tol)?;
        *out = QxNorm {
            value: r.value,
            upper: r.upper,
            alpha: r.certificate.alpha,
            beta: r.certificate.beta,
        };
        if !witness.is_null() {
            std::slice::from_raw_parts_mut(witness, r.lower_witness.len()).copy_from_slice(r.lower_witness.as_slice());
        }
        Ok(())
    })
}

/// Norm-preserving extension of `quad` to the whole space.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qx_extend(
    space: *const QxSpace,
    quad: *const QxQuad,
    tol: f64,
    out: *mut *mut QxExtension,
) -> QxStatus {
    clear(out);
    guard(|| {
        let s = non_null(space, "space")?;
        let q = non_null(quad, "quad")?;
        write_out(out, QxExtension(quadext::extend(&s.0, &q.0, tol)?), "out")
    })
}

/// # Safety
/// `ext` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qx_extension_free(ext: *mut QxExtension) {
    if !ext.is_null() {
        drop(Box::from_raw(ext));
    }
}

/// # Safety
/// `ext` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qx_extension_dim(ext: *const QxExtension) -> usize {
    ext.as_ref().map_or(0, |e| e.0.extended.dim())
}

/// Number of hyperplane steps taken.
///
/// # Safety
/// `ext` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qx_extension_steps(ext: *const QxExtension) -> usize {
    ext.as_ref().map_or(0, |e| e.0.steps.len())
}

/// Copies the extended `dim×dim` matrix (row-major) into `out`, which holds
/// `len` doubles.
///
/// # Safety
/// `ext` must be live; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qx_extension_matrix(ext: *const QxExtension, out: *mut f64, len: usize) -> QxStatus {
    guard(|| {
        let e = non_null(ext, "ext")?;
        let n = e.0.extended.dim();
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        if len < n * n {
            return Err(Failure::Input(format!("buffer holds {len} doubles, need {}", n * n)));
        }
        let dst = std::slice::from_raw_parts_mut(out, n * n);
        let m = e.0.extended.matrix();
        for i in 0..n {
            for j in 0..n {
                dst[i * n + j] = m[(i, j)];
            }
        }
        Ok(())
    })
}

/// Norms of the original 2-polynomial and of its extension, and the
/// restriction residual. Any output pointer may be null.
///
/// # Safety
/// `ext` must be live; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn qx_extension_norms(
    ext: *const QxExtension,
    original: *mut f64,
    extended: *mut f64,
    residual: *mut f64,
) -> QxStatus {
    guard(|| {
        let e = non_null(ext, "ext")?;
        for (p, v) in [
            (original, e.0.original_norm.value),
            (extended, e.0.extended_norm.value),
            (residual, e.0.agreement_residual),
        ] {
            if let Some(slot) = p.as_mut() {
                *slot = v;
            }
        }
        Ok(())
    })
}

/// Independent check of a candidate extension `btilde` (`dim×dim`,
/// row-major). Returns `QX_STATUS_OK` when the check ran; see `out->passed`.
///
/// # Safety
/// Handles must be live; `btilde` must hold `dim*dim` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qx_verify(
    space: *const QxSpace,
    quad: *const QxQuad,
    btilde: *const f64,
    samples: usize,
    seed: u64,
    out: *mut QxVerification,
) -> QxStatus {
    guard(|| {
        let s = non_null(space, "space")?;
        let q = non_null(quad, "quad")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let n = s.0.dim();
        let b = SymForm::new(matrix(btilde, n, n, "btilde")?)?;
        let opts = VerifyOptions {
            samples: samples.max(1),
            seed,
            ..VerifyOptions::default()
        };
        let v = verify_extension(&s.0, &q.0, &b, &opts)?;
        *out = QxVerification {
            restriction_residual: v.restriction_residual,
            original_norm: v.original_norm,
            extended_norm: v.extended_norm,
            sampled_lower_bound: v.sampled_lower_bound,
            passed: i32::from(v.passed()),
        };
        Ok(())
    })
}
