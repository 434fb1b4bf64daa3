//! C ABI over `lambda-forge`.
//!
//! Every function returns an [`LfStatus`] and writes results through out
//! pointers. On failure the message is kept per thread and can be read with
//! [`lf_last_error_message`]. Contexts are opaque handles released with
//! [`lf_context_free`]; strings returned by the library are released with
//! [`lf_string_free`]. Panics are caught at the boundary and reported as
//! `LF_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lambda_forge::config::RunConfig;
use lambda_forge::curves::{CurveModel, PointCountConfig};
use lambda_forge::density::exact_densities;
use lambda_forge::forms::{CertifiedInputs, FormContext};
use lambda_forge::iwasawa::{compute_s_ell, DEFAULT_S_ELL_CAP};
use lambda_forge::levels::{carayol_check, plan_target_lambda, DEFAULT_FACTOR_BOUND};
use lambda_forge::residual::{classify_prime, Verdict};
use lambda_forge::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Config = 4,
    HypothesisViolation = 5,
    Coverage = 6,
    Scarcity = 7,
    Overflow = 8,
    ResourceLimit = 9,
    Parse = 10,
    MissingData = 11,
    NotMultipleOfLevel = 12,
    Unfactorable = 13,
    Io = 14,
    Internal = 15,
    Panic = 16,
}

impl From<&Error> for LfStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidArgument(_) => LfStatus::InvalidArgument,
            Error::ResourceLimit(_) => LfStatus::ResourceLimit,
            Error::Overflow(_) => LfStatus::Overflow,
            Error::Parse { .. } | Error::Validation { .. } => LfStatus::Parse,
            Error::Config(_) => LfStatus::Config,
            Error::Coverage { .. } => LfStatus::Coverage,
            Error::HypothesisViolation(_) => LfStatus::HypothesisViolation,
            Error::MissingData(_) => LfStatus::MissingData,
            Error::Scarcity { .. } => LfStatus::Scarcity,
            Error::NotMultipleOfLevel { .. } => LfStatus::NotMultipleOfLevel,
            Error::Unfactorable(_) => LfStatus::Unfactorable,
            Error::Io(_) => LfStatus::Io,
            Error::Internal(_) => LfStatus::Internal,
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LfVerdict {
    PiMember = 0,
    OmegaMember = 1,
    #[default]
    Neither = 2,
}

/// Certified hypotheses about the newform, taken on trust.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct LfInputs {
    pub p: u64,
    pub lambda_g: u32,
    pub mu_zero: bool,
    pub surjective_mod_p: bool,
    pub optimal_level_asserted: bool,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LfFrobeniusClass {
    pub ell: u64,
    pub trace_mod_p: u64,
    pub det_mod_p: u64,
    pub verdict: LfVerdict,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LfRatio {
    pub numer: u64,
    pub denom: u64,
}

/// Opaque handle to a newform context.
pub struct LfContext {
    ctx: FormContext,
    s_cap: u32,
    factor_bound: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn fail(status: LfStatus, message: impl Into<String>) -> LfStatus {
    set_last_error(message.into());
    status
}

fn guard(body: impl FnOnce() -> Result<(), LfStatus>) -> LfStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => LfStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let what = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(LfStatus::Panic, format!("panic: {what}"))
        }
    }
}

fn lift<T>(r: lambda_forge::Result<T>) -> Result<T, LfStatus> {
    r.map_err(|e| fail(LfStatus::from(&e), e.to_string()))
}

fn non_null<T>(ptr: *const T, name: &str) -> Result<(), LfStatus> {
    if ptr.is_null() {
        Err(fail(LfStatus::NullPointer, format!("{name} is NULL")))
    } else {
        Ok(())
    }
}

unsafe fn context_ref<'a>(ctx: *const LfContext) -> Result<&'a LfContext, LfStatus> {
    non_null(ctx, "context")?;
    Ok(unsafe { &*ctx })
}

unsafe fn write_string(out: *mut *mut c_char, text: String) -> Result<(), LfStatus> {
    let s =
        CString::new(text).map_err(|_| fail(LfStatus::Internal, "output contains a NUL byte"))?;
    unsafe { *out = s.into_raw() };
    Ok(())
}

fn json_error(e: serde_json::Error) -> LfStatus {
    fail(LfStatus::Internal, format!("serializing: {e}"))
}

fn boxed(ctx: FormContext, s_cap: u32, factor_bound: u64) -> *mut LfContext {
    Box::into_raw(Box::new(LfContext {
        ctx,
        s_cap,
        factor_bound,
    }))
}

/// Loads a TOML run configuration and builds its context.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lf_context_from_config_file(
    path: *const c_char,
    out: *mut *mut LfContext,
) -> LfStatus {
    guard(|| {
        non_null(path, "path")?;
        non_null(out, "out")?;
        let path = unsafe { CStr::from_ptr(path) }
            .to_str()
            .map_err(|_| fail(LfStatus::InvalidUtf8, "path is not valid UTF-8"))?;
        let cfg = lift(RunConfig::load(path))?;
        let ctx = lift(cfg.context())?;
        unsafe { *out = boxed(ctx, cfg.s_ell_cap, cfg.factor_bound) };
        Ok(())
    })
}

/// Builds a context from a Weierstrass model `[a1, a2, a3, a4, a6]` and its
/// conductor, with default tuning.
///
/// # Safety
/// `coeffs` must point to five `int64_t` values and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lf_context_from_curve(
    coeffs: *const i64,
    conductor: u64,
    inputs: LfInputs,
    out: *mut *mut LfContext,
) -> LfStatus {
    guard(|| {
        non_null(coeffs, "coeffs")?;
        non_null(out, "out")?;
        let mut a = [0i64; 5];
        a.copy_from_slice(unsafe { std::slice::from_raw_parts(coeffs, 5) });
        let curve = lift(CurveModel::new(a, conductor))?;
        let inputs = CertifiedInputs {
            p: inputs.p,
            lambda_g: inputs.lambda_g,
            mu_zero: inputs.mu_zero,
            surjective_mod_p: inputs.surjective_mod_p,
            optimal_level_asserted: inputs.optimal_level_asserted,
        };
        let ctx = lift(FormContext::from_curve(
            curve,
            PointCountConfig::default(),
            inputs,
        ))?;
        unsafe { *out = boxed(ctx, DEFAULT_S_ELL_CAP, DEFAULT_FACTOR_BOUND) };
        Ok(())
    })
}

/// # Safety
/// `ctx` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lf_context_free(ctx: *mut LfContext) {
    if !ctx.is_null() {
        drop(unsafe { Box::from_raw(ctx) });
    }
}

/// `a_ell` of the context's form at a prime `ell ∤ N_g p`.
///
/// # Safety
/// `ctx` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lf_a_ell(ctx: *const LfContext, ell: u64, out: *mut i64) -> LfStatus {
    guard(|| {
        let ctx = unsafe { context_ref(ctx) }?;
        non_null(out, "out")?;
        let a = lift(ctx.ctx.a_ell(ell))?;
        unsafe { *out = a };
        Ok(())
    })
}

/// # Safety
/// `ctx` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lf_classify_prime(
    ctx: *const LfContext,
    ell: u64,
    out: *mut LfFrobeniusClass,
) -> LfStatus {
    guard(|| {
        let ctx = unsafe { context_ref(ctx) }?;
        non_null(out, "out")?;
        let class = lift(classify_prime(&ctx.ctx, ell))?;
        let verdict = match class.verdict {
            Verdict::PiMember => LfVerdict::PiMember,
            Verdict::OmegaMember => LfVerdict::OmegaMember,
            Verdict::Neither => LfVerdict::Neither,
        };
        unsafe {
            *out = LfFrobeniusClass {
                ell: class.ell,
                trace_mod_p: class.trace_mod_p,
                det_mod_p: class.det_mod_p,
                verdict,
            }
        };
        Ok(())
    })
}

/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lf_compute_s_ell(p: u64, ell: u64, cap: u32, out: *mut u64) -> LfStatus {
    guard(|| {
        non_null(out, "out")?;
        let s = lift(compute_s_ell(p, ell, cap))?;
        unsafe { *out = s };
        Ok(())
    })
}

/// The exact densities of the Pi and Omega prime sets for `p`, reduced.
///
/// # Safety
/// `pi` and `omega` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lf_exact_densities(
    p: u64,
    pi: *mut LfRatio,
    omega: *mut LfRatio,
) -> LfStatus {
    guard(|| {
        non_null(pi, "pi")?;
        non_null(omega, "omega")?;
        let (a, b) = lift(exact_densities(p))?;
        unsafe {
            *pi = LfRatio {
                numer: *a.numer(),
                denom: *a.denom(),
            };
            *omega = LfRatio {
                numer: *b.numer(),
                denom: *b.denom(),
            };
        }
        Ok(())
    })
}

/// Plans a level set reaching `target_lambda` with `omega_count` Omega
/// primes, scanning primes up to `scan_bound`. Writes the level set as JSON.
///
/// # Safety
/// `ctx` and `out` must be valid. Free the string with [`lf_string_free`].
#[no_mangle]
pub unsafe extern "C" fn lf_plan_json(
    ctx: *const LfContext,
    target_lambda: u32,
    omega_count: usize,
    scan_bound: u64,
    out: *mut *mut c_char,
) -> LfStatus {
    guard(|| {
        let ctx = unsafe { context_ref(ctx) }?;
        non_null(out, "out")?;
        let set = lift(plan_target_lambda(
            &ctx.ctx,
            target_lambda,
            omega_count,
            scan_bound,
            ctx.s_cap,
        ))?;
        unsafe { write_string(out, serde_json::to_string(&set).map_err(json_error)?) }
    })
}

/// Carayol admissibility of a proposed level, as JSON.
///
/// # Safety
/// `ctx` and `out` must be valid. Free the string with [`lf_string_free`].
#[no_mangle]
pub unsafe extern "C" fn lf_carayol_json(
    ctx: *const LfContext,
    level: u64,
    out: *mut *mut c_char,
) -> LfStatus {
    guard(|| {
        let ctx = unsafe { context_ref(ctx) }?;
        non_null(out, "out")?;
        let report = lift(carayol_check(&ctx.ctx, level, ctx.factor_bound))?;
        unsafe { write_string(out, serde_json::to_string(&report).map_err(json_error)?) }
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// The last error message on this thread, or NULL after a successful call.
/// The pointer stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn lf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}
