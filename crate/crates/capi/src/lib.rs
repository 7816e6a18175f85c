//! C interface over the core library: opaque context handle, integer status
//! codes, and a thread-local message for the last failure. The matching
//! declarations live in include/patternsieve.h.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use num::rational::BigRational;
use patternsieve::admissible::AdmissibleTuple;
use patternsieve::arith::ratio;
use patternsieve::error::Error;
use patternsieve::scanner::{find_pattern_hits, scan_rough};
use patternsieve::sums::window_sums;
use patternsieve::variational::{combine_basis, optimize_mk, symmetric_basis};
use patternsieve::weights::{build_params, float_context, WeightContext};

pub const PATTERNSIEVE_OK: i32 = 0;
pub const PATTERNSIEVE_ERR_INVALID: i32 = 1;
pub const PATTERNSIEVE_ERR_NOT_FOUND: i32 = 2;
pub const PATTERNSIEVE_ERR_BUDGET: i32 = 3;
pub const PATTERNSIEVE_ERR_DEGENERATE: i32 = 4;
pub const PATTERNSIEVE_ERR_NULL: i32 = 5;
pub const PATTERNSIEVE_ERR_PANIC: i32 = 6;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let cleaned: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(cleaned).unwrap();
    });
}

fn status_of(e: &Error) -> i32 {
    match e {
        Error::TupleNotFound { .. } | Error::NoValidResidue { .. } => PATTERNSIEVE_ERR_NOT_FOUND,
        Error::WindowTooLarge { .. } | Error::TooManySubsets { .. } => PATTERNSIEVE_ERR_BUDGET,
        Error::DegenerateBasis | Error::DegenerateF => PATTERNSIEVE_ERR_DEGENERATE,
        _ => PATTERNSIEVE_ERR_INVALID,
    }
}

/// Run a fallible body behind a panic guard, translating both error paths.
fn guarded(body: impl FnOnce() -> Result<(), (i32, String)>) -> i32 {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            PATTERNSIEVE_OK
        }
        Ok(Err((code, msg))) => {
            set_error(&msg);
            code
        }
        Err(_) => {
            set_error("internal panic");
            PATTERNSIEVE_ERR_PANIC
        }
    }
}

fn app_err(e: Error) -> (i32, String) {
    (status_of(&e), e.to_string())
}

fn null_err(what: &str) -> (i32, String) {
    (PATTERNSIEVE_ERR_NULL, format!("{what} is null"))
}

/// Opaque state: validated parameters plus the weight engine for one tuple.
pub struct PatternsieveCtx {
    ctx: WeightContext<f64>,
    r_k: u64,
}

unsafe fn slice_arg<'a>(ptr: *const u64, len: usize) -> Option<&'a [u64]> {
    if len == 0 {
        Some(&[])
    } else if ptr.is_null() {
        None
    } else {
        Some(slice::from_raw_parts(ptr, len))
    }
}

fn parse_ratio(num: i64, den: i64, what: &str) -> Result<BigRational, (i32, String)> {
    if den == 0 {
        return Err((
            PATTERNSIEVE_ERR_INVALID,
            format!("{what} denominator is zero"),
        ));
    }
    Ok(ratio(num, den))
}

/// Version string of the underlying library; static storage.
#[no_mangle]
pub extern "C" fn patternsieve_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for the most recent failure on this thread; empty on success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn patternsieve_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Admissibility check. Writes 1/0 to `admissible`; when inadmissible,
/// `witness_prime` receives the covering prime, else 0.
///
/// # Safety
/// `offsets` must point to `k` readable u64 values; out-pointers must be
/// writable or null (null out-pointers are simply skipped).
#[no_mangle]
pub unsafe extern "C" fn patternsieve_check_admissible(
    offsets: *const u64,
    k: usize,
    admissible: *mut i32,
    witness_prime: *mut u64,
) -> i32 {
    guarded(|| {
        let offs = slice_arg(offsets, k).ok_or_else(|| null_err("offsets"))?;
        let tuple = AdmissibleTuple::new(offs.to_vec()).map_err(app_err)?;
        let verdict = tuple.verdict();
        if !admissible.is_null() {
            *admissible = i32::from(verdict.admissible);
        }
        if !witness_prime.is_null() {
            *witness_prime = verdict.witness_prime.unwrap_or(0);
        }
        Ok(())
    })
}

/// Maximize the sieve functional. Writes the certified lower bound and the
/// guaranteed prime count r_k.
///
/// # Safety
/// Out-pointers must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn patternsieve_optimize_mk(
    k: usize,
    degree: u32,
    theta_num: i64,
    theta_den: i64,
    m_lower: *mut f64,
    r_k: *mut u64,
) -> i32 {
    guarded(|| {
        let theta = parse_ratio(theta_num, theta_den, "theta")?;
        let result = optimize_mk(k, degree, &theta).map_err(app_err)?;
        if !m_lower.is_null() {
            *m_lower = result.m_lower_f64;
        }
        if !r_k.is_null() {
            *r_k = result.r_k;
        }
        Ok(())
    })
}

/// Build a weight context: validates the tuple, optimizes F at the given
/// basis level, and precomputes the weight tables. The handle must be
/// released with patternsieve_ctx_free.
///
/// # Safety
/// `offsets` must point to `k` readable u64 values and `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn patternsieve_ctx_new(
    offsets: *const u64,
    k: usize,
    n0: u64,
    d0: u64,
    theta_num: i64,
    theta_den: i64,
    epsilon_num: i64,
    epsilon_den: i64,
    c1_num: i64,
    c1_den: i64,
    f_degree: u32,
    out: *mut *mut PatternsieveCtx,
) -> i32 {
    guarded(|| {
        if out.is_null() {
            return Err(null_err("out"));
        }
        let offs = slice_arg(offsets, k).ok_or_else(|| null_err("offsets"))?;
        let theta = parse_ratio(theta_num, theta_den, "theta")?;
        let epsilon = parse_ratio(epsilon_num, epsilon_den, "epsilon")?;
        let c1 = parse_ratio(c1_num, c1_den, "c1")?;
        let tuple = AdmissibleTuple::new(offs.to_vec()).map_err(app_err)?;
        let opt = optimize_mk(k, f_degree, &theta).map_err(app_err)?;
        let basis = symmetric_basis(f_degree);
        let f = combine_basis(&basis, &opt.coefficients).to_polyf(k);
        let params = build_params(tuple, n0, theta, epsilon, d0, c1).map_err(app_err)?;
        let ctx = float_context(params, f).map_err(app_err)?;
        let boxed = Box::new(PatternsieveCtx { ctx, r_k: opt.r_k });
        *out = Box::into_raw(boxed);
        Ok(())
    })
}

/// Release a context handle. Null is a no-op.
///
/// # Safety
/// `ctx` must be a pointer from patternsieve_ctx_new, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn patternsieve_ctx_free(ctx: *mut PatternsieveCtx) {
    if !ctx.is_null() {
        drop(Box::from_raw(ctx));
    }
}

unsafe fn ctx_ref<'a>(ctx: *const PatternsieveCtx) -> Result<&'a PatternsieveCtx, (i32, String)> {
    ctx.as_ref().ok_or_else(|| null_err("ctx"))
}

/// Presieve modulus W.
///
/// # Safety
/// `ctx` must be a live handle; returns 0 on null.
#[no_mangle]
pub unsafe extern "C" fn patternsieve_ctx_w(ctx: *const PatternsieveCtx) -> u64 {
    ctx.as_ref().map_or(0, |c| c.ctx.params.w)
}

/// Residue class nu0 of the sieved progression.
///
/// # Safety
/// `ctx` must be a live handle; returns 0 on null.
#[no_mangle]
pub unsafe extern "C" fn patternsieve_ctx_nu0(ctx: *const PatternsieveCtx) -> u64 {
    ctx.as_ref().map_or(0, |c| c.ctx.params.nu0)
}

/// Support bound R.
///
/// # Safety
/// `ctx` must be a live handle; returns 0 on null.
#[no_mangle]
pub unsafe extern "C" fn patternsieve_ctx_r(ctx: *const PatternsieveCtx) -> f64 {
    ctx.as_ref().map_or(0.0, |c| c.ctx.params.r)
}

/// Primes guaranteed per tuple by the optimized bound.
///
/// # Safety
/// `ctx` must be a live handle; returns 0 on null.
#[no_mangle]
pub unsafe extern "C" fn patternsieve_ctx_rk(ctx: *const PatternsieveCtx) -> u64 {
    ctx.as_ref().map_or(0, |c| c.r_k)
}

/// Sieve weight at n (zero off the residue class).
///
/// # Safety
/// `ctx` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn patternsieve_weight(
    ctx: *const PatternsieveCtx,
    n: u64,
    out: *mut f64,
) -> i32 {
    guarded(|| {
        let c = ctx_ref(ctx)?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        *out = c.ctx.compute_weight(n).map_err(app_err)?;
        Ok(())
    })
}

/// Window sums over [lo, hi), mirroring the core engine field for field.
#[repr(C)]
pub struct PatternsieveSums {
    pub s1: f64,
    pub s1_minus: f64,
    pub s1_plus: f64,
    pub s2: f64,
    pub s2_plus: f64,
    pub s1_star: u64,
    pub steps: u64,
}

/// All window sums in one pass. `r_k` is the prime-count threshold for the
/// hit counter (pass patternsieve_ctx_rk for the optimized value).
///
/// # Safety
/// `ctx` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn patternsieve_window_sums(
    ctx: *const PatternsieveCtx,
    lo: u64,
    hi: u64,
    r_k: u64,
    out: *mut PatternsieveSums,
) -> i32 {
    guarded(|| {
        let c = ctx_ref(ctx)?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        let s = window_sums(&c.ctx, lo, hi, r_k).map_err(app_err)?;
        *out = PatternsieveSums {
            s1: s.s1,
            s1_minus: s.s1_minus,
            s1_plus: s.s1_plus,
            s2: s.s2,
            s2_plus: s.s2_plus,
            s1_star: s.s1_star,
            steps: s.steps,
        };
        Ok(())
    })
}

/// Count residue-class members up to x whose whole tuple is rough; also
/// reports the normalized density count * (log x)^k / x.
///
/// # Safety
/// `ctx` must be a live handle; out-pointers writable or null.
#[no_mangle]
pub unsafe extern "C" fn patternsieve_scan_rough(
    ctx: *const PatternsieveCtx,
    x: u64,
    count: *mut u64,
    density: *mut f64,
) -> i32 {
    guarded(|| {
        let c = ctx_ref(ctx)?;
        let scan = scan_rough(&c.ctx.params, x).map_err(app_err)?;
        if !count.is_null() {
            *count = scan.count;
        }
        if !density.is_null() {
            *density = scan.normalized_density;
        }
        Ok(())
    })
}

/// Find n in [lo, hi] with n + h prime for every offset. Writes up to
/// `buf_len` hit positions into `buf` and the total hit count into
/// `total` (which may exceed what the buffer holds).
///
/// # Safety
/// `offsets` must point to `m` readable u64 values; `buf` must hold
/// `buf_len` writable u64 values (or be null with buf_len 0); `total`
/// writable or null.
#[no_mangle]
pub unsafe extern "C" fn patternsieve_pattern_hits(
    offsets: *const u64,
    m: usize,
    lo: u64,
    hi: u64,
    require_consecutive: i32,
    buf: *mut u64,
    buf_len: usize,
    total: *mut u64,
) -> i32 {
    guarded(|| {
        let offs = slice_arg(offsets, m).ok_or_else(|| null_err("offsets"))?;
        if buf.is_null() && buf_len > 0 {
            return Err(null_err("buf"));
        }
        let scan =
            find_pattern_hits(offs, lo, hi, require_consecutive != 0, &[], None).map_err(app_err)?;
        let take = scan.hits.len().min(buf_len);
        for (i, hit) in scan.hits.iter().take(take).enumerate() {
            *buf.add(i) = hit.n;
        }
        if !total.is_null() {
            *total = scan.hits.len() as u64;
        }
        Ok(())
    })
}
