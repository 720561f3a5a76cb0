//! C ABI for `srchain`.
//!
//! Parameter sets and stationary laws are opaque handles created by `*_new`
//! and released by the matching `*_free`. Every fallible function returns an
//! [`SrStatus`] and writes results through out-pointers; on failure a
//! description is available from [`sr_last_error_message`] on the same
//! thread. Panics never cross the boundary: they are reported as
//! `SR_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use srchain::montecarlo::{estimate_spa, SimConfig};
use srchain::tuning::{asymptotic_resonance, classify, find_resonance, find_zero, Region};
use srchain::{
    spa_closed_form, spa_from_distribution, stationary_distribution, ChainParams, Error,
    NoiseLevel, StationaryDistribution,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    DegenerateChain = 3,
    NotFound = 4,
    BracketFailure = 5,
    Ambiguous = 6,
    BlowUp = 7,
    Internal = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrRegion {
    U0 = 0,
    U1 = 1,
    U2 = 2,
}

impl From<Region> for SrRegion {
    fn from(r: Region) -> Self {
        match r {
            Region::U0 => SrRegion::U0,
            Region::U1 => SrRegion::U1,
            Region::U2 => SrRegion::U2,
        }
    }
}

/// Opaque chain parameter set.
pub struct SrParams(ChainParams);

/// Opaque periodic stationary law.
pub struct SrStationary(StationaryDistribution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(SrStatus, String);

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let status = match err {
            Error::InvalidParameter(_) | Error::ZeroPrefactor | Error::LengthMismatch { .. } => {
                SrStatus::InvalidParameter
            }
            Error::DegenerateChain { .. } => SrStatus::DegenerateChain,
            Error::BracketFailure { .. } => SrStatus::BracketFailure,
            Error::Ambiguous { .. } => SrStatus::Ambiguous,
            Error::BlowUp { .. } => SrStatus::BlowUp,
            Error::IdentityMatrix => SrStatus::Internal,
        };
        Failure(status, err.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SrStatus::NullPointer, format!("{what} is null"))
}

fn guarded(body: impl FnOnce() -> Result<(), Failure>) -> SrStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => SrStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("panic inside srchain");
            SrStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(ptr: *mut T, value: T, what: &str) -> Result<(), Failure> {
    let slot = ptr.as_mut().ok_or_else(|| null(what))?;
    *slot = value;
    Ok(())
}

fn noise(x: f64) -> Result<NoiseLevel, Failure> {
    Ok(NoiseLevel::from_x(x)?)
}

/// Message for the last failed call on this thread, or null if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Creates a parameter set. `shallow` and `deep` are the well depths `v < V`.
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn sr_params_new(
    p: f64,
    q: f64,
    shallow: f64,
    deep: f64,
    half_period: u64,
    out: *mut *mut SrParams,
) -> SrStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params = ChainParams::new(p, q, shallow, deep, half_period)?;
        write(out, Box::into_raw(Box::new(SrParams(params))), "out")
    })
}

/// # Safety
/// `params` must be null or a handle from [`sr_params_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sr_params_free(params: *mut SrParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Converts a noise intensity to `x = exp(-1/eps)`; `eps = INFINITY` gives 1.
///
/// # Safety
/// `out_x` must be null or valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sr_eps_to_x(eps: f64, out_x: *mut f64) -> SrStatus {
    guarded(|| write(out_x, NoiseLevel::from_eps(eps)?.x(), "out_x"))
}

/// Spectral power amplification from the closed form.
///
/// # Safety
/// `params` must be a live handle; `out_eta` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sr_spa(params: *const SrParams, x: f64, out_eta: *mut f64) -> SrStatus {
    guarded(|| {
        let p = deref(params, "params")?;
        write(out_eta, spa_closed_form(&p.0, noise(x)?).eta, "out_eta")
    })
}

/// Spectral power amplification by summation over the stationary law.
///
/// # Safety
/// As for [`sr_spa`].
#[no_mangle]
pub unsafe extern "C" fn sr_spa_from_distribution(
    params: *const SrParams,
    x: f64,
    out_eta: *mut f64,
) -> SrStatus {
    guarded(|| {
        let p = deref(params, "params")?;
        write(
            out_eta,
            spa_from_distribution(&p.0, noise(x)?)?.eta,
            "out_eta",
        )
    })
}

/// Computes the periodic stationary law; free it with [`sr_stationary_free`].
///
/// # Safety
/// `params` must be a live handle; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sr_stationary_new(
    params: *const SrParams,
    x: f64,
    out: *mut *mut SrStationary,
) -> SrStatus {
    guarded(|| {
        let p = deref(params, "params")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let dist = stationary_distribution(&p.0, noise(x)?)?;
        write(out, Box::into_raw(Box::new(SrStationary(dist))), "out")
    })
}

/// Number of phases `2m`; 0 for a null handle.
///
/// # Safety
/// `dist` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sr_stationary_len(dist: *const SrStationary) -> usize {
    dist.as_ref().map_or(0, |d| d.0.len())
}

/// Probabilities of `-1` and `+1` at phase `l`.
///
/// # Safety
/// `dist` must be a live handle; out-pointers must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sr_stationary_get(
    dist: *const SrStationary,
    l: usize,
    out_minus: *mut f64,
    out_plus: *mut f64,
) -> SrStatus {
    guarded(|| {
        let d = deref(dist, "dist")?;
        if l >= d.0.len() {
            return Err(Failure(
                SrStatus::InvalidParameter,
                format!("phase {l} out of range 0..{}", d.0.len()),
            ));
        }
        write(out_minus, d.0.pi_minus(l), "out_minus")?;
        write(out_plus, d.0.pi_plus(l), "out_plus")
    })
}

/// # Safety
/// `dist` must be null or a handle from [`sr_stationary_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sr_stationary_free(dist: *mut SrStationary) {
    if !dist.is_null() {
        drop(Box::from_raw(dist));
    }
}

/// Region of the parameter square the set belongs to.
///
/// # Safety
/// `params` must be a live handle; `out_region` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sr_classify(
    params: *const SrParams,
    out_region: *mut SrRegion,
) -> SrStatus {
    guarded(|| {
        let p = deref(params, "params")?;
        write(out_region, classify(&p.0).region.into(), "out_region")
    })
}

/// Noise level maximising the SPA. `SR_STATUS_NOT_FOUND` when the SPA is
/// increasing on the whole interval.
///
/// # Safety
/// `params` must be a live handle; out-pointers must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sr_find_resonance(
    params: *const SrParams,
    out_x_hat: *mut f64,
    out_eta_max: *mut f64,
) -> SrStatus {
    guarded(|| {
        let p = deref(params, "params")?;
        match find_resonance(&p.0)? {
            Some(r) => {
                write(out_x_hat, r.x_hat, "out_x_hat")?;
                write(out_eta_max, r.eta_max, "out_eta_max")
            }
            None => Err(Failure(SrStatus::NotFound, "no interior maximum".into())),
        }
    })
}

/// Interior zero `(q/p)^(1/(V-v))` of the SPA; `SR_STATUS_NOT_FOUND` when absent.
///
/// # Safety
/// As for [`sr_find_resonance`].
#[no_mangle]
pub unsafe extern "C" fn sr_find_zero(params: *const SrParams, out_x_star: *mut f64) -> SrStatus {
    guarded(|| {
        let p = deref(params, "params")?;
        match find_zero(&p.0) {
            Some(x) => write(out_x_star, x, "out_x_star"),
            None => Err(Failure(SrStatus::NotFound, "no zero in (0, 1]".into())),
        }
    })
}

/// Large-`m` approximation of the resonance point.
///
/// # Safety
/// As for [`sr_find_resonance`].
#[no_mangle]
pub unsafe extern "C" fn sr_asymptotic_resonance(
    params: *const SrParams,
    out_x: *mut f64,
) -> SrStatus {
    guarded(|| {
        let p = deref(params, "params")?;
        write(out_x, asymptotic_resonance(&p.0)?, "out_x")
    })
}

/// Monte Carlo SPA estimate. `out_std_error` receives NaN for one replica.
///
/// # Safety
/// `params` must be a live handle; out-pointers must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sr_estimate_spa(
    params: *const SrParams,
    x: f64,
    seed: u64,
    periods: u64,
    burn_in: u64,
    replicas: usize,
    out_eta_hat: *mut f64,
    out_std_error: *mut f64,
) -> SrStatus {
    guarded(|| {
        let p = deref(params, "params")?;
        let config = SimConfig::new(seed, periods, burn_in, replicas)?;
        let est = estimate_spa(&p.0, noise(x)?, &config)?;
        write(out_eta_hat, est.eta_hat, "out_eta_hat")?;
        write(
            out_std_error,
            est.std_error.unwrap_or(f64::NAN),
            "out_std_error",
        )
    })
}
