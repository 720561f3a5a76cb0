use std::ffi::CStr;
use std::ptr;

use srchain_ffi::*;

fn params(p: f64, q: f64, v: f64, vv: f64, m: u64) -> *mut SrParams {
    let mut handle = ptr::null_mut();
    let status = unsafe { sr_params_new(p, q, v, vv, m, &mut handle) };
    assert_eq!(status, SrStatus::Ok);
    assert!(!handle.is_null());
    handle
}

fn last_error() -> String {
    let msg = sr_last_error_message();
    assert!(!msg.is_null());
    unsafe { CStr::from_ptr(msg) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn hand_example_through_handles() {
    let h = params(1.0, 1.0, 1.0, 2.0, 1);
    let mut eta = 0.0;
    assert_eq!(unsafe { sr_spa(h, 0.5, &mut eta) }, SrStatus::Ok);
    assert!((eta - 0.16).abs() < 1e-15);
    let mut eta_def = 0.0;
    assert_eq!(
        unsafe { sr_spa_from_distribution(h, 0.5, &mut eta_def) },
        SrStatus::Ok
    );
    assert!((eta_def - 0.16).abs() < 1e-14);

    let mut dist = ptr::null_mut();
    assert_eq!(
        unsafe { sr_stationary_new(h, 0.5, &mut dist) },
        SrStatus::Ok
    );
    assert_eq!(unsafe { sr_stationary_len(dist) }, 2);
    let (mut minus, mut plus) = (0.0, 0.0);
    assert_eq!(
        unsafe { sr_stationary_get(dist, 0, &mut minus, &mut plus) },
        SrStatus::Ok
    );
    assert!((minus - 0.4).abs() < 1e-15 && (plus - 0.6).abs() < 1e-15);
    assert_eq!(
        unsafe { sr_stationary_get(dist, 2, &mut minus, &mut plus) },
        SrStatus::InvalidParameter
    );
    assert!(last_error().contains("out of range"));
    unsafe {
        sr_stationary_free(dist);
        sr_params_free(h);
    }
}

#[test]
fn invalid_parameters_report_message() {
    let mut handle = ptr::null_mut();
    let status = unsafe { sr_params_new(0.5, 0.5, 3.0, 2.0, 4, &mut handle) };
    assert_eq!(status, SrStatus::InvalidParameter);
    assert!(handle.is_null());
    assert!(last_error().contains("depths"));
}

#[test]
fn null_pointers_are_rejected() {
    assert_eq!(
        unsafe { sr_params_new(0.5, 0.5, 1.0, 2.0, 4, ptr::null_mut()) },
        SrStatus::NullPointer
    );
    let mut eta = 0.0;
    assert_eq!(
        unsafe { sr_spa(ptr::null(), 0.5, &mut eta) },
        SrStatus::NullPointer
    );
    let h = params(0.5, 0.5, 1.0, 2.0, 4);
    assert_eq!(
        unsafe { sr_spa(h, 0.5, ptr::null_mut()) },
        SrStatus::NullPointer
    );
    assert_eq!(unsafe { sr_stationary_len(ptr::null()) }, 0);
    unsafe {
        sr_params_free(h);
        sr_params_free(ptr::null_mut());
        sr_stationary_free(ptr::null_mut());
    }
}

#[test]
fn degenerate_chain_status() {
    let h = params(0.3, 0.7, 1.0, 2.0, 4);
    let mut dist = ptr::null_mut();
    assert_eq!(
        unsafe { sr_stationary_new(h, 0.0, &mut dist) },
        SrStatus::DegenerateChain
    );
    assert!(dist.is_null());
    unsafe { sr_params_free(h) };
}

#[test]
fn tuning_entry_points() {
    let baseline = params(0.5, 0.5, 2.0, 4.0, 500);
    let (mut x_hat, mut eta_max) = (0.0, 0.0);
    assert_eq!(
        unsafe { sr_find_resonance(baseline, &mut x_hat, &mut eta_max) },
        SrStatus::Ok
    );
    let eps_hat = -1.0 / x_hat.ln();
    assert!((0.60..=0.70).contains(&eps_hat));
    let mut x_asym = 0.0;
    assert_eq!(
        unsafe { sr_asymptotic_resonance(baseline, &mut x_asym) },
        SrStatus::Ok
    );
    assert!((x_asym / x_hat - 1.0).abs() < 0.05);
    let mut region = SrRegion::U0;
    assert_eq!(unsafe { sr_classify(baseline, &mut region) }, SrStatus::Ok);
    assert_eq!(region, SrRegion::U2);

    let flat = params(0.0, 0.5, 2.0, 4.0, 3);
    assert_eq!(
        unsafe { sr_find_resonance(flat, &mut x_hat, &mut eta_max) },
        SrStatus::NotFound
    );
    let mut x_star = 0.0;
    assert_eq!(
        unsafe { sr_find_zero(flat, &mut x_star) },
        SrStatus::NotFound
    );
    assert_eq!(
        unsafe { sr_asymptotic_resonance(flat, &mut x_asym) },
        SrStatus::InvalidParameter
    );

    let zero = params(0.8, 0.2, 1.0, 3.0, 5);
    assert_eq!(unsafe { sr_find_zero(zero, &mut x_star) }, SrStatus::Ok);
    assert!((x_star - 0.5).abs() < 1e-12);
    unsafe {
        sr_params_free(baseline);
        sr_params_free(flat);
        sr_params_free(zero);
    }
}

#[test]
fn noise_conversion() {
    let mut x = 0.0;
    assert_eq!(unsafe { sr_eps_to_x(f64::INFINITY, &mut x) }, SrStatus::Ok);
    assert_eq!(x, 1.0);
    assert_eq!(unsafe { sr_eps_to_x(1.0, &mut x) }, SrStatus::Ok);
    assert!((x - (-1.0f64).exp()).abs() < 1e-16);
    assert_eq!(
        unsafe { sr_eps_to_x(-1.0, &mut x) },
        SrStatus::InvalidParameter
    );
}

#[test]
fn monte_carlo_estimate() {
    let h = params(1.0, 1.0, 1.0, 2.0, 1);
    let (mut eta, mut se) = (0.0, 0.0);
    let status = unsafe { sr_estimate_spa(h, 0.5, 5, 20_000, 10, 8, &mut eta, &mut se) };
    assert_eq!(status, SrStatus::Ok);
    assert!((eta - 0.16).abs() <= 3.0 * se, "{eta} +- {se}");
    let status = unsafe { sr_estimate_spa(h, 0.5, 5, 100, 10, 1, &mut eta, &mut se) };
    assert_eq!(status, SrStatus::Ok);
    assert!(se.is_nan());
    unsafe { sr_params_free(h) };
}

#[test]
fn header_declares_every_entry_point() {
    let header = include_str!("../include/srchain.h");
    for name in [
        "sr_last_error_message",
        "sr_params_new",
        "sr_params_free",
        "sr_eps_to_x",
        "sr_spa",
        "sr_spa_from_distribution",
        "sr_stationary_new",
        "sr_stationary_len",
        "sr_stationary_get",
        "sr_stationary_free",
        "sr_classify",
        "sr_find_resonance",
        "sr_find_zero",
        "sr_asymptotic_resonance",
        "sr_estimate_spa",
    ] {
        assert!(header.contains(&format!("{name}(")), "{name}");
    }
    assert!(header.contains("typedef struct SrParams SrParams;"));
}
