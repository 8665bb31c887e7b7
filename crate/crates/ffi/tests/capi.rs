use std::ffi::{CStr, CString};
use std::ptr;

use lobforge_ffi::*;

fn params_json() -> CString {
    let sigma: Vec<Vec<f64>> = (0..8).map(|i| (0..8).map(|j| if i == j { 7.11 / 8.0 } else { 0.0 }).collect()).collect();
    let json = serde_json::json!({
        "mu0_lo_passive": 30.84, "mu0_lo_direct": 8.16, "mu0_mo": 4.75,
        "mu0_c_passive": 30.84, "mu0_c_direct": 8.16,
        "skew_lo": vec![-0.18; 8], "skew_mo": -0.18, "nu": 33.7, "sigma_mo": 1.78,
        "sigma": sigma, "m_lo": vec![0.0; 8], "m_mo": 0.0,
        "order_size_model": {"kind": "constant", "size": 1}, "l_p": 5, "l_d": 3
    });
    CString::new(json.to_string()).unwrap()
}

fn config_json(intervals: usize, seed: u64) -> CString {
    CString::new(format!(r#"{{"intervals":{intervals},"seed":{seed},"record_activity":false}}"#)).unwrap()
}

fn last_error() -> String {
    let p = lobforge_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn simulate(intervals: usize, seed: u64) -> *mut LobforgeSimulation {
    let mut h = ptr::null_mut();
    let status = unsafe { lobforge_simulate(params_json().as_ptr(), config_json(intervals, seed).as_ptr(), &mut h) };
    assert_eq!(status, LobforgeStatus::Ok);
    assert!(!h.is_null());
    h
}

#[test]
fn version_is_set() {
    let v = unsafe { CStr::from_ptr(lobforge_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn simulate_and_read_back() {
    let h = simulate(300, 5);
    let mut len = 0usize;
    assert_eq!(unsafe { lobforge_simulation_len(h, &mut len) }, LobforgeStatus::Ok);
    assert_eq!(len, 301);

    let mut written = 0usize;
    let mut small = vec![0.0; 10];
    let st = unsafe { lobforge_simulation_mid_prices(h, small.as_mut_ptr(), small.len(), &mut written) };
    assert_eq!(st, LobforgeStatus::BufferTooSmall);
    assert_eq!(written, 301);
    let mut mids = vec![0.0; written];
    assert_eq!(unsafe { lobforge_simulation_mid_prices(h, mids.as_mut_ptr(), mids.len(), &mut written) }, LobforgeStatus::Ok);
    assert_eq!(mids[0], 10000.5);

    let again = simulate(300, 5);
    let mut mids2 = vec![0.0; 301];
    unsafe { lobforge_simulation_mid_prices(again, mids2.as_mut_ptr(), 301, &mut written) };
    assert_eq!(mids.iter().map(|m| m.to_bits()).collect::<Vec<_>>(), mids2.iter().map(|m| m.to_bits()).collect::<Vec<_>>());

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().to_str().unwrap()).unwrap();
    assert_eq!(unsafe { lobforge_simulation_save(h, path.as_ptr()) }, LobforgeStatus::Ok);
    assert!(dir.path().join("snapshots.csv").exists());

    unsafe {
        lobforge_simulation_free(h);
        lobforge_simulation_free(again);
        lobforge_simulation_free(ptr::null_mut());
    }
}

#[test]
fn aux_coefficients_are_finite() {
    let h = simulate(600, 2);
    let mut out = [f64::NAN; LOBFORGE_AUX_LEN];
    assert_eq!(unsafe { lobforge_simulation_aux_coefficients(h, 1, out.as_mut_ptr()) }, LobforgeStatus::Ok);
    assert!(out.iter().all(|x| x.is_finite()));
    assert_eq!(unsafe { lobforge_simulation_aux_coefficients(h, 0, out.as_mut_ptr()) }, LobforgeStatus::InvalidArgument);
    assert!(last_error().contains("minute"));
    unsafe { lobforge_simulation_free(h) };
}

#[test]
fn errors_are_reported() {
    let mut h = ptr::null_mut();
    let st = unsafe { lobforge_simulate(ptr::null(), config_json(10, 0).as_ptr(), &mut h) };
    assert_eq!(st, LobforgeStatus::NullPointer);
    assert!(last_error().contains("params_json"));
    assert!(h.is_null());

    let bad = CString::new("{not json").unwrap();
    let st = unsafe { lobforge_simulate(bad.as_ptr(), config_json(10, 0).as_ptr(), &mut h) };
    assert_eq!(st, LobforgeStatus::InvalidArgument);

    let zero = CString::new(r#"{"intervals":0}"#).unwrap();
    let st = unsafe { lobforge_simulate(params_json().as_ptr(), zero.as_ptr(), &mut h) };
    assert_eq!(st, LobforgeStatus::InvalidArgument);

    let invalid = [0xffu8, 0xfe, 0];
    let st = unsafe { lobforge_simulate(invalid.as_ptr().cast(), config_json(10, 0).as_ptr(), &mut h) };
    assert_eq!(st, LobforgeStatus::InvalidUtf8);

    let mut len = 0;
    assert_eq!(unsafe { lobforge_simulation_len(ptr::null(), &mut len) }, LobforgeStatus::NullPointer);

    // A successful call clears the message.
    let ok = simulate(5, 0);
    assert!(lobforge_last_error_message().is_null());
    unsafe { lobforge_simulation_free(ok) };
}

#[test]
fn calibrate_returns_report() {
    let setup = CString::new(
        r#"{"l_p":5,"l_d":3,"bounds":{"mu0_lo_passive":[1,50],"mu0_lo_direct":[0.5,10],"mu0_mo":[0.5,10],
            "gamma0":[-10,10],"nu":[2.1,50],"sigma_mo":[0.5,10]},"sim":{"intervals":200,"record_activity":false}}"#,
    )
    .unwrap();
    let search = CString::new(r#"{"population":4,"generations":1,"seed":3}"#).unwrap();
    let target = [1e-8, 0.1, 0.5, -0.4, 4.0, -0.4, 4.0];
    let mut out = ptr::null_mut();
    let st = unsafe { lobforge_calibrate(setup.as_ptr(), target.as_ptr(), search.as_ptr(), &mut out) };
    assert_eq!(st, LobforgeStatus::Ok, "{}", last_error());
    let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
    unsafe { lobforge_string_free(out) };
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(!report["result"]["front"].as_array().unwrap().is_empty());
    assert_eq!(report["result"]["traces"].as_array().unwrap().len(), 2);
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/lobforge.h")).unwrap();
    for name in [
        "lobforge_simulate",
        "lobforge_simulation_free",
        "lobforge_simulation_mid_prices",
        "lobforge_simulation_aux_coefficients",
        "lobforge_calibrate",
        "lobforge_last_error_message",
        "lobforge_string_free",
        "typedef struct LobforgeSimulation LobforgeSimulation",
        "LOBFORGE_STATUS_BUFFER_TOO_SMALL",
    ] {
        assert!(header.contains(name), "{name}");
    }
}
