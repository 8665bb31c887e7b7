//! C ABI over the simulator, the auxiliary fit and the calibration driver.
//!
//! Conventions:
//! - Every fallible call returns a [`LobforgeStatus`]; on failure a message
//!   is stored for the calling thread and read with
//!   [`lobforge_last_error_message`].
//! - Handles are opaque and owned by the caller once returned; release them
//!   with the matching `_free` function. Freeing null is a no-op.
//! - Strings passed in are NUL-terminated UTF-8. Strings returned through
//!   `char **` are heap-allocated and released with [`lobforge_string_free`].
//! - Panics never cross the boundary; they surface as `LOBFORGE_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use lobforge::auxiliary::{fit_auxiliary, transform, AuxCoefficients};
use lobforge::calibrate::{calibrate, CalibrationSetup, Nsga2Config};
use lobforge::sim::{simulate, AgentParams, SimConfig, SimResult};
use lobforge::Error;

/// Number of auxiliary coefficients: three volatility terms followed by four
/// volume terms.
pub const LOBFORGE_AUX_LEN: usize = 7;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LobforgeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed JSON or parameters that fail validation.
    InvalidArgument = 3,
    /// The computation itself failed (degenerate day, failed fit, I/O).
    Runtime = 4,
    /// An output buffer is too small; the required length is reported.
    BufferTooSmall = 5,
    Panic = 6,
}

/// A simulated trading day.
pub struct LobforgeSimulation {
    result: SimResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    let c = CString::new(text).expect("interior NULs replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(LobforgeStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidConfig(_)
            | Error::InvalidRatio(_)
            | Error::CrossedSpec { .. }
            | Error::NotPositiveDefinite
            | Error::LengthMismatch(..)
            | Error::InsufficientReplications { .. }
            | Error::Parse { .. }
            | Error::Json(_) => LobforgeStatus::InvalidArgument,
            _ => LobforgeStatus::Runtime,
        };
        Failure(status, e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure(LobforgeStatus::InvalidArgument, e.to_string())
    }
}

/// Runs `body`, converting errors and panics into a status code.
fn guard<F: FnOnce() -> Result<(), Failure>>(body: F) -> LobforgeStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => LobforgeStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            LobforgeStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(LobforgeStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `p` must be null or point to a NUL-terminated string.
unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: non-null and NUL-terminated per the caller contract.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Failure(LobforgeStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(LobforgeStatus::Runtime, "output contains a NUL byte".into()))
}

/// # Safety
/// `h` must be null or a live handle from [`lobforge_simulate`].
unsafe fn sim_ref<'a>(h: *const LobforgeSimulation) -> Result<&'a LobforgeSimulation, Failure> {
    // SAFETY: caller guarantees the handle is live when non-null.
    unsafe { h.as_ref() }.ok_or_else(|| null("simulation handle"))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lobforge_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn lobforge_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a pointer returned through a `char **` output of this
/// library that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn lobforge_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: produced by CString::into_raw in this crate.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Simulates one day. `params_json` holds the full agent-parameter object
/// and `config_json` the simulation settings.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lobforge_simulate(
    params_json: *const c_char,
    config_json: *const c_char,
    out: *mut *mut LobforgeSimulation,
) -> LobforgeStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: forwarded caller contract.
        let params: AgentParams = serde_json::from_str(unsafe { read_str(params_json, "params_json") }?)?;
        let config: SimConfig = serde_json::from_str(unsafe { read_str(config_json, "config_json") }?)?;
        let result = simulate(&params, &config)?;
        let handle = Box::into_raw(Box::new(LobforgeSimulation { result }));
        // SAFETY: `out` checked non-null above.
        unsafe { *out = handle };
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from [`lobforge_simulate`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lobforge_simulation_free(h: *mut LobforgeSimulation) {
    if !h.is_null() {
        // SAFETY: produced by Box::into_raw in lobforge_simulate.
        drop(unsafe { Box::from_raw(h) });
    }
}

/// Number of snapshots (intervals plus one).
///
/// # Safety
/// `h` must be a live handle; `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lobforge_simulation_len(h: *const LobforgeSimulation, len: *mut usize) -> LobforgeStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let sim = unsafe { sim_ref(h) }?;
        if len.is_null() {
            return Err(null("len"));
        }
        // SAFETY: checked non-null.
        unsafe { *len = sim.result.snapshots.len() };
        Ok(())
    })
}

/// Copies mid-prices in ticks into `buf`; one-sided snapshots give NaN.
/// When `cap` is too small nothing is copied, `*written` receives the
/// required length and `BufferTooSmall` is returned.
///
/// # Safety
/// `buf` must hold `cap` doubles; `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lobforge_simulation_mid_prices(
    h: *const LobforgeSimulation,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> LobforgeStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let sim = unsafe { sim_ref(h) }?;
        if written.is_null() {
            return Err(null("written"));
        }
        let mids: Vec<f64> = sim.result.mid_prices().into_iter().map(|m| m.unwrap_or(f64::NAN)).collect();
        // SAFETY: checked non-null.
        unsafe { *written = mids.len() };
        if cap < mids.len() {
            return Err(Failure(LobforgeStatus::BufferTooSmall, format!("need {} values, got {cap}", mids.len())));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        // SAFETY: `buf` holds at least `cap >= mids.len()` doubles.
        unsafe { ptr::copy_nonoverlapping(mids.as_ptr(), buf, mids.len()) };
        Ok(())
    })
}

/// Writes the day to `dir` in the CLI's result layout.
///
/// # Safety
/// `h` must be a live handle; `dir` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn lobforge_simulation_save(h: *const LobforgeSimulation, dir: *const c_char) -> LobforgeStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let sim = unsafe { sim_ref(h) }?;
        let dir = unsafe { read_str(dir, "dir") }?;
        sim.result.save(Path::new(dir))?;
        Ok(())
    })
}

/// Fits both auxiliary models to the day sampled every `delta_minutes` and
/// writes the [`LOBFORGE_AUX_LEN`] coefficients to `out`.
///
/// # Safety
/// `h` must be a live handle; `out` must hold `LOBFORGE_AUX_LEN` doubles.
#[no_mangle]
pub unsafe extern "C" fn lobforge_simulation_aux_coefficients(
    h: *const LobforgeSimulation,
    delta_minutes: u32,
    out: *mut f64,
) -> LobforgeStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let sim = unsafe { sim_ref(h) }?;
        if out.is_null() {
            return Err(null("out"));
        }
        let series = transform(&sim.result.snapshots, sim.result.params.l_d, delta_minutes)?;
        let coeffs = fit_auxiliary(&[series])?.coefficients.to_vec();
        // SAFETY: `out` holds LOBFORGE_AUX_LEN doubles.
        unsafe { ptr::copy_nonoverlapping(coeffs.as_ptr(), out, LOBFORGE_AUX_LEN) };
        Ok(())
    })
}

/// Runs the multi-objective calibration against `target` (length
/// [`LOBFORGE_AUX_LEN`]) and returns the full report as JSON in `*report_json`.
/// `setup_json` is a bounds file; `search_json` may be null for defaults.
///
/// # Safety
/// String arguments NUL-terminated; `target` holds `LOBFORGE_AUX_LEN`
/// doubles; `report_json` writable.
#[no_mangle]
pub unsafe extern "C" fn lobforge_calibrate(
    setup_json: *const c_char,
    target: *const f64,
    search_json: *const c_char,
    report_json: *mut *mut c_char,
) -> LobforgeStatus {
    guard(|| {
        if report_json.is_null() {
            return Err(null("report_json"));
        }
        if target.is_null() {
            return Err(null("target"));
        }
        // SAFETY: forwarded caller contract.
        let setup: CalibrationSetup = serde_json::from_str(unsafe { read_str(setup_json, "setup_json") }?)?;
        let search: Nsga2Config = if search_json.is_null() {
            Nsga2Config::default()
        } else {
            serde_json::from_str(unsafe { read_str(search_json, "search_json") }?)?
        };
        // SAFETY: `target` holds LOBFORGE_AUX_LEN doubles.
        let t = unsafe { std::slice::from_raw_parts(target, LOBFORGE_AUX_LEN) };
        let target = AuxCoefficients { beta1: [t[0], t[1], t[2]], beta2: [t[3], t[4], t[5], t[6]] };
        let report = calibrate(setup, target, &search, None)?;
        let text = serde_json::to_string(&report)?;
        // SAFETY: checked non-null.
        unsafe { *report_json = into_c_string(text)? };
        Ok(())
    })
}
