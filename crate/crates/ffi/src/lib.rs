//! C ABI for the lie-control library.
//!
//! Systems are opaque handles created from JSON descriptions (the same
//! format the `liectl` tool reads) or from built-in presets. Results come
//! back as NUL-terminated `key: value` report strings or CSV documents; the
//! caller owns returned strings and must release them with
//! [`lc_string_free`]. Every entry point returns an [`LcStatus`]; on
//! failure a thread-local message is retrievable through
//! [`lc_last_error_message`].
//!
//! All functions are safe to call from multiple threads as long as each
//! handle is used from one thread at a time (the underlying models are
//! immutable; the handle itself carries no interior mutability).

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use lie_control::accessibility::GammaOptions;
use lie_control::controllability::ClassifyOptions;
use lie_control::report;
use lie_control::sim::{self, CloudConfig, Direction};
use lie_control::specfile::SystemSpecFile;
use lie_control::{Error, LinearSystem};

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LcStatus {
    LcOk = 0,
    /// Null pointers, invalid UTF-8 or out-of-range arguments.
    LcInvalidArgument = 1,
    /// Unparsable or inconsistent system descriptions.
    LcSpecError = 2,
    /// Numerical failures (singular differentials, guard trips, ...).
    LcNumericalError = 3,
    /// A panic was caught at the boundary.
    LcPanic = 4,
}

/// Opaque handle around a validated linear system.
pub struct LcSystem {
    inner: LinearSystem,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> LcStatus {
    match err {
        Error::Spec(_) => LcStatus::LcSpecError,
        Error::Argument(_) => LcStatus::LcInvalidArgument,
        _ => LcStatus::LcNumericalError,
    }
}

fn fail(err: Error) -> LcStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

fn guard<F: FnOnce() -> LcStatus>(body: F) -> LcStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic across the FFI boundary".into());
            set_error(msg);
            LcStatus::LcPanic
        }
    }
}

/// # Safety
/// `ptr` must be null or a valid NUL-terminated string.
unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, LcStatus> {
    if ptr.is_null() {
        set_error("null string argument".into());
        return Err(LcStatus::LcInvalidArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8".into());
        LcStatus::LcInvalidArgument
    })
}

fn write_out_string(text: String, out: *mut *mut c_char) -> LcStatus {
    match CString::new(text) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            LcStatus::LcOk
        }
        Err(_) => {
            set_error("report contained an interior NUL byte".into());
            LcStatus::LcNumericalError
        }
    }
}

fn build_handle(spec: SystemSpecFile, out: *mut *mut LcSystem) -> LcStatus {
    match spec.build() {
        Ok(sys) => {
            let handle = Box::new(LcSystem { inner: sys });
            unsafe { *out = Box::into_raw(handle) };
            LcStatus::LcOk
        }
        Err(e) => fail(e),
    }
}

/// Library version as a static string (do not free).
#[no_mangle]
pub extern "C" fn lc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// The last error message of this thread, or null. Caller frees the result
/// with [`lc_string_free`].
#[no_mangle]
pub extern "C" fn lc_last_error_message() -> *mut c_char {
    LAST_ERROR
        .with(|slot| slot.borrow().clone())
        .map(|c| c.into_raw())
        .unwrap_or(std::ptr::null_mut())
}

/// Release a string returned by this library.
///
/// # Safety
/// `ptr` must be null or a pointer previously returned by this library.
#[no_mangle]
pub unsafe extern "C" fn lc_string_free(ptr: *mut c_char) {
    if !ptr.is_null() {
        drop(CString::from_raw(ptr));
    }
}

/// Parse a JSON system description and build a validated system handle.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` must be a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn lc_system_from_json(
    json: *const c_char,
    out: *mut *mut LcSystem,
) -> LcStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer".into());
            return LcStatus::LcInvalidArgument;
        }
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match SystemSpecFile::from_json(text) {
            Ok(spec) => build_handle(spec, out),
            Err(e) => fail(e),
        }
    })
}

/// Build a system from a built-in preset (`heisenberg-paper` or
/// `aff2-theorem39`).
///
/// # Safety
/// As [`lc_system_from_json`].
#[no_mangle]
pub unsafe extern "C" fn lc_system_from_preset(
    name: *const c_char,
    out: *mut *mut LcSystem,
) -> LcStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer".into());
            return LcStatus::LcInvalidArgument;
        }
        let name = match read_str(name) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match SystemSpecFile::preset(name) {
            Ok(spec) => build_handle(spec, out),
            Err(e) => fail(e),
        }
    })
}

/// Release a system handle.
///
/// # Safety
/// `sys` must be null or a pointer returned by a constructor of this
/// library, not released before.
#[no_mangle]
pub unsafe extern "C" fn lc_system_free(sys: *mut LcSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

unsafe fn system_ref<'a>(sys: *const LcSystem) -> Result<&'a LinearSystem, LcStatus> {
    if sys.is_null() {
        set_error("null system handle".into());
        return Err(LcStatus::LcInvalidArgument);
    }
    Ok(&(*sys).inner)
}

/// Spectral decomposition report (`tol ≤ 0` selects the default).
///
/// # Safety
/// `sys` must be a live handle; `out_report` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lc_decompose(
    sys: *const LcSystem,
    tol: f64,
    out_report: *mut *mut c_char,
) -> LcStatus {
    guard(|| {
        let system = match system_ref(sys) {
            Ok(s) => s,
            Err(s) => return s,
        };
        if out_report.is_null() {
            set_error("null output pointer".into());
            return LcStatus::LcInvalidArgument;
        }
        let tol = if tol > 0.0 {
            tol
        } else {
            lie_control::spectral::DEFAULT_MODULUS_TOL
        };
        match report::decompose_report(system, tol) {
            Ok(r) => write_out_string(r.to_text(), out_report),
            Err(e) => fail(e),
        }
    })
}

/// Controllability verdict report (`max_k = 0` selects the default
/// `2 · dim`).
///
/// # Safety
/// As [`lc_decompose`].
#[no_mangle]
pub unsafe extern "C" fn lc_classify(
    sys: *const LcSystem,
    max_k: u32,
    samples: u32,
    seed: u64,
    out_report: *mut *mut c_char,
) -> LcStatus {
    guard(|| {
        let system = match system_ref(sys) {
            Ok(s) => s,
            Err(s) => return s,
        };
        if out_report.is_null() {
            set_error("null output pointer".into());
            return LcStatus::LcInvalidArgument;
        }
        let defaults = ClassifyOptions::default();
        let opts = ClassifyOptions {
            max_k: if max_k == 0 {
                None
            } else {
                Some(max_k as usize)
            },
            samples: if samples == 0 {
                defaults.samples
            } else {
                samples as usize
            },
            seed,
            ..defaults
        };
        match report::classify_report(system, &opts) {
            Ok(r) => write_out_string(r.to_text(), out_report),
            Err(e) => fail(e),
        }
    })
}

/// Forward/backward Γ-rank report (`depth = 0` selects the default).
///
/// # Safety
/// As [`lc_decompose`].
#[no_mangle]
pub unsafe extern "C" fn lc_accessibility(
    sys: *const LcSystem,
    depth: u32,
    samples: u32,
    seed: u64,
    out_report: *mut *mut c_char,
) -> LcStatus {
    guard(|| {
        let system = match system_ref(sys) {
            Ok(s) => s,
            Err(s) => return s,
        };
        if out_report.is_null() {
            set_error("null output pointer".into());
            return LcStatus::LcInvalidArgument;
        }
        let defaults = GammaOptions::default();
        let opts = GammaOptions {
            depth: if depth == 0 {
                defaults.depth
            } else {
                depth as usize
            },
            samples: if samples == 0 {
                defaults.samples
            } else {
                samples as usize
            },
            seed,
            ..defaults
        };
        match report::accessibility_report(system, &opts) {
            Ok(r) => write_out_string(r.to_text(), out_report),
            Err(e) => fail(e),
        }
    })
}

/// Model self-checks; `out_pass` receives 1 when everything passed.
///
/// # Safety
/// As [`lc_decompose`]; `out_pass` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lc_verify(
    sys: *const LcSystem,
    seed: u64,
    out_report: *mut *mut c_char,
    out_pass: *mut c_int,
) -> LcStatus {
    guard(|| {
        let system = match system_ref(sys) {
            Ok(s) => s,
            Err(s) => return s,
        };
        if out_report.is_null() || out_pass.is_null() {
            set_error("null output pointer".into());
            return LcStatus::LcInvalidArgument;
        }
        match report::verify_report(system, seed) {
            Ok((r, ok)) => {
                *out_pass = ok as c_int;
                write_out_string(r.to_text(), out_report)
            }
            Err(e) => fail(e),
        }
    })
}

/// Reachable-cloud CSV (`header k,x1,...,xd`). `backward ≠ 0` expands the
/// reversed system; `prune_cell ≤ 0` and `max_points = 0` select defaults.
///
/// # Safety
/// As [`lc_decompose`].
#[no_mangle]
pub unsafe extern "C" fn lc_simulate_csv(
    sys: *const LcSystem,
    steps: u32,
    lattice: u32,
    prune_cell: f64,
    max_points: u64,
    backward: c_int,
    seed: u64,
    out_csv: *mut *mut c_char,
) -> LcStatus {
    guard(|| {
        let system = match system_ref(sys) {
            Ok(s) => s,
            Err(s) => return s,
        };
        if out_csv.is_null() {
            set_error("null output pointer".into());
            return LcStatus::LcInvalidArgument;
        }
        let defaults = CloudConfig::default();
        let cfg = CloudConfig {
            steps: steps as usize,
            controls_per_channel: lattice as usize,
            prune_cell: if prune_cell > 0.0 {
                prune_cell
            } else {
                defaults.prune_cell
            },
            max_points: if max_points == 0 {
                defaults.max_points
            } else {
                max_points as usize
            },
            seed,
        };
        let direction = if backward != 0 {
            Direction::Backward
        } else {
            Direction::Forward
        };
        match sim::reach_cloud(system, &cfg, direction) {
            Ok(cloud) => {
                let mut buf = Vec::new();
                if let Err(e) = sim::write_csv(system.model(), &cloud, &mut buf) {
                    set_error(format!("CSV serialization failed: {e}"));
                    return LcStatus::LcNumericalError;
                }
                match String::from_utf8(buf) {
                    Ok(text) => write_out_string(text, out_csv),
                    Err(_) => {
                        set_error("CSV was not UTF-8".into());
                        LcStatus::LcNumericalError
                    }
                }
            }
            Err(e) => fail(e),
        }
    })
}
