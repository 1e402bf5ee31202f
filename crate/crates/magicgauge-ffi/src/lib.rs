//! C interface to the magicgauge pipeline and oracle.
//!
//! Every function returns an `MgStatus`. On failure the message is available
//! from `mg_last_error` on the same thread until the next failing call.
//! Strings returned through `char **` are owned by the caller and released
//! with `mg_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use magicgauge::anyon_algebra::{check_condensable, named_algebra, parse_sequence, parse_state, run_sequence, theory, CondensableAlgebra};
use magicgauge::engine::Backend;
use magicgauge::protocol::pipeline::{run_pipeline, Extraction, PipelineConfig, ProtocolReport};
use magicgauge::protocol::Mode;
use magicgauge::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MgStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    Config = 3,
    Protocol = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MgMode {
    PostSelect = 0,
    Sample = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MgOption {
    Disentangle = 0,
    Condense = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MgBackend {
    Dense = 0,
    Sparse = 1,
}

/// Pipeline configuration.
pub struct MgConfig {
    inner: PipelineConfig,
}

/// Result of a pipeline run.
pub struct MgReport {
    inner: ProtocolReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(s));
}

fn fail(status: MgStatus, msg: impl Into<String>) -> MgStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> MgStatus) -> MgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(MgStatus::Panic, "internal panic"),
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, MgStatus> {
    if p.is_null() {
        return Err(fail(MgStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(MgStatus::InvalidArgument, "string is not UTF-8"))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> MgStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            MgStatus::Ok
        }
        Err(_) => fail(MgStatus::InvalidArgument, "output contains a NUL byte"),
    }
}

fn status_of(e: &Error) -> MgStatus {
    match e {
        Error::Config(_) | Error::InvalidPatch { .. } | Error::Parse(_) => MgStatus::Config,
        Error::UnknownAnyon(_) | Error::UnknownTheory(_) | Error::UnknownInterface(_) => MgStatus::InvalidArgument,
        _ => MgStatus::Protocol,
    }
}

/// Message of the last failing call on this thread, or NULL. The pointer is
/// valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn mg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn mg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Default configuration: 1x1 patch, sparse backend, post-selection,
/// condensed extraction.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mg_config_new(out: *mut *mut MgConfig) -> MgStatus {
    guard(|| {
        if out.is_null() {
            return fail(MgStatus::NullArgument, "out is null");
        }
        *out = Box::into_raw(Box::new(MgConfig { inner: PipelineConfig::default() }));
        MgStatus::Ok
    })
}

/// Configuration from TOML text; unknown keys are rejected.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mg_config_from_toml(toml: *const c_char, out: *mut *mut MgConfig) -> MgStatus {
    guard(|| {
        if out.is_null() {
            return fail(MgStatus::NullArgument, "out is null");
        }
        let text = match read_str(toml) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match PipelineConfig::from_toml(text) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(MgConfig { inner: c }));
                MgStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `cfg` must be NULL or a handle from `mg_config_new`/`mg_config_from_toml`.
#[no_mangle]
pub unsafe extern "C" fn mg_config_free(cfg: *mut MgConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

unsafe fn with_config(cfg: *mut MgConfig, f: impl FnOnce(&mut PipelineConfig) -> MgStatus) -> MgStatus {
    guard(|| match cfg.as_mut() {
        Some(c) => f(&mut c.inner),
        None => fail(MgStatus::NullArgument, "config is null"),
    })
}

/// # Safety
/// `cfg` must be a valid config handle.
#[no_mangle]
pub unsafe extern "C" fn mg_config_set_patch(cfg: *mut MgConfig, width: u32, height: u32) -> MgStatus {
    with_config(cfg, |c| {
        if width == 0 || height == 0 {
            return fail(MgStatus::Config, format!("invalid patch {width}x{height}"));
        }
        c.patch = format!("{width}x{height}");
        MgStatus::Ok
    })
}

/// # Safety
/// `cfg` must be a valid config handle.
#[no_mangle]
pub unsafe extern "C" fn mg_config_set_mode(cfg: *mut MgConfig, mode: MgMode, seed: u64) -> MgStatus {
    with_config(cfg, |c| {
        c.mode = match mode {
            MgMode::PostSelect => Mode::PostSelect,
            MgMode::Sample => Mode::Sample,
        };
        c.seed = seed;
        MgStatus::Ok
    })
}

/// # Safety
/// `cfg` must be a valid config handle.
#[no_mangle]
pub unsafe extern "C" fn mg_config_set_option(cfg: *mut MgConfig, option: MgOption, standardize: bool) -> MgStatus {
    with_config(cfg, |c| {
        c.option = match option {
            MgOption::Disentangle => Extraction::Disentangle,
            MgOption::Condense => Extraction::Condense,
        };
        c.standardize = standardize;
        MgStatus::Ok
    })
}

/// # Safety
/// `cfg` must be a valid config handle.
#[no_mangle]
pub unsafe extern "C" fn mg_config_set_backend(cfg: *mut MgConfig, backend: MgBackend) -> MgStatus {
    with_config(cfg, |c| {
        c.backend = match backend {
            MgBackend::Dense => Backend::Dense,
            MgBackend::Sparse => Backend::Sparse,
        };
        MgStatus::Ok
    })
}

/// Runs the pipeline. Nothing is written to disk.
///
/// # Safety
/// `cfg` must be a valid config handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mg_run(cfg: *const MgConfig, out: *mut *mut MgReport) -> MgStatus {
    guard(|| {
        let Some(c) = cfg.as_ref() else { return fail(MgStatus::NullArgument, "config is null") };
        if out.is_null() {
            return fail(MgStatus::NullArgument, "out is null");
        }
        if let Err(e) = c.inner.dimensions() {
            return fail(status_of(&e), e.to_string());
        }
        match run_pipeline(&c.inner) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(MgReport { inner: r }));
                MgStatus::Ok
            }
            Err(e) => fail(MgStatus::Protocol, e.to_string()),
        }
    })
}

/// # Safety
/// `report` must be NULL or a handle from `mg_run`.
#[no_mangle]
pub unsafe extern "C" fn mg_report_free(report: *mut MgReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

unsafe fn with_report(report: *const MgReport, f: impl FnOnce(&ProtocolReport) -> MgStatus) -> MgStatus {
    guard(|| match report.as_ref() {
        Some(r) => f(&r.inner),
        None => fail(MgStatus::NullArgument, "report is null"),
    })
}

/// # Safety
/// `report` must be a valid report handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mg_report_passed(report: *const MgReport, out: *mut bool) -> MgStatus {
    with_report(report, |r| {
        if out.is_null() {
            return fail(MgStatus::NullArgument, "out is null");
        }
        *out = r.passed;
        MgStatus::Ok
    })
}

/// Teleported-state fidelity (worst branch). NaN when the run has none.
///
/// # Safety
/// `report` must be a valid report handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mg_report_final_fidelity(report: *const MgReport, out: *mut f64) -> MgStatus {
    with_report(report, |r| {
        if out.is_null() {
            return fail(MgStatus::NullArgument, "out is null");
        }
        *out = r.final_fidelity.unwrap_or(f64::NAN);
        MgStatus::Ok
    })
}

/// # Safety
/// `report` must be a valid report handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mg_report_cumulative_prob(report: *const MgReport, out: *mut f64) -> MgStatus {
    with_report(report, |r| {
        if out.is_null() {
            return fail(MgStatus::NullArgument, "out is null");
        }
        *out = r.cumulative_prob;
        MgStatus::Ok
    })
}

/// The report as JSON.
///
/// # Safety
/// `report` must be a valid report handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mg_report_json(report: *const MgReport, out: *mut *mut c_char) -> MgStatus {
    with_report(report, |r| {
        if out.is_null() {
            return fail(MgStatus::NullArgument, "out is null");
        }
        write_string(out, r.to_json())
    })
}

/// Symbolic state after a `gauge:X,condense:Y` sequence, e.g. state `SX`.
///
/// # Safety
/// `state` and `seq` must be NUL-terminated strings, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mg_oracle(state: *const c_char, seq: *const c_char, out: *mut *mut c_char) -> MgStatus {
    guard(|| {
        if out.is_null() {
            return fail(MgStatus::NullArgument, "out is null");
        }
        let (st, sq) = match (read_str(state), read_str(seq)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match parse_state(st).and_then(|s| run_sequence(&s, &parse_sequence(sq)?)) {
            Ok(s) => write_string(out, s.to_string()),
            Err(e) => fail(MgStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Condensability report for a named algebra or an expression in `Z(D4)`.
///
/// # Safety
/// `algebra` must be a NUL-terminated string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mg_check_algebra(algebra: *const c_char, out: *mut *mut c_char) -> MgStatus {
    guard(|| {
        if out.is_null() {
            return fail(MgStatus::NullArgument, "out is null");
        }
        let spec = match read_str(algebra) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let res = named_algebra(spec)
            .or_else(|_| theory("ZD4").and_then(|t| CondensableAlgebra::parse(&t, spec).map(|a| (t, a))))
            .and_then(|(t, a)| check_condensable(&t, &a));
        match res {
            Ok(r) => write_string(out, r.to_string()),
            Err(e) => fail(MgStatus::InvalidArgument, e.to_string()),
        }
    })
}
