//! C ABI over the `ultranorm` library.
//!
//! Objects cross the boundary as opaque handles created by `un_*_new` or
//! `un_*_from_*` and released by the matching `un_*_free`. Every fallible
//! call returns an [`UnStatus`]; on failure the message is available from
//! [`un_last_error`] on the same thread until the next failing call.
//! Strings returned by the library are released with [`un_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::sync::Arc;

use ultranorm::commands::{self, CommandKind};
use ultranorm::config::{Experiment, ExperimentConfig};
use ultranorm::hermite::HermiteGaussian;
use ultranorm::sequence::WeightSequence;
use ultranorm::stft::stft_direct;
use ultranorm::Error;

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Numeric = 4,
    Unsupported = 5,
    Io = 6,
    Panic = 7,
}

/// A weight sequence `M_p`.
pub struct UnSequence {
    inner: Arc<WeightSequence>,
}

/// A resolved experiment configuration with its numeric objects.
pub struct UnExperiment {
    inner: Experiment,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> UnStatus {
    match err {
        Error::InvalidArgument(_) | Error::Dimension { .. } | Error::OrthogonalWindows(_) => UnStatus::InvalidArgument,
        Error::Config(_) | Error::Json(_) | Error::Csv(_) => UnStatus::Config,
        Error::Unsupported(_) => UnStatus::Unsupported,
        Error::Io(_) => UnStatus::Io,
        _ => UnStatus::Numeric,
    }
}

/// Runs `f`, mapping errors and panics to status codes.
fn guard(f: impl FnOnce() -> Result<(), (UnStatus, String)>) -> UnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => UnStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            UnStatus::Panic
        }
    }
}

fn lib<T>(r: ultranorm::Result<T>) -> Result<T, (UnStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (UnStatus, String) {
    (UnStatus::NullPointer, format!("{what} is null"))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (UnStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (UnStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), (UnStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failing call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn un_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn un_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn un_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Gevrey sequence `p!^s`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn un_sequence_gevrey(s: f64, out: *mut *mut UnSequence) -> UnStatus {
    guard(|| {
        let seq = lib(WeightSequence::gevrey(s))?;
        write(out, Box::into_raw(Box::new(UnSequence { inner: Arc::new(seq) })), "out")
    })
}

/// Sequence from `len` values `log M_0, log M_1, ...`.
///
/// # Safety
/// `log_values` must point to `len` doubles; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn un_sequence_from_log_values(
    log_values: *const f64,
    len: usize,
    out: *mut *mut UnSequence,
) -> UnStatus {
    guard(|| {
        if log_values.is_null() {
            return Err(null("log_values"));
        }
        let values = std::slice::from_raw_parts(log_values, len).to_vec();
        let seq = lib(WeightSequence::from_log_values("table", values))?;
        write(out, Box::into_raw(Box::new(UnSequence { inner: Arc::new(seq) })), "out")
    })
}

/// # Safety
/// `seq` must come from this library and not have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn un_sequence_free(seq: *mut UnSequence) {
    if !seq.is_null() {
        drop(Box::from_raw(seq));
    }
}

/// `log M_p`.
///
/// # Safety
/// `seq` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn un_sequence_log_value(seq: *const UnSequence, p: usize, out: *mut f64) -> UnStatus {
    guard(|| {
        let seq = seq.as_ref().ok_or_else(|| null("seq"))?;
        write(out, lib(seq.inner.log_value(p))?, "out")
    })
}

/// Associated function `M(t)`.
///
/// # Safety
/// `seq` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn un_sequence_associated_function(
    seq: *const UnSequence,
    t: f64,
    out: *mut f64,
) -> UnStatus {
    guard(|| {
        let seq = seq.as_ref().ok_or_else(|| null("seq"))?;
        write(out, lib(seq.inner.associated_function(t))?, "out")
    })
}

/// Builds an experiment from JSON configuration text. Relative table paths
/// resolve against `base_dir` (NULL for the working directory).
///
/// # Safety
/// `json` and a non-NULL `base_dir` must be NUL-terminated; `out` must be
/// valid for a write.
#[no_mangle]
pub unsafe extern "C" fn un_experiment_from_json(
    json: *const c_char,
    base_dir: *const c_char,
    out: *mut *mut UnExperiment,
) -> UnStatus {
    guard(|| {
        let text = c_str(json, "json")?;
        let base = if base_dir.is_null() {
            "."
        } else {
            c_str(base_dir, "base_dir")?
        };
        let config = lib(ExperimentConfig::from_json(text))?;
        let exp = lib(Experiment::build(config, Path::new(base)))?;
        write(out, Box::into_raw(Box::new(UnExperiment { inner: exp })), "out")
    })
}

/// # Safety
/// `exp` must come from this library and not have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn un_experiment_free(exp: *mut UnExperiment) {
    if !exp.is_null() {
        drop(Box::from_raw(exp));
    }
}

/// Number of test functions in the experiment.
///
/// # Safety
/// `exp` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn un_experiment_family_len(exp: *const UnExperiment, out: *mut usize) -> UnStatus {
    guard(|| {
        let exp = exp.as_ref().ok_or_else(|| null("exp"))?;
        write(out, exp.inner.family.len(), "out")
    })
}

/// Runs a subcommand (`assoc`, `check-seq`, `regularize`, `weights`,
/// `seminorm`, `stft`, `verify`) and returns its JSON report in
/// `report_json` (free with [`un_string_free`]) and the CLI exit code in
/// `exit_code` (0 pass, 1 fail, 3 inconclusive).
///
/// # Safety
/// `exp` must be a live handle, `command` NUL-terminated, and both outputs
/// valid for a write.
#[no_mangle]
pub unsafe extern "C" fn un_run_command(
    exp: *const UnExperiment,
    command: *const c_char,
    report_json: *mut *mut c_char,
    exit_code: *mut i32,
) -> UnStatus {
    guard(|| {
        let exp = exp.as_ref().ok_or_else(|| null("exp"))?;
        if report_json.is_null() || exit_code.is_null() {
            return Err(null("output"));
        }
        let kind = match c_str(command, "command")? {
            "assoc" => CommandKind::Assoc,
            "check-seq" => CommandKind::CheckSeq,
            "regularize" => CommandKind::Regularize,
            "weights" => CommandKind::Weights,
            "seminorm" => CommandKind::Seminorm,
            "stft" => CommandKind::Stft,
            "verify" => CommandKind::Verify,
            other => return Err((UnStatus::InvalidArgument, format!("unknown command `{other}`"))),
        };
        let out = lib(commands::run(kind, &exp.inner, false))?;
        let text = lib(out.report.to_json().map_err(Error::from))?;
        let c = CString::new(text).map_err(|_| (UnStatus::Numeric, "report contains NUL".to_string()))?;
        write(exit_code, out.report.exit_code(), "exit_code")?;
        write(report_json, c.into_raw(), "report_json")
    })
}

/// `V_ψ f(x, ξ)` in one dimension for `f = e^{-a_f u²}` and
/// `ψ = e^{-a_ψ u²}`, written as `(re, im)`.
///
/// # Safety
/// `re` and `im` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn un_stft_gaussian_1d(
    width_f: f64,
    width_psi: f64,
    x: f64,
    xi: f64,
    re: *mut f64,
    im: *mut f64,
) -> UnStatus {
    guard(|| {
        let f = lib(HermiteGaussian::gaussian(1, width_f))?;
        let psi = lib(HermiteGaussian::gaussian(1, width_psi))?;
        let v = lib(stft_direct(&f, &psi, &[x], &[xi]))?;
        write(re, v.re, "re")?;
        write(im, v.im, "im")
    })
}
