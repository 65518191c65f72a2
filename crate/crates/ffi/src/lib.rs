//! C ABI for `orient-core`.
//!
//! Tasks go in as TOML text and come back as an opaque [`OrientReport`]
//! handle. Every entry point returns an [`OrientStatus`]; on anything other
//! than `ORIENT_STATUS_OK` or `ORIENT_STATUS_VERDICT_FAILED` the message is
//! available from [`orient_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use orient_core::task::{render_machine, render_text, run_task_str, Report, RunOptions};
use orient_core::Error;

/// Status codes. The first four match the exit status of the `orient` binary.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrientStatus {
    Ok = 0,
    /// The task ran but an expectation or axiom check failed.
    VerdictFailed = 1,
    /// Parse error, unknown name, malformed input.
    InvalidInput = 2,
    /// The truncation was too small for a sound answer.
    Truncation = 3,
    NullPointer = 4,
    /// Text was not valid UTF-8.
    Encoding = 5,
    /// Internal failure; a bug.
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrientOutput {
    Text = 0,
    Machine = 1,
}

/// A finished run. Opaque to C.
pub struct OrientReport {
    inner: Report,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(s));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> OrientStatus {
    if e.is_truncation() {
        OrientStatus::Truncation
    } else {
        OrientStatus::InvalidInput
    }
}

fn guarded(f: impl FnOnce() -> OrientStatus) -> OrientStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            OrientStatus::Panic
        }
    }
}

/// Runs a task given as TOML text.
///
/// `cap` and `max_cap` override the file's truncation settings; pass 0 to
/// keep them. On `ORIENT_STATUS_OK` and `ORIENT_STATUS_VERDICT_FAILED`,
/// `*out` receives a report to release with [`orient_report_free`];
/// otherwise it is set to NULL.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn orient_run_task(
    toml: *const c_char,
    cap: u32,
    max_cap: u32,
    out: *mut *mut OrientReport,
) -> OrientStatus {
    guarded(|| {
        if out.is_null() {
            set_error("`out` is NULL");
            return OrientStatus::NullPointer;
        }
        *out = ptr::null_mut();
        if toml.is_null() {
            set_error("`toml` is NULL");
            return OrientStatus::NullPointer;
        }
        let Ok(src) = CStr::from_ptr(toml).to_str() else {
            set_error("task text is not UTF-8");
            return OrientStatus::Encoding;
        };
        let opts = RunOptions {
            order: None,
            cap: (cap > 0).then_some(cap),
            max_cap: (max_cap > 0).then_some(max_cap),
        };
        match run_task_str(src, &opts) {
            Ok(report) => {
                let status = if report.passed() {
                    OrientStatus::Ok
                } else {
                    OrientStatus::VerdictFailed
                };
                *out = Box::into_raw(Box::new(OrientReport { inner: report }));
                status
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Whether every verdict in the report passed. NULL gives false.
///
/// # Safety
/// `report` must be NULL or a live handle from [`orient_run_task`].
#[no_mangle]
pub unsafe extern "C" fn orient_report_passed(report: *const OrientReport) -> bool {
    report.as_ref().is_some_and(|r| r.inner.passed())
}

/// Renders the report. The string must be released with
/// [`orient_string_free`]. Returns NULL if `report` is NULL.
///
/// # Safety
/// `report` must be NULL or a live handle from [`orient_run_task`].
#[no_mangle]
pub unsafe extern "C" fn orient_report_render(
    report: *const OrientReport,
    format: OrientOutput,
) -> *mut c_char {
    let Some(r) = report.as_ref() else {
        set_error("`report` is NULL");
        return ptr::null_mut();
    };
    let s = match format {
        OrientOutput::Text => render_text(&r.inner),
        OrientOutput::Machine => render_machine(&r.inner),
    };
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// # Safety
/// `report` must be NULL or a handle from [`orient_run_task`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn orient_report_free(report: *mut OrientReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must be NULL or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn orient_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The message of the last failure on this thread, or NULL. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn orient_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}
