//! C ABI over the dialogue engine.
//!
//! Every function returns a [`DrdmStatus`]. On failure a message is kept per
//! thread and can be read with [`drdm_last_error`]. Strings handed out by the
//! library are owned by the caller and must be released with
//! [`drdm_string_free`]. Engines are opaque handles released with
//! [`drdm_engine_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use drdm_core::config::EngineConfig;
use drdm_core::engine::{Engine, EngineError};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrdmStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// The config file could not be read or is invalid.
    Config = 3,
    /// Bundled or configured resources failed to load.
    Resource = 4,
    UnknownSession = 5,
    /// The turn was rejected, for example empty text or an ended session.
    Input = 6,
    Internal = 7,
    /// A panic was caught at the boundary.
    Panic = 8,
}

/// Opaque engine handle.
pub struct DrdmEngine {
    inner: Engine,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(DrdmStatus, String);

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        let status = match &e {
            EngineError::UnknownSession(_) => DrdmStatus::UnknownSession,
            EngineError::SessionEnded(_) | EngineError::Input(_) => DrdmStatus::Input,
            EngineError::Resource(_) => DrdmStatus::Resource,
            EngineError::Internal(_) => DrdmStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

/// Runs `f`, records any failure and converts panics.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DrdmStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DrdmStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            DrdmStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(DrdmStatus::NullArgument, format!("`{name}` is null")));
    }
    // SAFETY: the caller passes a NUL-terminated string that outlives the call.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Failure(DrdmStatus::InvalidUtf8, format!("`{name}` is not UTF-8")))
}

unsafe fn engine_arg<'a>(p: *const DrdmEngine) -> Result<&'a Engine, Failure> {
    // SAFETY: non-null handles come from `drdm_engine_new` and are live until freed.
    unsafe { p.as_ref() }
        .map(|e| &e.inner)
        .ok_or_else(|| Failure(DrdmStatus::NullArgument, "`engine` is null".into()))
}

fn out_arg<T>(p: *mut T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(DrdmStatus::NullArgument, format!("`{name}` is null")))
    } else {
        Ok(())
    }
}

fn to_c(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(DrdmStatus::Internal, "output contains a NUL byte".into()))
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<*mut c_char, Failure> {
    let s = serde_json::to_string(v).map_err(|e| Failure(DrdmStatus::Internal, e.to_string()))?;
    to_c(s)
}

/// Creates an engine. `config_path` may be null for the defaults (the
/// `ENGINE_CONFIG` and `ENGINE_DATA_DIR` variables still apply).
///
/// # Safety
/// `config_path` must be null or a NUL-terminated string; `out` must be a
/// valid pointer to write the handle to.
#[no_mangle]
pub unsafe extern "C" fn drdm_engine_new(config_path: *const c_char, out: *mut *mut DrdmEngine) -> DrdmStatus {
    guard(|| {
        out_arg(out, "out")?;
        let path = if config_path.is_null() { None } else { Some(unsafe { str_arg(config_path, "config_path") }?) };
        let config =
            EngineConfig::from_env(path.map(Path::new)).map_err(|e| Failure(DrdmStatus::Config, e.to_string()))?;
        let inner = Engine::from_config(config)?;
        // SAFETY: checked non-null above.
        unsafe { *out = Box::into_raw(Box::new(DrdmEngine { inner })) };
        Ok(())
    })
}

/// Releases an engine and every session in it. Null is ignored.
///
/// # Safety
/// `engine` must be null or a handle from `drdm_engine_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn drdm_engine_free(engine: *mut DrdmEngine) {
    if !engine.is_null() {
        // SAFETY: ownership returns to Rust exactly once.
        drop(unsafe { Box::from_raw(engine) });
    }
}

/// Starts a session. When `use_seed` is false the seed comes from the
/// config or the system. The new session id is written to `out_id`.
///
/// # Safety
/// `engine` must be a live handle and `out_id` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn drdm_session_create(
    engine: *const DrdmEngine,
    use_seed: bool,
    seed: u64,
    out_id: *mut *mut c_char,
) -> DrdmStatus {
    guard(|| {
        let engine = unsafe { engine_arg(engine) }?;
        out_arg(out_id, "out_id")?;
        let info = engine.create_session(use_seed.then_some(seed))?;
        let id = to_c(info.session_id)?;
        // SAFETY: checked non-null above.
        unsafe { *out_id = id };
        Ok(())
    })
}

/// Runs one turn and writes the response as JSON to `out_json`.
///
/// # Safety
/// `engine` must be a live handle, `session_id` and `text` NUL-terminated
/// strings and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn drdm_session_turn(
    engine: *const DrdmEngine,
    session_id: *const c_char,
    text: *const c_char,
    out_json: *mut *mut c_char,
) -> DrdmStatus {
    guard(|| {
        let engine = unsafe { engine_arg(engine) }?;
        let id = unsafe { str_arg(session_id, "session_id") }?;
        let text = unsafe { str_arg(text, "text") }?;
        out_arg(out_json, "out_json")?;
        let response = engine.say(id, text)?;
        let json = to_json(&response)?;
        // SAFETY: checked non-null above.
        unsafe { *out_json = json };
        Ok(())
    })
}

/// Ends a session. When `out_json` is not null the session summary is
/// written there as JSON.
///
/// # Safety
/// `engine` must be a live handle, `session_id` a NUL-terminated string and
/// `out_json` null or a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn drdm_session_end(
    engine: *const DrdmEngine,
    session_id: *const c_char,
    out_json: *mut *mut c_char,
) -> DrdmStatus {
    guard(|| {
        let engine = unsafe { engine_arg(engine) }?;
        let id = unsafe { str_arg(session_id, "session_id") }?;
        let info = engine.end_session(id)?;
        if !out_json.is_null() {
            let json = to_json(&info)?;
            // SAFETY: checked non-null.
            unsafe { *out_json = json };
        }
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn drdm_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: the string was produced by `CString::into_raw`.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn drdm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn drdm_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}
