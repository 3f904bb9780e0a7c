use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use drdm_ffi::*;

fn last_error() -> String {
    let p = drdm_last_error();
    assert!(!p.is_null(), "no error recorded");
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn take(p: *mut c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { drdm_string_free(p) };
    s
}

fn new_engine() -> *mut DrdmEngine {
    let mut engine = ptr::null_mut();
    assert_eq!(unsafe { drdm_engine_new(ptr::null(), &mut engine) }, DrdmStatus::Ok);
    assert!(!engine.is_null());
    engine
}

#[test]
fn session_round_trip() {
    let engine = new_engine();
    let mut id = ptr::null_mut();
    assert_eq!(unsafe { drdm_session_create(engine, true, 7, &mut id) }, DrdmStatus::Ok);
    let id = CString::new(take(id)).unwrap();

    let text = CString::new("let's talk about travel").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { drdm_session_turn(engine, id.as_ptr(), text.as_ptr(), &mut out) }, DrdmStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(v["reply"]["text"], "Are you planning on going on any trips soon?");

    let mut summary = ptr::null_mut();
    assert_eq!(unsafe { drdm_session_end(engine, id.as_ptr(), &mut summary) }, DrdmStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take(summary)).unwrap();
    assert_eq!(v["ended"], true);
    assert_eq!(v["turns"], 1);

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { drdm_session_turn(engine, id.as_ptr(), text.as_ptr(), &mut out) }, DrdmStatus::Input);
    assert!(out.is_null());
    assert!(last_error().contains("ended"));
    unsafe { drdm_engine_free(engine) };
}

#[test]
fn errors_map_to_status_codes() {
    let engine = new_engine();
    let missing = CString::new("missing").unwrap();
    let hi = CString::new("hi").unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { drdm_session_turn(engine, missing.as_ptr(), hi.as_ptr(), &mut out) };
    assert_eq!(status, DrdmStatus::UnknownSession);
    assert!(last_error().contains("missing"));

    assert_eq!(unsafe { drdm_session_turn(engine, ptr::null(), hi.as_ptr(), &mut out) }, DrdmStatus::NullArgument);
    assert_eq!(unsafe { drdm_session_turn(ptr::null(), missing.as_ptr(), hi.as_ptr(), &mut out) }, DrdmStatus::NullArgument);
    assert_eq!(unsafe { drdm_session_create(engine, false, 0, ptr::null_mut()) }, DrdmStatus::NullArgument);

    let bad = [0xffu8, 0xfe, 0];
    let status = unsafe { drdm_session_turn(engine, bad.as_ptr().cast(), hi.as_ptr(), &mut out) };
    assert_eq!(status, DrdmStatus::InvalidUtf8);

    let nowhere = CString::new("/nonexistent/engine.toml").unwrap();
    let mut other = ptr::null_mut();
    assert_eq!(unsafe { drdm_engine_new(nowhere.as_ptr(), &mut other) }, DrdmStatus::Config);
    assert!(other.is_null());

    let mut id = ptr::null_mut();
    assert_eq!(unsafe { drdm_session_create(engine, false, 0, &mut id) }, DrdmStatus::Ok);
    assert!(drdm_last_error().is_null(), "success clears the error");
    unsafe { drdm_string_free(id) };
    unsafe { drdm_engine_free(engine) };
}

#[test]
fn freeing_null_is_harmless() {
    unsafe {
        drdm_engine_free(ptr::null_mut());
        drdm_string_free(ptr::null_mut());
    }
}

#[test]
fn version_matches_the_package() {
    let v = unsafe { CStr::from_ptr(drdm_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn header() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include").join("drdm.h")
}

#[test]
fn header_declares_every_export() {
    let h = std::fs::read_to_string(header()).unwrap();
    for name in [
        "drdm_engine_new",
        "drdm_engine_free",
        "drdm_session_create",
        "drdm_session_turn",
        "drdm_session_end",
        "drdm_string_free",
        "drdm_last_error",
        "drdm_version",
        "typedef struct DrdmEngine DrdmEngine",
        "DRDM_STATUS_OK = 0",
        "DRDM_STATUS_PANIC = 8",
    ] {
        assert!(h.contains(name), "header lacks {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = std::env::var("CC").or_else(|_| which("cc").ok_or(())) else {
        eprintln!("no C compiler found; header syntax not checked");
        return;
    };
    let src = target_tmp("use_header.c");
    std::fs::write(
        &src,
        "#include \"drdm.h\"\nint main(void) { DrdmEngine *e = 0; DrdmStatus s = drdm_engine_new(0, &e); (void)s; return 0; }\n",
    )
    .unwrap();
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header().parent().unwrap())
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which(bin: &str) -> Option<String> {
    std::env::var_os("PATH")?
        .to_string_lossy()
        .split(':')
        .map(|d| PathBuf::from(d).join(bin))
        .find(|p| p.is_file())
        .map(|p| p.to_string_lossy().into_owned())
}

fn target_tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}
