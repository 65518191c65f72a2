use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use orient_ffi::*;

fn run(src: &str, cap: u32, max_cap: u32) -> (OrientStatus, *mut OrientReport) {
    let src = CString::new(src).unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { orient_run_task(src.as_ptr(), cap, max_cap, &mut out) };
    (status, out)
}

fn last_error() -> Option<String> {
    let p = orient_last_error();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

const P2_SECTIONS: &str = r#"
theory = "ktheory"
task = "localize"
space = { kind = "proj", n = 2 }
lines = { l = { degrees = [-1] } }
integrand = "1 - beta*l"
expect = "3*beta^2"
"#;

#[test]
fn round_trip() {
    let (status, report) = run(P2_SECTIONS, 0, 0);
    assert_eq!(status, OrientStatus::Ok, "{:?}", last_error());
    assert!(unsafe { orient_report_passed(report) });
    let s = unsafe { orient_report_render(report, OrientOutput::Text) };
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    assert!(text.contains("3*beta^2"), "{text}");
    unsafe {
        orient_string_free(s);
        orient_report_free(report);
    }
    assert!(last_error().is_none());
}

#[test]
fn status_codes() {
    let (status, report) = run("task = 1", 0, 0);
    assert_eq!(status, OrientStatus::InvalidInput);
    assert!(report.is_null());
    assert!(last_error().unwrap().contains("parse"));

    let (status, report) = run(&P2_SECTIONS.replace("3*beta", "4*beta"), 0, 0);
    assert_eq!(status, OrientStatus::VerdictFailed);
    assert!(!unsafe { orient_report_passed(report) });
    unsafe { orient_report_free(report) };

    let (status, report) = run(P2_SECTIONS, 0, 3);
    assert_eq!(status, OrientStatus::Truncation);
    assert!(report.is_null());
}

#[test]
fn null_and_bad_input() {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { orient_run_task(ptr::null(), 0, 0, &mut out) }, OrientStatus::NullPointer);
    let src = CString::new("x").unwrap();
    assert_eq!(unsafe { orient_run_task(src.as_ptr(), 0, 0, ptr::null_mut()) }, OrientStatus::NullPointer);
    let bad = [0xffu8, 0xfe, 0];
    assert_eq!(
        unsafe { orient_run_task(bad.as_ptr().cast(), 0, 0, &mut out) },
        OrientStatus::Encoding
    );
    assert!(unsafe { orient_report_render(ptr::null(), OrientOutput::Text) }.is_null());
    assert!(!unsafe { orient_report_passed(ptr::null()) });
    unsafe {
        orient_report_free(ptr::null_mut());
        orient_string_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/orient.h")).unwrap();
    for name in [
        "typedef struct OrientReport OrientReport;",
        "ORIENT_STATUS_TRUNCATION = 3",
        "orient_run_task(",
        "orient_report_render(",
        "orient_report_free(",
        "orient_string_free(",
        "orient_last_error(void)",
    ] {
        assert!(h.contains(name), "header lacks {name}");
    }
}

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("liborient_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let bin = tempfile::tempdir().unwrap();
    let exe = bin.path().join("smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(dir.join("include"))
        .arg(dir.join("tests/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("a C compiler is available");
    assert!(status.success(), "compiling smoke.c failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "smoke exited with {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
