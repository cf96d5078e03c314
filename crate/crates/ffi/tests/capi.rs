use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use ultranorm_ffi::*;

#[test]
fn sequence_round_trip() {
    let mut seq = ptr::null_mut();
    assert_eq!(unsafe { un_sequence_gevrey(1.0, &mut seq) }, UnStatus::Ok);
    let mut v = 0.0;
    assert_eq!(unsafe { un_sequence_log_value(seq, 5, &mut v) }, UnStatus::Ok);
    assert!((v - 120f64.ln()).abs() < 1e-12);
    assert_eq!(unsafe { un_sequence_associated_function(seq, 1.0, &mut v) }, UnStatus::Ok);
    assert_eq!(v, 0.0);
    unsafe { un_sequence_free(seq) };
}

#[test]
fn log_table_sequence() {
    let logs = [0.0, 0.0, 2f64.ln(), 6f64.ln()];
    let mut seq = ptr::null_mut();
    assert_eq!(
        unsafe { un_sequence_from_log_values(logs.as_ptr(), logs.len(), &mut seq) },
        UnStatus::Ok
    );
    let mut v = 0.0;
    assert_eq!(unsafe { un_sequence_log_value(seq, 3, &mut v) }, UnStatus::Ok);
    assert_eq!(v, 6f64.ln());
    unsafe { un_sequence_free(seq) };
    assert_eq!(
        unsafe { un_sequence_from_log_values(ptr::null(), 3, &mut seq) },
        UnStatus::NullPointer
    );
}

#[test]
fn experiment_commands() {
    let cfg = CString::new(r#"{"functions": {"subset": ["gauss_w1"]}}"#).unwrap();
    let mut exp = ptr::null_mut();
    assert_eq!(unsafe { un_experiment_from_json(cfg.as_ptr(), ptr::null(), &mut exp) }, UnStatus::Ok);
    let mut n = 0usize;
    assert_eq!(unsafe { un_experiment_family_len(exp, &mut n) }, UnStatus::Ok);
    assert_eq!(n, 1);

    let cmd = CString::new("assoc").unwrap();
    let mut json = ptr::null_mut();
    let mut code = -1;
    assert_eq!(unsafe { un_run_command(exp, cmd.as_ptr(), &mut json, &mut code) }, UnStatus::Ok);
    assert_eq!(code, 0);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { un_string_free(json) };
    assert!(text.contains("\"schema\": \"ultranorm/1\""));

    let bad = CString::new("nope").unwrap();
    assert_eq!(
        unsafe { un_run_command(exp, bad.as_ptr(), &mut json, &mut code) },
        UnStatus::InvalidArgument
    );
    let msg = unsafe { CStr::from_ptr(un_last_error()) }.to_str().unwrap();
    assert!(msg.contains("nope"));
    unsafe { un_experiment_free(exp) };
}

#[test]
fn config_errors_map_to_status() {
    let cfg = CString::new(r#"{"dim": 3}"#).unwrap();
    let mut exp = ptr::null_mut();
    assert_eq!(unsafe { un_experiment_from_json(cfg.as_ptr(), ptr::null(), &mut exp) }, UnStatus::Config);
    assert!(exp.is_null());
}

#[test]
fn gaussian_stft_closed_form() {
    // V_ψ f(0, 0) = 2^{-1/2} for f = ψ = e^{-π u²}
    let (mut re, mut im) = (0.0, 0.0);
    let pi = std::f64::consts::PI;
    assert_eq!(unsafe { un_stft_gaussian_1d(pi, pi, 0.0, 0.0, &mut re, &mut im) }, UnStatus::Ok);
    assert!((re - 0.5f64.sqrt()).abs() < 1e-14 && im.abs() < 1e-14);
}

#[test]
fn c_program_links_against_static_library() {
    let exe = std::env::current_exe().unwrap();
    let target = exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf();
    let lib = target.join("libultranorm_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("ultranorm_smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let run = Command::new(&out).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
}
