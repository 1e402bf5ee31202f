use std::ffi::{CStr, CString};
use std::ptr;

use magicgauge_ffi::*;

fn last_error() -> String {
    let p = mg_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn take(p: *mut std::ffi::c_char) -> String {
    let s = CStr::from_ptr(p).to_string_lossy().into_owned();
    mg_string_free(p);
    s
}

#[test]
fn run_through_handles() {
    unsafe {
        let mut cfg = ptr::null_mut();
        assert_eq!(mg_config_new(&mut cfg), MgStatus::Ok);
        assert_eq!(mg_config_set_option(cfg, MgOption::Condense, true), MgStatus::Ok);
        let mut rep = ptr::null_mut();
        assert_eq!(mg_run(cfg, &mut rep), MgStatus::Ok);
        let mut passed = false;
        let mut fid = 0.0;
        let mut prob = 0.0;
        assert_eq!(mg_report_passed(rep, &mut passed), MgStatus::Ok);
        assert_eq!(mg_report_final_fidelity(rep, &mut fid), MgStatus::Ok);
        assert_eq!(mg_report_cumulative_prob(rep, &mut prob), MgStatus::Ok);
        assert!(passed);
        assert!(fid >= 1.0 - 1e-9);
        assert!(prob > 0.0 && prob <= 1.0);
        let mut json = ptr::null_mut();
        assert_eq!(mg_report_json(rep, &mut json), MgStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take(json)).unwrap();
        assert_eq!(v["stages"].as_array().unwrap().last().unwrap()["stage"], "teleport");
        mg_report_free(rep);
        mg_config_free(cfg);
    }
}

#[test]
fn config_errors_set_last_error() {
    unsafe {
        let mut cfg = ptr::null_mut();
        let bad = CString::new("patch = \"1x1\"\nbogus = 2").unwrap();
        assert_eq!(mg_config_from_toml(bad.as_ptr(), &mut cfg), MgStatus::Config);
        assert!(last_error().contains("bogus"));
        assert!(cfg.is_null());
        let good = CString::new("mode = \"sample\"\nseed = 3").unwrap();
        assert_eq!(mg_config_from_toml(good.as_ptr(), &mut cfg), MgStatus::Ok);
        assert_eq!(mg_config_set_patch(cfg, 0, 1), MgStatus::Config);
        mg_config_free(cfg);
    }
}

#[test]
fn null_arguments_are_rejected() {
    unsafe {
        assert_eq!(mg_config_new(ptr::null_mut()), MgStatus::NullArgument);
        let mut rep = ptr::null_mut();
        assert_eq!(mg_run(ptr::null(), &mut rep), MgStatus::NullArgument);
        assert!(last_error().contains("null"));
        let mut b = false;
        assert_eq!(mg_report_passed(ptr::null(), &mut b), MgStatus::NullArgument);
        mg_config_free(ptr::null_mut());
        mg_report_free(ptr::null_mut());
        mg_string_free(ptr::null_mut());
    }
}

#[test]
fn oracle_and_algebra_checks() {
    unsafe {
        let state = CString::new("SX").unwrap();
        let seq = CString::new("gauge:A,condense:Ap").unwrap();
        let mut out = ptr::null_mut();
        assert_eq!(mg_oracle(state.as_ptr(), seq.as_ptr(), &mut out), MgStatus::Ok);
        assert_eq!(take(out), "|1> + e^{iπ/4}|e>");
        let bad = CString::new("condense:nope").unwrap();
        assert_eq!(mg_oracle(state.as_ptr(), bad.as_ptr(), &mut out), MgStatus::InvalidArgument);
        let alg = CString::new("L1").unwrap();
        assert_eq!(mg_check_algebra(alg.as_ptr(), &mut out), MgStatus::Ok);
        assert!(take(out).starts_with("condensable: yes, lagrangian: yes"));
        let alg = CString::new("1+fB").unwrap();
        assert_eq!(mg_check_algebra(alg.as_ptr(), &mut out), MgStatus::Ok);
        assert!(take(out).contains("spin violation"));
    }
}

#[test]
fn errors_are_thread_local() {
    unsafe {
        assert_eq!(mg_config_new(ptr::null_mut()), MgStatus::NullArgument);
    }
    let other = std::thread::spawn(|| mg_last_error().is_null()).join().unwrap();
    assert!(other);
}

#[test]
fn header_declares_every_export() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/magicgauge.h")).unwrap();
    for f in [
        "mg_last_error", "mg_string_free", "mg_config_new", "mg_config_from_toml", "mg_config_free",
        "mg_config_set_patch", "mg_config_set_mode", "mg_config_set_option", "mg_config_set_backend", "mg_run",
        "mg_report_free", "mg_report_passed", "mg_report_final_fidelity", "mg_report_cumulative_prob",
        "mg_report_json", "mg_oracle", "mg_check_algebra",
    ] {
        assert!(h.contains(&format!("{f}(")), "{f}");
    }
    assert!(h.contains("typedef struct MgConfig MgConfig;"));
}

#[test]
fn header_compiles_as_c() {
    let h = concat!(env!("CARGO_MANIFEST_DIR"), "/include/magicgauge.h");
    match std::process::Command::new("cc").args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", h]).status() {
        Ok(s) => assert!(s.success()),
        Err(_) => eprintln!("cc not available, skipped"),
    }
}
