use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use qlie_ffi::*;

fn last_error() -> String {
    let p = qlie_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn summary(sys: *const QlieSystem, tol: f64) -> QlieSummary {
    let mut report = ptr::null_mut();
    let mut s = QlieSummary::default();
    unsafe {
        assert_eq!(qlie_analyze(sys, tol, &mut report), QlieStatus::Ok);
        assert_eq!(qlie_report_summary(report, &mut s), QlieStatus::Ok);
        qlie_report_free(report);
    }
    s
}

const SZ_SX: &str = r#"{
  "n": 2,
  "h0": {"re": [[1, 0], [0, -1]], "im": [[0, 0], [0, 0]]},
  "mu": [{"re": [[0, 1], [1, 0]], "im": [[0, 0], [0, 0]]}],
  "functionals": {"type": "monomial", "degree": 1},
  "value_set": [-1, 0, 1]
}"#;

#[test]
fn analyze_from_json() {
    let json = CString::new(SZ_SX).unwrap();
    let mut sys = ptr::null_mut();
    unsafe {
        assert_eq!(qlie_system_from_json(json.as_ptr(), &mut sys), QlieStatus::Ok);
        assert!(qlie_last_error_message().is_null());
        assert_eq!(qlie_system_dim(sys), 2);
        let s = summary(sys, 0.0);
        assert_eq!(s.lie_dim, 3);
        assert_eq!(s.centralizer_dim, 1);
        assert!(s.density_controllable && s.wavefunction_controllable && !s.any_nonzero_trace);
        qlie_system_free(sys);
    }
}

#[test]
fn report_json_round_trip() {
    let mut sys = ptr::null_mut();
    let mut report = ptr::null_mut();
    let mut text = ptr::null_mut();
    unsafe {
        assert_eq!(qlie_model_oscillator(3, &mut sys), QlieStatus::Ok);
        assert_eq!(qlie_analyze(sys, 1e-8, &mut report), QlieStatus::Ok);
        assert_eq!(qlie_report_to_json(report, &mut text), QlieStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(text).to_str().unwrap()).unwrap();
        assert_eq!(v["lie_dim"], serde_json::json!(9));
        assert_eq!(v["wavefunction_controllable"], serde_json::json!(true));
        assert_eq!(v["tolerances"]["closure"], serde_json::json!(1e-8));
        assert_eq!(
            qlie_report_warning_count(report),
            v["warnings"].as_array().unwrap().len()
        );
        qlie_string_free(text);
        qlie_report_free(report);
        qlie_system_free(sys);
    }
}

#[test]
fn models() {
    let mut sys = ptr::null_mut();
    unsafe {
        assert_eq!(qlie_model_diagonal(3, &mut sys), QlieStatus::Ok);
        let s = summary(sys, 0.0);
        assert!(!s.density_controllable && !s.wavefunction_controllable);
        qlie_system_free(sys);

        assert_eq!(qlie_model_random(3, 2, 11, &mut sys), QlieStatus::Ok);
        assert_eq!(qlie_system_dim(sys), 3);
        qlie_system_free(sys);

        assert_eq!(qlie_model_oscillator(1, &mut sys), QlieStatus::InvalidInput);
        assert!(last_error().contains("dimension"));
    }
}

#[test]
fn rejects_bad_input() {
    let mut sys = ptr::null_mut();
    unsafe {
        assert_eq!(
            qlie_system_from_json(ptr::null(), &mut sys),
            QlieStatus::NullPointer
        );
        let garbage = CString::new("{").unwrap();
        assert_eq!(
            qlie_system_from_json(garbage.as_ptr(), &mut sys),
            QlieStatus::InvalidInput
        );
        let bad = CString::new(SZ_SX.replace("[[0, 1], [1, 0]]", "[[0, 1], [2, 0]]")).unwrap();
        assert_eq!(
            qlie_system_from_json(bad.as_ptr(), &mut sys),
            QlieStatus::InvalidInput
        );
        assert!(last_error().contains("mu[0]"), "{}", last_error());
        let bytes = b"\xff\xfe\0";
        assert_eq!(
            qlie_system_from_json(bytes.as_ptr().cast(), &mut sys),
            QlieStatus::Utf8
        );
        let json = CString::new(SZ_SX).unwrap();
        assert_eq!(
            qlie_system_from_json(json.as_ptr(), ptr::null_mut()),
            QlieStatus::NullPointer
        );

        let mut report = ptr::null_mut();
        assert_eq!(
            qlie_analyze(ptr::null(), 0.0, &mut report),
            QlieStatus::NullPointer
        );
        assert_eq!(
            qlie_report_summary(ptr::null(), ptr::null_mut()),
            QlieStatus::NullPointer
        );
        assert_eq!(qlie_system_dim(ptr::null()), 0);
        qlie_system_free(ptr::null_mut());
        qlie_report_free(ptr::null_mut());
        qlie_string_free(ptr::null_mut());

        assert_eq!(qlie_system_from_json(json.as_ptr(), &mut sys), QlieStatus::Ok);
        assert_eq!(qlie_analyze(sys, 2.0, &mut report), QlieStatus::InvalidInput);
        qlie_system_free(sys);
    }
}

#[test]
fn propagate_pi_pulse() {
    let json = CString::new(SZ_SX.replace("[[1, 0], [0, -1]]", "[[0, 0], [0, 0]]")).unwrap();
    let mut sys = ptr::null_mut();
    let (re_in, im_in) = ([1.0, 0.0], [0.0, 0.0]);
    let (mut re, mut im) = ([0.0; 2], [0.0; 2]);
    let durations = [std::f64::consts::FRAC_PI_2];
    let values = [1.0];
    unsafe {
        assert_eq!(qlie_system_from_json(json.as_ptr(), &mut sys), QlieStatus::Ok);
        let status = qlie_propagate_state(
            sys,
            durations.as_ptr(),
            values.as_ptr(),
            1,
            re_in.as_ptr(),
            im_in.as_ptr(),
            re.as_mut_ptr(),
            im.as_mut_ptr(),
            2,
        );
        assert_eq!(status, QlieStatus::Ok);
        assert!(re[0].hypot(im[0]) < 1e-12);
        assert!((re[1].hypot(im[1]) - 1.0).abs() < 1e-12);

        let status = qlie_propagate_state(
            sys,
            ptr::null(),
            ptr::null(),
            0,
            re_in.as_ptr(),
            im_in.as_ptr(),
            re.as_mut_ptr(),
            im.as_mut_ptr(),
            2,
        );
        assert_eq!(status, QlieStatus::Ok);
        assert_eq!((re, im), (re_in, im_in));

        let unnormalized = [1.0, 1.0];
        let status = qlie_propagate_state(
            sys,
            ptr::null(),
            ptr::null(),
            0,
            unnormalized.as_ptr(),
            im_in.as_ptr(),
            re.as_mut_ptr(),
            im.as_mut_ptr(),
            2,
        );
        assert_eq!(status, QlieStatus::InvalidInput);

        let negative = [-1.0];
        let status = qlie_propagate_state(
            sys,
            negative.as_ptr(),
            values.as_ptr(),
            1,
            re_in.as_ptr(),
            im_in.as_ptr(),
            re.as_mut_ptr(),
            im.as_mut_ptr(),
            2,
        );
        assert_eq!(status, QlieStatus::InvalidInput);

        let status = qlie_propagate_state(
            sys,
            ptr::null(),
            ptr::null(),
            0,
            re_in.as_ptr(),
            im_in.as_ptr(),
            re.as_mut_ptr(),
            im.as_mut_ptr(),
            3,
        );
        assert_eq!(status, QlieStatus::InvalidInput);
        qlie_system_free(sys);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(qlie_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api_and_compiles() {
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let header = std::fs::read_to_string(include.join("qlie.h")).unwrap();
    for name in [
        "qlie_system_from_json",
        "qlie_model_oscillator",
        "qlie_model_diagonal",
        "qlie_model_random",
        "qlie_system_free",
        "qlie_analyze",
        "qlie_report_summary",
        "qlie_report_to_json",
        "qlie_report_free",
        "qlie_string_free",
        "qlie_propagate_state",
        "qlie_last_error_message",
        "typedef struct QlieSystem QlieSystem",
        "typedef struct QlieReport QlieReport",
        "QLIE_STATUS_CONSISTENCY = 3",
    ] {
        assert!(header.contains(name), "missing {name}");
    }

    let Ok(cc) = which_cc() else { return };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        r#"#include "qlie.h"
int main(void) {
    QlieSystem *sys = NULL;
    QlieReport *rep = NULL;
    QlieSummary s;
    if (qlie_model_oscillator(3, &sys) != QLIE_STATUS_OK) return 1;
    if (qlie_analyze(sys, 0.0, &rep) != QLIE_STATUS_OK) return 2;
    qlie_report_summary(rep, &s);
    qlie_report_free(rep);
    qlie_system_free(sys);
    return s.wavefunction_controllable ? 0 : 3;
}
"#,
    )
    .unwrap();
    for lang in [["-x", "c", "-std=c99"], ["-x", "c++", "-std=c++11"]] {
        let out = Command::new(&cc)
            .args(lang)
            .arg("-fsyntax-only")
            .arg("-Wall")
            .arg("-Werror")
            .arg("-I")
            .arg(&include)
            .arg(&src)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "clang", "gcc"] {
        if Command::new(cc)
            .arg("--version")
            .output()
            .is_ok_and(|o| o.status.success())
        {
            return Ok(cc.to_string());
        }
    }
    Err(())
}
