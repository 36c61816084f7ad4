use std::f64::consts::PI;
use std::ffi::{CStr, CString};
use std::ptr;

use heatcut_ffi::*;

fn torus() -> *mut HcModel {
    let periods = [2.0 * PI, 2.0 * PI];
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { hc_model_torus(periods.as_ptr(), 2, &mut m) }, HcStatus::Ok);
    m
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(hc_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn kernel_and_energy() {
    let mut c = ptr::null_mut();
    unsafe {
        assert_eq!(hc_model_circle(1.0, &mut c), HcStatus::Ok);
        let (x, mut v, mut l) = ([0.0], 0.0, 0.0);
        assert_eq!(hc_heat_kernel(c, 0.5, x.as_ptr(), x.as_ptr(), 1, &mut v, &mut l), HcStatus::Ok);
        assert!((v - 0.564190).abs() < 1e-6);
        assert!((l - v.ln()).abs() < 1e-14);
        let mut e = 0.0;
        assert_eq!(hc_energy_t(c, 0.5, x.as_ptr(), x.as_ptr(), 1, &mut e), HcStatus::Ok);
        assert!((e + 0.5 * v.ln()).abs() < 1e-14);
        hc_model_free(c);
    }
}

#[test]
fn distance_hessian_and_cut_analysis() {
    let m = torus();
    unsafe {
        let (x, y, a) = ([0.0, 0.0], [PI, 0.0], [1.0, 0.0]);
        let mut d = 0.0;
        assert_eq!(hc_distance(m, x.as_ptr(), y.as_ptr(), 2, &mut d), HcStatus::Ok);
        assert!((d - PI).abs() < 1e-15);
        let mut h = 0.0;
        assert_eq!(hc_hess_energy_t(m, 0.01, x.as_ptr(), y.as_ptr(), a.as_ptr(), 2, &mut h), HcStatus::Ok);
        assert!((0.01 * h + PI * PI).abs() < 0.05 * PI * PI);

        let th = [1.0, 0.0];
        let (mut label, mut cd) = (HcLabel::C, 0.0);
        assert_eq!(hc_classify_theta(m, x.as_ptr(), th.as_ptr(), 2, &mut label, &mut cd), HcStatus::Ok);
        assert_eq!(label, HcLabel::P);
        assert!((cd - PI).abs() < 1e-12);
        let mut rho = 0.0;
        assert_eq!(hc_rho_on_p(m, x.as_ptr(), th.as_ptr(), a.as_ptr(), 2, &mut rho), HcStatus::Ok);
        assert!((rho + PI * PI).abs() < 1e-12);

        let diag = [0.5f64.sqrt(), 0.5f64.sqrt()];
        assert_eq!(hc_classify_theta(m, x.as_ptr(), diag.as_ptr(), 2, &mut label, ptr::null_mut()), HcStatus::Ok);
        assert_eq!(label, HcLabel::R);
        assert_eq!(hc_rho_on_p(m, x.as_ptr(), diag.as_ptr(), a.as_ptr(), 2, &mut rho), HcStatus::NotPrincipal);
        assert!(last_error().contains("not in P"));
        hc_model_free(m);
    }
}

#[test]
fn antipodal_constant_and_json_models() {
    unsafe {
        let mut v = 0.0;
        assert_eq!(hc_sphere_antipodal_hessian(2, &mut v), HcStatus::Ok);
        assert!((v + PI * PI / 2.0).abs() < 1e-15);
        let json = CString::new(r#"{"model":"sphere","dim":3,"radius":2}"#).unwrap();
        let mut m = ptr::null_mut();
        assert_eq!(hc_model_from_json(json.as_ptr(), &mut m), HcStatus::Ok);
        let mut n = 0;
        assert_eq!(hc_model_ambient_dim(m, &mut n), HcStatus::Ok);
        assert_eq!(n, 4);
        hc_model_free(m);
        let bad = CString::new(r#"{"model":"cone"}"#).unwrap();
        assert_eq!(hc_model_from_json(bad.as_ptr(), &mut m), HcStatus::InvalidModel);
    }
}

#[test]
fn errors_are_reported() {
    let m = torus();
    unsafe {
        let x = [0.0, 0.0];
        let mut out = 0.0;
        assert_eq!(hc_distance(ptr::null(), x.as_ptr(), x.as_ptr(), 2, &mut out), HcStatus::NullPointer);
        assert!(last_error().contains("model"));
        assert_eq!(hc_distance(m, x.as_ptr(), x.as_ptr(), 2, ptr::null_mut()), HcStatus::NullPointer);
        assert_eq!(hc_distance(m, x.as_ptr(), x.as_ptr(), 3, &mut out), HcStatus::InvalidPoint);
        assert_eq!(hc_energy_t(m, -1.0, x.as_ptr(), x.as_ptr(), 2, &mut out), HcStatus::InvalidArgument);
        assert!(last_error().contains("positive"));
        let mut c = ptr::null_mut();
        assert_eq!(hc_model_circle(-1.0, &mut c), HcStatus::InvalidModel);
        assert!(c.is_null());
        assert_eq!(hc_sphere_antipodal_hessian(0, &mut out), HcStatus::InvalidArgument);
        hc_model_free(m);
        hc_model_free(ptr::null_mut());
    }
}
