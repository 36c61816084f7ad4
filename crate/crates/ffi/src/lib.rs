//! C ABI over `heatcut`. Models are opaque handles; every call returns an
//! [`HcStatus`] and writes results through out-pointers. On failure the
//! message is available from [`hc_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use heatcut::cutanalysis;
use heatcut::geodesy::{self, Label};
use heatcut::heatkernel;
use heatcut::{Error, ModelManifold, Point, PolarDirection};

/// Opaque model handle.
pub struct HcModel {
    inner: ModelManifold,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidModel = 3,
    InvalidPoint = 4,
    OnCutLocus = 5,
    NotPrincipal = 6,
    Numerical = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HcLabel {
    C = 0,
    P = 1,
    R = 2,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HcStatus {
    match e {
        Error::InvalidModel(_) => HcStatus::InvalidModel,
        Error::InvalidPoint(_) => HcStatus::InvalidPoint,
        Error::OnCutLocus(_) => HcStatus::OnCutLocus,
        Error::NotPrincipal(_) => HcStatus::NotPrincipal,
        Error::Usage(_) | Error::NonPositiveTime(_) | Error::Config(_) | Error::Coincident => HcStatus::InvalidArgument,
        _ => HcStatus::Numerical,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> HcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HcStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            HcStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            HcStatus::Panic
        }
    }
}

unsafe fn model<'a>(m: *const HcModel) -> Result<&'a ModelManifold, Fail> {
    m.as_ref().map(|h| &h.inner).ok_or(Fail::Null("model"))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn point(m: &ModelManifold, p: *const f64, len: usize, what: &'static str) -> Result<Point, Fail> {
    if len != m.ambient_dim() {
        return Err(Fail::Lib(Error::InvalidPoint(format!("{what}: expected {} coordinates, got {len}", m.ambient_dim()))));
    }
    Ok(m.point(slice(p, len, what)?.to_vec())?)
}

unsafe fn write<T>(out: *mut T, v: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    out.write(v);
    Ok(())
}

unsafe fn write_model(out: *mut *mut HcModel, m: ModelManifold) -> Result<(), Fail> {
    write(out, Box::into_raw(Box::new(HcModel { inner: m })), "out")
}

/// Last error message on this thread, or NULL. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn hc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hc_model_circle(radius: f64, out: *mut *mut HcModel) -> HcStatus {
    guard(|| write_model(out, ModelManifold::circle(radius)?))
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hc_model_sphere(dim: usize, radius: f64, out: *mut *mut HcModel) -> HcStatus {
    guard(|| write_model(out, ModelManifold::sphere(dim, radius)?))
}

/// # Safety
/// `periods` must point to `n` doubles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hc_model_torus(periods: *const f64, n: usize, out: *mut *mut HcModel) -> HcStatus {
    guard(|| write_model(out, ModelManifold::torus(slice(periods, n, "periods")?)?))
}

/// Model from its JSON description, e.g. `{"model":"sphere","dim":2}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hc_model_from_json(json: *const c_char, out: *mut *mut HcModel) -> HcStatus {
    guard(|| {
        if json.is_null() {
            return Err(Fail::Null("json"));
        }
        let s = CStr::from_ptr(json).to_str().map_err(|e| Error::InvalidModel(e.to_string()))?;
        write_model(out, ModelManifold::from_json(s)?)
    })
}

/// # Safety
/// `m` must come from an `hc_model_*` constructor and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn hc_model_free(m: *mut HcModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of coordinates of a point (`n + 1` on `S^n`).
///
/// # Safety
/// `m` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hc_model_ambient_dim(m: *const HcModel, out: *mut usize) -> HcStatus {
    guard(|| write(out, model(m)?.ambient_dim(), "out"))
}

/// # Safety
/// `x`, `y` must point to `len` doubles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hc_distance(m: *const HcModel, x: *const f64, y: *const f64, len: usize, out: *mut f64) -> HcStatus {
    guard(|| {
        let m = model(m)?;
        let (x, y) = (point(m, x, len, "x")?, point(m, y, len, "y")?);
        write(out, m.distance(&x, &y), "out")
    })
}

/// `p_t(x,y)` and its logarithm; either out-pointer may be NULL.
///
/// # Safety
/// `x`, `y` must point to `len` doubles; non-NULL outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hc_heat_kernel(
    m: *const HcModel,
    t: f64,
    x: *const f64,
    y: *const f64,
    len: usize,
    out_value: *mut f64,
    out_log: *mut f64,
) -> HcStatus {
    guard(|| {
        let m = model(m)?;
        let (x, y) = (point(m, x, len, "x")?, point(m, y, len, "y")?);
        let k = heatkernel::heat_kernel(m, t, &x, &y)?;
        if !out_value.is_null() {
            out_value.write(k.value);
        }
        if !out_log.is_null() {
            out_log.write(k.log_value);
        }
        Ok(())
    })
}

/// `E_t(x,y) = −t log p_t(x,y)`.
///
/// # Safety
/// `x`, `y` must point to `len` doubles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hc_energy_t(m: *const HcModel, t: f64, x: *const f64, y: *const f64, len: usize, out: *mut f64) -> HcStatus {
    guard(|| {
        let m = model(m)?;
        let (x, y) = (point(m, x, len, "x")?, point(m, y, len, "y")?);
        write(out, heatkernel::energy_t(m, t, &x, &y)?.value, "out")
    })
}

/// `∇²_{A,A} E_t(x,·)` at `y`; `a` is projected onto `T_yM`.
///
/// # Safety
/// `x`, `y`, `a` must point to `len` doubles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hc_hess_energy_t(
    m: *const HcModel,
    t: f64,
    x: *const f64,
    y: *const f64,
    a: *const f64,
    len: usize,
    out: *mut f64,
) -> HcStatus {
    guard(|| {
        let m = model(m)?;
        let (x, y) = (point(m, x, len, "x")?, point(m, y, len, "y")?);
        let a = m.project_tangent(&y, slice(a, len, "a")?);
        write(out, heatkernel::hess_energy_t(m, t, &x, &y, &a)?.value, "out")
    })
}

/// Limit of `t·∇²_{A,A}E_t(N,S)` on the unit `S^n`, `|A| = 1`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hc_sphere_antipodal_hessian(n: usize, out: *mut f64) -> HcStatus {
    guard(|| write(out, cutanalysis::sphere_antipodal_hessian(n)?, "out"))
}

unsafe fn direction(m: &ModelManifold, theta: *const f64, len: usize) -> Result<PolarDirection, Fail> {
    if len != m.ambient_dim() {
        return Err(Fail::Lib(Error::Usage(format!("theta: expected {} components, got {len}", m.ambient_dim()))));
    }
    Ok(PolarDirection { theta: slice(theta, len, "theta")?.to_vec() })
}

/// C/P/R label and cut distance of the unit direction `theta` at `x`.
///
/// # Safety
/// `x`, `theta` must point to `len` doubles; non-NULL outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hc_classify_theta(
    m: *const HcModel,
    x: *const f64,
    theta: *const f64,
    len: usize,
    out_label: *mut HcLabel,
    out_cut_distance: *mut f64,
) -> HcStatus {
    guard(|| {
        let m = model(m)?;
        let x = point(m, x, len, "x")?;
        let c = geodesy::classify_theta(m, &x, &direction(m, theta, len)?)?;
        write(
            out_label,
            match c.label {
                Label::C => HcLabel::C,
                Label::P => HcLabel::P,
                Label::R => HcLabel::R,
            },
            "out_label",
        )?;
        if !out_cut_distance.is_null() {
            out_cut_distance.write(c.cut_distance);
        }
        Ok(())
    })
}

/// `ρ(θ)` for a direction in P, with `A` given at the cut point.
///
/// # Safety
/// `x`, `theta`, `a` must point to `len` doubles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hc_rho_on_p(
    m: *const HcModel,
    x: *const f64,
    theta: *const f64,
    a: *const f64,
    len: usize,
    out: *mut f64,
) -> HcStatus {
    guard(|| {
        let m = model(m)?;
        let x = point(m, x, len, "x")?;
        let s = cutanalysis::rho_on_p(m, &x, &direction(m, theta, len)?, slice(a, len, "a")?)?;
        write(out, s.rho, "out")
    })
}
