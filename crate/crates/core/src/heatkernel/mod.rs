//! Exact heat kernels under `∂_t u = ½Δu`, the energy `E_t = -t log p_t`,
//! its derivatives along geodesics through `y`, and the normalized kernel
//! `k` and log-gradient coefficient `l`.

pub mod spectral;
pub mod wrapped;

use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::manifold::{ModelManifold, Point};
use crate::numerics::fd::central_derivatives;
use crate::numerics::linalg::{norm, scale, wrap};
pub use spectral::SeriesCaps;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelEvaluation {
    pub t: f64,
    /// `p_t(x,y)`; underflows to 0 for very small `t`, use `log_value` then.
    pub value: f64,
    pub log_value: f64,
    pub truncation_error_bound: f64,
    pub relative_error_bound: f64,
    pub terms: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyT {
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VaradhanGap {
    pub t: f64,
    /// `E(x,y) - E_t(x,y)`
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeEstimate {
    pub value: f64,
    pub error: f64,
    /// Arclength step of the stencil.
    pub step: f64,
    /// The step hit its absolute floor and no longer resolves the `t/d` scale.
    pub step_floored: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyDerivatives {
    pub t: f64,
    pub grad: DerivativeEstimate,
    pub hess: DerivativeEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PleijelK {
    pub value: f64,
    pub log_value: f64,
    /// `H₀(x,y)` when `y ∉ Cut(x)`.
    pub h0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogGradL {
    pub value: f64,
    pub error: f64,
    /// `-∇_A E(x,y)` when `y ∉ Cut(x)`.
    pub order0: Option<f64>,
}

const STEP_FLOOR: f64 = 1e-6;

/// Arclength FD step for derivatives of `E_t` at a pair at distance `d`.
///
/// Near the cut locus `E_t` varies on the scale `t/d` (a `log cosh` profile
/// across the cut), elsewhere on `√t` at worst.
pub fn fd_step(t: f64, d: f64) -> (f64, bool) {
    let h = 0.05 * t / (d / PI).max(t.sqrt());
    if h < STEP_FLOOR {
        (STEP_FLOOR, true)
    } else {
        (h, false)
    }
}

pub fn heat_kernel(m: &ModelManifold, t: f64, x: &Point, y: &Point) -> Result<KernelEvaluation> {
    heat_kernel_with(m, t, x, y, &SeriesCaps::default())
}

pub fn heat_kernel_with(m: &ModelManifold, t: f64, x: &Point, y: &Point, caps: &SeriesCaps) -> Result<KernelEvaluation> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::NonPositiveTime(t));
    }
    match m {
        ModelManifold::FlatTorus { periods } => {
            let mut log_value = 0.0;
            let mut rel = 0.0;
            let mut terms = 1;
            for ((a, b), l) in x.coords.iter().zip(&y.coords).zip(periods) {
                let s = wrapped::log_circle_kernel(wrap(b - a, *l), *l, t, caps.max_terms)?;
                log_value += s.log_sum;
                rel += s.relative_tail;
                terms *= s.terms;
            }
            Ok(finish(t, log_value, rel, terms))
        }
        _ => kernel_at_distance(m, t, m.distance(x, y), caps),
    }
}

/// Kernel of the circle or sphere as a function of the geodesic distance.
pub fn kernel_at_distance(m: &ModelManifold, t: f64, d: f64, caps: &SeriesCaps) -> Result<KernelEvaluation> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::NonPositiveTime(t));
    }
    match m {
        ModelManifold::Circle { radius } | ModelManifold::Sphere { dim: 1, radius } => {
            let s = wrapped::log_circle_kernel(d, 2.0 * PI * radius, t, caps.max_terms)?;
            Ok(finish(t, s.log_sum, s.relative_tail, s.terms))
        }
        ModelManifold::Sphere { dim, radius } => {
            let tu = t / (radius * radius);
            let s = spectral::sphere_kernel(*dim, tu, d / radius, caps)?;
            let log_value = s.log_value - *dim as f64 * radius.ln();
            Ok(finish(t, log_value, s.relative_error_bound, s.terms))
        }
        ModelManifold::FlatTorus { .. } => Err(Error::Usage("torus kernel depends on the displacement, not the distance".into())),
    }
}

fn finish(t: f64, log_value: f64, rel: f64, terms: usize) -> KernelEvaluation {
    let value = log_value.exp();
    KernelEvaluation {
        t,
        value,
        log_value,
        truncation_error_bound: rel * value,
        relative_error_bound: rel,
        terms,
    }
}

pub fn energy_t(m: &ModelManifold, t: f64, x: &Point, y: &Point) -> Result<EnergyT> {
    let k = heat_kernel(m, t, x, y)?;
    Ok(EnergyT { t, value: -t * k.log_value })
}

/// `∇_A E_t` and `∇²_{A,A} E_t` at `y`, by differentiating
/// `s ↦ E_t(x, exp_y(sA))`.
pub fn energy_derivatives(m: &ModelManifold, t: f64, x: &Point, y: &Point, a: &[f64]) -> Result<EnergyDerivatives> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::NonPositiveTime(t));
    }
    if a.len() != m.ambient_dim() {
        return Err(Error::Usage(format!("A needs {} components", m.ambient_dim())));
    }
    let an = norm(a);
    let (h, floored) = fd_step(t, m.distance(x, y));
    if an == 0.0 {
        let z = DerivativeEstimate { value: 0.0, error: 0.0, step: h, step_floored: floored };
        return Ok(EnergyDerivatives { t, grad: z, hess: z });
    }
    let dir = scale(a, 1.0 / an);
    // evaluate at the centre first so errors surface before the parallel fan-out
    heat_kernel(m, t, x, y)?;
    let failure = std::sync::Mutex::new(None);
    let f = |s: f64| {
        let v: Vec<f64> = dir.iter().map(|c| c * s).collect();
        let ys = m.exp(y, &v);
        match heat_kernel(m, t, x, &ys) {
            Ok(k) => -t * k.log_value,
            Err(e) => {
                *failure.lock().unwrap() = Some(e);
                f64::NAN
            }
        }
    };
    let d = central_derivatives(f, h);
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    Ok(EnergyDerivatives {
        t,
        grad: DerivativeEstimate { value: d.first * an, error: d.first_err * an, step: h, step_floored: floored },
        hess: DerivativeEstimate {
            value: d.second * an * an,
            error: d.second_err * an * an,
            step: h,
            step_floored: floored,
        },
    })
}

pub fn grad_energy_t(m: &ModelManifold, t: f64, x: &Point, y: &Point, a: &[f64]) -> Result<DerivativeEstimate> {
    Ok(energy_derivatives(m, t, x, y, a)?.grad)
}

pub fn hess_energy_t(m: &ModelManifold, t: f64, x: &Point, y: &Point, a: &[f64]) -> Result<DerivativeEstimate> {
    Ok(energy_derivatives(m, t, x, y, a)?.hess)
}

/// `k(t,x,y) = (2πt)^{n/2} e^{E(x,y)/t} p_t(x,y)`.
pub fn pleijel_k(m: &ModelManifold, t: f64, x: &Point, y: &Point) -> Result<PleijelK> {
    let p = heat_kernel(m, t, x, y)?;
    let log_value = 0.5 * m.dim() as f64 * (2.0 * PI * t).ln() + m.energy(x, y) / t + p.log_value;
    Ok(PleijelK { value: log_value.exp(), log_value, h0: m.h0(x, y).ok() })
}

/// `l(t,x,y,A) = t ∇_A log p_t(x,y) = -∇_A E_t(x,y)`.
pub fn log_grad_l(m: &ModelManifold, t: f64, x: &Point, y: &Point, a: &[f64]) -> Result<LogGradL> {
    let g = grad_energy_t(m, t, x, y, a)?;
    let order0 = if m.in_cut_locus(x, y) { None } else { m.grad_energy(x, y, a).map(|v| -v) };
    Ok(LogGradL { value: -g.value, error: g.error, order0 })
}

pub fn varadhan_gap(m: &ModelManifold, t: f64, x: &Point, y: &Point) -> Result<VaradhanGap> {
    let e = energy_t(m, t, x, y)?;
    Ok(VaradhanGap { t, delta: m.energy(x, y) - e.value })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossValidation {
    pub wrapped_log: f64,
    pub fourier_log: f64,
    pub relative_difference: f64,
}

/// Circle kernel computed as an image sum and as a Fourier series; a
/// relative mismatch above `1e-12` is reported as an internal fault.
pub fn circle_cross_validation(radius: f64, t: f64, d: f64) -> Result<CrossValidation> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    let caps = SeriesCaps::default();
    let w = wrapped::log_circle_kernel(d, 2.0 * PI * radius, t, caps.max_terms)?;
    let f = spectral::circle_fourier_kernel(t / (radius * radius), d / radius, &caps)?;
    let fourier_log = f.log_value - radius.ln();
    let rel = ((w.log_sum - fourier_log).exp() - 1.0).abs();
    let out = CrossValidation { wrapped_log: w.log_sum, fourier_log, relative_difference: rel };
    if rel > 1e-12 {
        return Err(Error::InternalFault(format!(
            "circle kernel mismatch {rel:e} between image sum and Fourier series (t={t}, d={d})"
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn torus20() -> ModelManifold {
        ModelManifold::torus(&[20.0, 20.0]).unwrap()
    }

    #[test]
    fn circle_diagonal_value() {
        let c = ModelManifold::circle(1.0).unwrap();
        let x = c.point(vec![0.0]).unwrap();
        let k = heat_kernel(&c, 0.5, &x, &x).unwrap();
        assert!((k.value - 0.564190).abs() < 1e-6);
        assert!(k.relative_error_bound <= 1e-14);
    }

    #[test]
    fn planar_limit_on_large_torus() {
        let m = torus20();
        let x = m.point(vec![0.0, 0.0]).unwrap();
        let y = m.point(vec![1.0, 0.0]).unwrap();
        let k = heat_kernel(&m, 0.1, &x, &y).unwrap();
        let planar = (-1.0f64 / 0.2).exp() / (2.0 * PI * 0.1);
        assert!((k.value / planar - 1.0).abs() < 1e-12);
        let e = energy_t(&m, 0.1, &x, &y).unwrap();
        assert!((e.value - (0.5 + 0.1 * (0.2 * PI).ln())).abs() < 1e-12);
        let kk = pleijel_k(&m, 0.05, &x, &y).unwrap();
        assert!((kk.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn symmetry_is_exact() {
        let s = ModelManifold::sphere(2, 1.0).unwrap();
        let x = s.point_projected(vec![0.3, -0.2, 0.9]).unwrap();
        let y = s.point_projected(vec![-0.5, 0.4, -0.1]).unwrap();
        assert_eq!(heat_kernel(&s, 0.07, &x, &y).unwrap().log_value, heat_kernel(&s, 0.07, &y, &x).unwrap().log_value);
        let t = ModelManifold::torus(&[2.0, 3.0]).unwrap();
        let x = t.point(vec![0.1, 2.9]).unwrap();
        let y = t.point(vec![1.7, 0.4]).unwrap();
        assert_eq!(heat_kernel(&t, 0.3, &x, &y).unwrap().log_value, heat_kernel(&t, 0.3, &y, &x).unwrap().log_value);
    }

    #[test]
    fn planar_hessian_matches_closed_form() {
        let m = torus20();
        let x = m.point(vec![0.0, 0.0]).unwrap();
        let y = m.point(vec![1.0, 0.0]).unwrap();
        for t in [0.1, 0.05] {
            let d = energy_derivatives(&m, t, &x, &y, &[1.0, 0.0]).unwrap();
            assert!((d.hess.value - 1.0).abs() < 1e-4);
            assert!((d.grad.value - 1.0).abs() < 1e-8);
            let d = energy_derivatives(&m, t, &x, &y, &[0.0, 1.0]).unwrap();
            assert!((d.hess.value - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn antipodal_sphere_gradient_vanishes() {
        let s = ModelManifold::sphere(2, 1.0).unwrap();
        let g = grad_energy_t(&s, 0.05, &s.north(), &s.south(), &[1.0, 0.0, 0.0]).unwrap();
        assert!(g.value.abs() < 1e-6);
    }

    #[test]
    fn circle_antipodal_hessian_scale() {
        let c = ModelManifold::circle(1.0).unwrap();
        let x = c.point(vec![0.0]).unwrap();
        let y = c.point(vec![PI]).unwrap();
        let h = hess_energy_t(&c, 0.01, &x, &y, &[1.0]).unwrap();
        assert!((0.01 * h.value / (-PI * PI) - 1.0).abs() < 0.05);
    }

    #[test]
    fn torus_two_geodesic_hessian() {
        let m = ModelManifold::torus(&[2.0 * PI, 2.0 * PI]).unwrap();
        let x = m.point(vec![0.0, 0.0]).unwrap();
        let y = m.point(vec![PI, 0.0]).unwrap();
        let h = hess_energy_t(&m, 0.01, &x, &y, &[1.0, 0.0]).unwrap();
        assert!((0.01 * h.value / (-PI * PI) - 1.0).abs() < 0.05);
        // exact value 1 - π²/t from the two-image log-cosh profile
        assert!((h.value - (1.0 - PI * PI / 0.01)).abs() < 1e-3 * PI * PI / 0.01);
    }

    #[test]
    fn cross_validation_passes() {
        for (t, d) in [(0.5, 0.0), (0.05, PI), (0.01, 2.0), (3.0, 1.0)] {
            circle_cross_validation(1.0, t, d).unwrap();
        }
        circle_cross_validation(2.5, 0.2, 6.0).unwrap();
    }

    #[test]
    fn pleijel_k_tends_to_h0() {
        let s = ModelManifold::sphere(2, 1.0).unwrap();
        let n = s.north();
        let y = s.exp(&n, &[PI / 2.0, 0.0, 0.0]);
        let h0 = s.h0(&n, &y).unwrap();
        let k = pleijel_k(&s, 0.02, &n, &y).unwrap();
        assert!((k.value - h0).abs() < 5e-2);
        let gaps: Vec<f64> = [0.04, 0.02, 0.01]
            .iter()
            .map(|&t| (pleijel_k(&s, t, &n, &y).unwrap().value - h0).abs())
            .collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2]);
        // linear in t: halving t roughly halves the gap
        assert!((gaps[1] / gaps[0] - 0.5).abs() < 0.1 && (gaps[2] / gaps[1] - 0.5).abs() < 0.1);
    }

    #[test]
    fn log_grad_coefficient() {
        let m = torus20();
        let x = m.point(vec![0.0, 0.0]).unwrap();
        let y = m.point(vec![1.0, 0.0]).unwrap();
        let l = log_grad_l(&m, 0.05, &x, &y, &[1.0, 0.0]).unwrap();
        assert!((l.value + 1.0).abs() < 1e-6);
        assert_eq!(l.order0, Some(-1.0));
        let l0 = log_grad_l(&m, 0.05, &x, &x, &[0.3, 0.4]).unwrap();
        assert!(l0.value.abs() < 1e-10);

        let s = ModelManifold::sphere(2, 1.0).unwrap();
        let n = s.north();
        let y = s.exp(&n, &[PI / 2.0, 0.0, 0.0]);
        // radial direction at y points away from x
        let radial = [0.0, 0.0, -1.0];
        let e: Vec<f64> = [0.04, 0.02]
            .iter()
            .map(|&t| log_grad_l(&s, t, &n, &y, &radial).unwrap().value + PI / 2.0)
            .collect();
        assert!(e[1].abs() < e[0].abs());
        assert!((e[1] / e[0] - 0.5).abs() < 0.1);
    }

    #[test]
    fn varadhan_gap_behaviour() {
        let c = ModelManifold::circle(1.0).unwrap();
        let x = c.point(vec![0.0]).unwrap();
        let y = c.point(vec![PI]).unwrap();
        let g: Vec<f64> = [0.1, 0.05, 0.02].iter().map(|&t| varadhan_gap(&c, t, &x, &y).unwrap().delta.abs()).collect();
        assert!(g[0] > g[1] && g[1] > g[2]);
        let r: Vec<f64> = [0.04, 0.01, 0.0025]
            .iter()
            .map(|&t| varadhan_gap(&c, t, &x, &y).unwrap().delta.abs() / t)
            .collect();
        assert!(r[0] < r[1] && r[1] < r[2]);

        let s = ModelManifold::sphere(2, 1.0).unwrap();
        let n = s.north();
        let gap = varadhan_gap(&s, 0.01, &n, &n).unwrap();
        // p_t(x,x) ~ (2πt)^{-n/2} > 1, so the gap t log p_t(x,x) is positive and small
        assert!(gap.delta.abs() < 0.2 && gap.delta > 0.0);
    }
}
