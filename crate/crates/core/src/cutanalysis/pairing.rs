use rayon::prelude::*;
use serde::Serialize;

use super::blowup::regular_hessian;
use super::rho::cut_face;
use crate::error::{Error, Result};
use crate::geodesy::unit_sphere_rule;
use crate::heatkernel::hess_energy_t;
use crate::manifold::{ModelManifold, Point};
use crate::numerics::linalg::{add, scale};
use crate::numerics::quad::{composite_gauss_legendre, gauss_legendre_on};

/// Smooth bump `exp(1 − 1/(1 − (d/r)²))` of height 1 supported in `B_r(center)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bump {
    pub center: Point,
    pub radius: f64,
}

impl Bump {
    pub fn eval(&self, m: &ModelManifold, y: &Point) -> f64 {
        let q = (m.distance(&self.center, y) / self.radius).powi(2);
        if q >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - q)).exp()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairingReport {
    pub t: f64,
    /// `∫ φ ∇²_{A,A}E_t(x,·)` over the tube.
    pub total: f64,
    /// `∫ φ · regular_hessian` over the same tube.
    pub regular: f64,
    pub singular: f64,
    /// The tube meets conjugate points (the sphere antipode).
    pub conjugate_flag: bool,
}

fn breaks(r: f64, w: f64) -> Vec<f64> {
    let mut b = vec![-r, r, 0.0];
    for k in [1.0, 4.0, 16.0, 64.0] {
        if k * w < r {
            b.push(k * w);
            b.push(-k * w);
        }
    }
    b.sort_by(|a, c| a.partial_cmp(c).unwrap());
    b
}

/// Singular-part estimate of `⟨φ, ∇²_{A,A}E(x,·)⟩` at time `t`; `a` is
/// projected onto each tangent space.
pub fn mollified_pairing(m: &ModelManifold, x: &Point, a: &[f64], bump: &Bump, t: f64) -> Result<PairingReport> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    let mut nodes: Vec<(Point, f64)> = Vec::new();
    let conjugate_flag;
    match m {
        ModelManifold::Sphere { dim, radius } => {
            if m.distance_to_cut_locus(x, &bump.center) > 1e-9 {
                return Err(Error::NotHypersurface("bump must be centred at the antipode".into()));
            }
            conjugate_flag = true;
            let r = bump.radius.min(0.5 * std::f64::consts::PI * radius);
            let st = t.sqrt();
            let mut b = vec![0.0];
            for k in [0.5, 2.0, 6.0] {
                if k * st < r {
                    b.push(k * st);
                }
            }
            b.push(r);
            let (dr, wr) = composite_gauss_legendre(&b, 12);
            let (dirs, wd) = unit_sphere_rule(dim - 1, 16);
            let frame = m.tangent_frame(&bump.center);
            for (d, w) in dr.iter().zip(&wr) {
                for (u, wu) in dirs.iter().zip(&wd) {
                    let v = u.iter().zip(&frame).fold(vec![0.0; m.ambient_dim()], |acc, (c, e)| add(&acc, &scale(e, *c * d)));
                    let vol = (radius * (d / radius).sin()).powi(*dim as i32 - 1);
                    nodes.push((m.exp(&bump.center, &v), w * wu * vol));
                }
            }
        }
        _ => {
            let (i, periods) = cut_face(m, x, &bump.center)?;
            conjugate_flag = false;
            let n = periods.len();
            let w = t / (0.5 * periods[i]);
            let (s, ws) = composite_gauss_legendre(&breaks(bump.radius, w), 12);
            let (tau, wt) = gauss_legendre_on(24, -bump.radius, bump.radius);
            let others: Vec<usize> = (0..n).filter(|&k| k != i).collect();
            let count = tau.len().pow(others.len() as u32);
            for (si, wsi) in s.iter().zip(&ws) {
                for flat in 0..count {
                    let mut v = vec![0.0; n];
                    v[i] = *si;
                    let mut wgt = *wsi;
                    let mut rest = flat;
                    for &k in &others {
                        let j = rest % tau.len();
                        rest /= tau.len();
                        v[k] = tau[j];
                        wgt *= wt[j];
                    }
                    nodes.push((m.exp(&bump.center, &v), wgt));
                }
            }
        }
    }
    let rows: Vec<(f64, f64)> = nodes
        .par_iter()
        .map(|(y, w)| -> Result<(f64, f64)> {
            let phi = bump.eval(m, y);
            if phi == 0.0 {
                return Ok((0.0, 0.0));
            }
            let ay = m.project_tangent(y, a);
            let h = hess_energy_t(m, t, x, y, &ay)?.value;
            let reg = regular_hessian(m, x, y, &ay)?;
            Ok((w * phi * h, w * phi * reg))
        })
        .collect::<Result<_>>()?;
    let total: f64 = rows.iter().map(|r| r.0).sum();
    let regular: f64 = rows.iter().map(|r| r.1).sum();
    Ok(PairingReport { t, total, regular, singular: total - regular, conjugate_flag })
}

/// `∫_{Cut(x)} φ · (gradient-jump density) dS` on a flat model.
pub fn jump_pairing(m: &ModelManifold, x: &Point, a: &[f64], bump: &Bump) -> Result<f64> {
    let (i, periods) = cut_face(m, x, &bump.center)?;
    let n = periods.len();
    let density = -periods[i] * a[i] * a[i];
    if n == 1 {
        return Ok(density);
    }
    let (tau, wt) = gauss_legendre_on(48, -bump.radius, bump.radius);
    let others: Vec<usize> = (0..n).filter(|&k| k != i).collect();
    let mut s = 0.0;
    for flat in 0..tau.len().pow(others.len() as u32) {
        let mut v = vec![0.0; n];
        let mut wgt = 1.0;
        let mut rest = flat;
        for &k in &others {
            let j = rest % tau.len();
            rest /= tau.len();
            v[k] = tau[j];
            wgt *= wt[j];
        }
        s += wgt * bump.eval(m, &m.exp(&bump.center, &v));
    }
    Ok(density * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn torus_pairing_matches_jump() {
        let m = ModelManifold::torus(&[2.0 * PI, 2.0 * PI]).unwrap();
        let x = m.point(vec![0.0, 0.0]).unwrap();
        let bump = Bump { center: m.point(vec![PI, 0.0]).unwrap(), radius: 0.5 };
        let oracle = jump_pairing(&m, &x, &[1.0, 0.0], &bump).unwrap();
        let p = mollified_pairing(&m, &x, &[1.0, 0.0], &bump, 0.005).unwrap();
        assert!((p.singular / oracle - 1.0).abs() < 0.05, "{p:?} vs {oracle}");
        let p = mollified_pairing(&m, &x, &[0.0, 1.0], &bump, 0.005).unwrap();
        assert!(p.singular.abs() < 1e-6, "{p:?}");
    }

    #[test]
    fn sphere_pairing_decays() {
        let s = ModelManifold::sphere(2, 1.0).unwrap();
        let bump = Bump { center: s.south(), radius: 0.5 };
        let a = [1.0, 0.0, 0.0];
        let p1 = mollified_pairing(&s, &s.north(), &a, &bump, 0.04).unwrap();
        let p2 = mollified_pairing(&s, &s.north(), &a, &bump, 0.01).unwrap();
        assert!(p2.conjugate_flag);
        assert!(p2.singular.abs() < p1.singular.abs(), "{p1:?} {p2:?}");
    }
}
