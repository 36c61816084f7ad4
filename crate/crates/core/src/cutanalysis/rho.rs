use serde::Serialize;

use crate::error::{Error, Result};
use crate::geodesy::{self, Associates, Geodesic, Label};
use crate::manifold::{ModelManifold, Point, PolarDirection};
use crate::numerics::fd::central_derivatives;
use crate::numerics::linalg::{dot, norm, scale};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhoIngredients {
    pub psi: f64,
    pub psi_tilde: f64,
    /// Angle between the two arrival tangents at the cut point.
    pub phi: f64,
    pub f: f64,
    pub vol: f64,
    pub dist: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhoSample {
    pub theta: PolarDirection,
    pub associate: PolarDirection,
    pub cut_point: Point,
    pub rho: f64,
    pub ingredients: RhoIngredients,
}

fn angle(a: &[f64], b: &[f64]) -> f64 {
    (dot(a, b) / (norm(a) * norm(b))).clamp(-1.0, 1.0).acos()
}

/// Density of the singular part of `∇²_{A,A}E(x,·)` along the direction
/// `θ ∈ P`, with `A` given at the cut point `exp_x(d(θ)θ)`:
///
/// `ρ = −d |A|² (cos ψ − cos ψ̃)² vol(d,θ) / ((1 − cos φ)(1 + 1/F))`.
pub fn rho_on_p(m: &ModelManifold, x: &Point, theta: &PolarDirection, a: &[f64]) -> Result<RhoSample> {
    let cls = geodesy::classify_theta(m, x, theta)?;
    if cls.label != Label::P {
        return Err(Error::NotPrincipal(format!("direction is labelled {}", cls.label)));
    }
    let assoc = match &cls.associates {
        Associates::Finite(v) => v[0].clone(),
        Associates::Continuum => unreachable!("P directions have one associate"),
    };
    let d = cls.cut_distance;
    let g = Geodesic { base: x.clone(), direction: theta.theta.clone(), length: d };
    let gt = Geodesic { base: x.clone(), direction: assoc.theta.clone(), length: d };
    let y = g.point_at(m, d);
    if a.len() != m.ambient_dim() {
        return Err(Error::Usage(format!("A needs {} components", m.ambient_dim())));
    }
    let tan = g.arrival_tangent(m);
    let tan_t = gt.arrival_tangent(m);
    let an = norm(a);
    let (psi, psi_tilde) = if an == 0.0 { (0.0, 0.0) } else { (angle(a, &tan), angle(a, &tan_t)) };
    let phi = angle(&tan, &tan_t);
    let r = geodesy::midpoint_record(m, x, &y, &g);
    let rt = geodesy::midpoint_record(m, x, &y, &gt);
    let f = rt.h0_product * r.det_hessian().sqrt() / (r.h0_product * rt.det_hessian().sqrt());
    let vol = m.polar_density(d);
    let rho = -d * an * an * (psi.cos() - psi_tilde.cos()).powi(2) * vol / ((1.0 - phi.cos()) * (1.0 + 1.0 / f));
    Ok(RhoSample {
        theta: theta.clone(),
        associate: assoc,
        cut_point: y,
        rho,
        ingredients: RhoIngredients { psi, psi_tilde, phi, f, vol, dist: d },
    })
}

/// `ρ(θ) + ρ(θ̃)`: the density of the pushforward at the common cut point.
pub fn rho_pushforward(m: &ModelManifold, x: &Point, theta: &PolarDirection, a: &[f64]) -> Result<f64> {
    let s = rho_on_p(m, x, theta, a)?;
    let s2 = rho_on_p(m, x, &s.associate, a)?;
    Ok(s.rho + s2.rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpDensity {
    /// `⟨A, [∇E]⟩⟨A, n⟩` per unit hypersurface measure.
    pub surface_density: f64,
    /// Hypersurface measure per unit `dθ` of either associated direction.
    pub jacobian: f64,
    /// `surface_density · jacobian`.
    pub total: f64,
}

fn flat_periods(m: &ModelManifold) -> Option<Vec<f64>> {
    match m {
        ModelManifold::Circle { radius } => Some(vec![2.0 * std::f64::consts::PI * radius]),
        ModelManifold::FlatTorus { periods } => Some(periods.clone()),
        ModelManifold::Sphere { .. } => None,
    }
}

/// Face of the flat cut locus through `y`: the coordinate whose wrapped
/// displacement sits at half a period.
pub(crate) fn cut_face(m: &ModelManifold, x: &Point, y: &Point) -> Result<(usize, Vec<f64>)> {
    let periods = flat_periods(m).ok_or_else(|| Error::NotHypersurface("the sphere's cut locus is a point".into()))?;
    let v = m.log(x, y).expect("flat log");
    let faces: Vec<usize> = (0..v.len()).filter(|&i| (v[i].abs() - 0.5 * periods[i]).abs() <= 1e-9 * periods[i]).collect();
    match faces.as_slice() {
        [i] => Ok((*i, periods)),
        [] => Err(Error::NotHypersurface("point is not on the cut locus".into())),
        _ => Err(Error::NotHypersurface("point lies on an intersection of cut faces".into())),
    }
}

/// Gradient-jump density of `∇²_{A,A}E(x,·)` across the cut hypersurface at
/// `cut_point`, from one-sided gradients of the flat distance.
pub fn jump_oracle(m: &ModelManifold, x: &Point, cut_point: &Point, a: &[f64]) -> Result<JumpDensity> {
    let (i, periods) = cut_face(m, x, cut_point)?;
    let mut v = m.log(x, cut_point).expect("flat log");
    v[i] = 0.5 * periods[i];
    // gradient before the crossing is v, after it v − L_i e_i
    let mut jump = vec![0.0; v.len()];
    jump[i] = -periods[i];
    let surface_density = dot(a, &jump) * a[i];
    let n = v.len();
    let jacobian = if n == 1 {
        1.0
    } else {
        let theta = scale(&v, 1.0 / norm(&v));
        let frame = m.frame_with(x, &theta);
        let cols: Vec<Vec<f64>> = frame[1..]
            .iter()
            .map(|xi| {
                (0..n)
                    .map(|c| {
                        let f = |s: f64| {
                            let dir: Vec<f64> = theta.iter().zip(xi).map(|(a, b)| s.cos() * a + s.sin() * b).collect();
                            geodesy::cut_distance(m, &PolarDirection { theta: dir.clone() }) * dir[c]
                        };
                        central_derivatives(f, 1e-4).first
                    })
                    .collect()
            })
            .collect();
        let k = cols.len();
        let g = nalgebra::DMatrix::from_fn(k, k, |p, q| dot(&cols[p], &cols[q]));
        g.determinant().max(0.0).sqrt()
    };
    Ok(JumpDensity { surface_density, jacobian, total: surface_density * jacobian })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn t2() -> (ModelManifold, Point) {
        let m = ModelManifold::torus(&[2.0 * PI, 2.0 * PI]).unwrap();
        let x = m.point(vec![0.0, 0.0]).unwrap();
        (m, x)
    }

    #[test]
    fn torus_examples() {
        let (m, x) = t2();
        let th = PolarDirection { theta: vec![1.0, 0.0] };
        let s = rho_on_p(&m, &x, &th, &[1.0, 0.0]).unwrap();
        assert!((s.rho + PI * PI).abs() < 1e-12, "{s:?}");
        assert!((s.ingredients.f - 1.0).abs() < 1e-15);
        assert!((s.ingredients.vol - PI).abs() < 1e-15);
        assert_eq!(rho_on_p(&m, &x, &th, &[0.0, 1.0]).unwrap().rho, 0.0);
        let j = jump_oracle(&m, &x, &s.cut_point, &[1.0, 0.0]).unwrap();
        assert!((j.total + 2.0 * PI * PI).abs() < 1e-6, "{j:?}");
        assert!((rho_pushforward(&m, &x, &th, &[1.0, 0.0]).unwrap() - j.total).abs() < 1e-6);
        assert_eq!(jump_oracle(&m, &x, &s.cut_point, &[0.0, 1.0]).unwrap().total, 0.0);
    }

    #[test]
    fn quadratic_in_a_and_symmetric() {
        let (m, x) = t2();
        let a = (0.3f64).to_radians();
        let th = PolarDirection { theta: vec![a.cos(), a.sin()] };
        let base = rho_on_p(&m, &x, &th, &[0.6, 0.8]).unwrap().rho;
        let scaled = rho_on_p(&m, &x, &th, &[1.8, 2.4]).unwrap().rho;
        assert!((scaled - 9.0 * base).abs() < 1e-12 * base.abs());
        let s = rho_on_p(&m, &x, &th, &[1.0, 0.0]).unwrap();
        let mirror = rho_on_p(&m, &x, &s.associate, &[1.0, 0.0]).unwrap();
        assert!((s.rho - mirror.rho).abs() < 1e-10);
        assert!(base <= 0.0);
    }

    #[test]
    fn non_principal_refused() {
        let s = ModelManifold::sphere(2, 1.0).unwrap();
        let r = rho_on_p(&s, &s.north(), &PolarDirection { theta: vec![1.0, 0.0, 0.0] }, &[1.0, 0.0, 0.0]);
        assert!(matches!(r, Err(Error::NotPrincipal(_))));
        let (m, x) = t2();
        let d = 0.5f64.sqrt();
        let r = rho_on_p(&m, &x, &PolarDirection { theta: vec![d, d] }, &[1.0, 0.0]);
        assert!(matches!(r, Err(Error::NotPrincipal(_))));
        let corner = m.point(vec![PI, PI]).unwrap();
        assert!(matches!(jump_oracle(&m, &x, &corner, &[1.0, 0.0]), Err(Error::NotHypersurface(_))));
    }

    #[test]
    fn circle_matches_jump() {
        let c = ModelManifold::circle(1.5).unwrap();
        let x = c.point(vec![0.2]).unwrap();
        let th = PolarDirection { theta: vec![1.0] };
        let s = rho_on_p(&c, &x, &th, &[2.0]).unwrap();
        let j = jump_oracle(&c, &x, &s.cut_point, &[2.0]).unwrap();
        assert!((rho_pushforward(&c, &x, &th, &[2.0]).unwrap() - j.total).abs() < 1e-9);
    }

    #[test]
    fn oracle_agreement_on_direction_grid() {
        for periods in [[2.0 * PI, 2.0 * PI], [2.0 * PI, 4.0 * PI]] {
            let m = ModelManifold::torus(&periods).unwrap();
            let x = m.point(vec![0.4, 1.1]).unwrap();
            for k in 0..32 {
                let a = ((k as f64 + 0.5) * 11.25).to_radians();
                let th = PolarDirection { theta: vec![a.cos(), a.sin()] };
                let s = rho_on_p(&m, &x, &th, &[0.6, 0.8]).unwrap();
                let j = jump_oracle(&m, &x, &s.cut_point, &[0.6, 0.8]).unwrap();
                let sum = s.rho + rho_on_p(&m, &x, &s.associate, &[0.6, 0.8]).unwrap().rho;
                assert!((sum / j.total - 1.0).abs() < 1e-2, "{k}: {sum} vs {}", j.total);
            }
        }
    }
}
