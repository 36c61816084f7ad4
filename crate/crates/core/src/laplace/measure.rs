use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geodesy::{self, GammaSet, MidpointRecord};
use crate::heatkernel::heat_kernel;
use crate::manifold::{ModelManifold, Point};
use crate::numerics::linalg::{add, dot, norm, scale};
use crate::numerics::quad::{gauss_legendre, gauss_legendre_on, trapezoid};

/// Which obstacles bound the tube radius around Γ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Margin {
    /// `Cut(x) ∪ Cut(y) ∪ {x, y}`
    Full,
    /// `Cut(x) ∪ Cut(y)`
    CutOnly,
}

/// Distance from Γ to the obstacles selected by `kind`.
pub fn epsilon_margin(m: &ModelManifold, x: &Point, y: &Point, gamma: &GammaSet, kind: Margin) -> f64 {
    let zs: Vec<&Point> = match gamma {
        GammaSet::Discrete(r) => r.iter().map(|r| &r.z).collect(),
        GammaSet::Equator(e) => e.nodes.iter().take(1).collect(),
    };
    zs.iter()
        .map(|z| {
            let mut d = m.distance_to_cut_locus(x, z).min(m.distance_to_cut_locus(y, z));
            if kind == Margin::Full {
                d = d.min(m.distance(x, z)).min(m.distance(y, z));
            }
            d
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn default_epsilon(m: &ModelManifold, x: &Point, y: &Point, gamma: &GammaSet) -> f64 {
    0.5 * epsilon_margin(m, x, y, gamma, Margin::Full)
}

fn resolve_epsilon(m: &ModelManifold, x: &Point, y: &Point, gamma: &GammaSet, eps: Option<f64>, kind: Margin) -> Result<f64> {
    let margin = epsilon_margin(m, x, y, gamma, kind);
    match eps {
        None => Ok(0.5 * margin),
        Some(e) if !(e > 0.0) => Err(Error::Usage(format!("epsilon must be positive, got {e}"))),
        Some(e) if e > 0.5 * margin => Err(Error::EpsilonTooLarge {
            epsilon: e,
            margin: 0.5 * margin,
            which: match kind {
                Margin::Full => "half the distance from the midpoints to Cut(x), Cut(y), x and y",
                Margin::CutOnly => "half the distance from the midpoints to Cut(x) and Cut(y)",
            },
        }),
        Some(e) => Ok(e),
    }
}

/// Quadrature node in the tube around Γ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TubeNode {
    pub z: Point,
    /// Quadrature weight including the Riemannian volume element.
    pub vol: f64,
    /// Index of the midpoint (0 for the equator).
    pub cluster: usize,
}

/// Tensor trapezoid grid in normal coordinates around each midpoint, or
/// equator nodes times a normal grid. The half-width is `4√width_t` (eight
/// standard deviations of `e^{−2h/width_t}` for a unit Hessian) capped by ε.
pub fn tube_grid(m: &ModelManifold, gamma: &GammaSet, width_t: f64, eps: f64, nodes: usize) -> Vec<TubeNode> {
    let nodes = nodes.max(3);
    let mut out = Vec::new();
    match gamma {
        GammaSet::Discrete(recs) => {
            let n = m.dim();
            let w = (eps / (n as f64).sqrt()).min(4.0 * width_t.sqrt());
            let (u, wu) = trapezoid(nodes, -w, w);
            for (c, r) in recs.iter().enumerate() {
                for flat in 0..nodes.pow(n as u32) {
                    let mut v = vec![0.0; m.ambient_dim()];
                    let mut wt = 1.0;
                    let mut rest = flat;
                    for e in &r.frame {
                        let i = rest % nodes;
                        rest /= nodes;
                        v = add(&v, &scale(e, u[i]));
                        wt *= wu[i];
                    }
                    let jac = m.jacobian_at_radius(norm(&v)).value;
                    out.push(TubeNode { z: m.exp(&r.z, &v), vol: wt * jac, cluster: c });
                }
            }
        }
        GammaSet::Equator(e) => {
            let n = m.dim();
            let r = e.radius;
            let w = eps.min(4.0 * width_t.sqrt());
            let (s, ws) = trapezoid(nodes, -w, w);
            for (p, a) in e.nodes.iter().zip(&e.weights) {
                for (si, wi) in s.iter().zip(&ws) {
                    let c = add(&scale(&p.coords, (si / r).cos()), &scale(&e.pole, r * (si / r).sin()));
                    out.push(TubeNode {
                        z: Point { coords: c },
                        vol: a * wi * (si / r).cos().powi(n as i32 - 1),
                        cluster: 0,
                    });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MuMeasure {
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
    pub t: f64,
    pub epsilon: f64,
    pub clusters: Vec<usize>,
    /// Quadrature volume of each node; `weights[i] / vol[i]` is the density.
    pub vol: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MuOptions {
    pub epsilon: Option<f64>,
    pub nodes_per_axis: usize,
    /// Use `2·nodes_per_axis − 1` nodes (one refinement).
    pub refine: bool,
    pub margin: Margin,
    pub equator_nodes: usize,
}

impl Default for MuOptions {
    fn default() -> Self {
        MuOptions {
            epsilon: None,
            nodes_per_axis: 21,
            refine: true,
            margin: Margin::Full,
            equator_nodes: geodesy::DEFAULT_EQUATOR_NODES,
        }
    }
}

impl MuOptions {
    pub fn effective_nodes(&self) -> usize {
        if self.refine {
            2 * self.nodes_per_axis - 1
        } else {
            self.nodes_per_axis
        }
    }
}

pub fn mu_t(m: &ModelManifold, x: &Point, y: &Point, t: f64, epsilon: Option<f64>) -> Result<MuMeasure> {
    mu_t_with(m, x, y, t, &MuOptions { epsilon, ..Default::default() })
}

pub fn mu_t_with(m: &ModelManifold, x: &Point, y: &Point, t: f64, opts: &MuOptions) -> Result<MuMeasure> {
    let gamma = geodesy::gamma_set_with(m, x, y, opts.equator_nodes)?;
    mu_on(m, x, y, t, &gamma, opts)
}

/// `μ_t` over the midpoints of all near-minimal geodesics within `window`.
pub fn mu_t_near_minimal(m: &ModelManifold, x: &Point, y: &Point, t: f64, window: f64, opts: &MuOptions) -> Result<MuMeasure> {
    let recs: Vec<MidpointRecord> = geodesy::near_minimal_geodesics(m, x, y, window)?
        .iter()
        .map(|g| geodesy::midpoint_record(m, x, y, g))
        .collect();
    mu_on(m, x, y, t, &GammaSet::Discrete(recs), opts)
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::NonPositiveTime(t));
    }
    Ok(())
}

fn mu_on(m: &ModelManifold, x: &Point, y: &Point, t: f64, gamma: &GammaSet, opts: &MuOptions) -> Result<MuMeasure> {
    check_t(t)?;
    if opts.nodes_per_axis < 9 {
        return Err(Error::Config(format!("nodes_per_axis must be at least 9, got {}", opts.nodes_per_axis)));
    }
    let eps = resolve_epsilon(m, x, y, gamma, opts.epsilon, opts.margin)?;
    let grid = tube_grid(m, gamma, t, eps, opts.effective_nodes());
    let hmin = 0.5 * m.energy(x, y);
    let logw: Vec<f64> = grid
        .par_iter()
        .map(|g| {
            let h0 = m.h0_at_distance(m.distance(x, &g.z)) * m.h0_at_distance(m.distance(y, &g.z));
            h0.ln() - 2.0 * (geodesy::hinged_energy(m, x, y, &g.z) - hmin) / t + g.vol.ln()
        })
        .collect();
    let weights = normalize_log(&logw);
    Ok(MuMeasure {
        nodes: grid.iter().map(|g| g.z.clone()).collect(),
        weights,
        t,
        epsilon: eps,
        clusters: grid.iter().map(|g| g.cluster).collect(),
        vol: grid.iter().map(|g| g.vol).collect(),
    })
}

pub(crate) fn normalize_log(logw: &[f64]) -> Vec<f64> {
    let mx = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logw.iter().map(|l| (l - mx).exp()).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|v| v / s).collect()
}

impl MuMeasure {
    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn expectation_values(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    pub fn variance_values(&self, f: &[f64]) -> f64 {
        let mean = self.expectation_values(f);
        self.weights.iter().zip(f).map(|(w, v)| w * (v - mean).powi(2)).sum::<f64>().max(0.0)
    }

    pub fn expectation<F: Fn(&Point) -> f64 + Sync>(&self, f: F) -> f64 {
        let v: Vec<f64> = self.nodes.par_iter().map(&f).collect();
        self.expectation_values(&v)
    }

    pub fn variance<F: Fn(&Point) -> f64 + Sync>(&self, f: F) -> f64 {
        let v: Vec<f64> = self.nodes.par_iter().map(&f).collect();
        self.variance_values(&v)
    }

    /// Total weight per midpoint cluster.
    pub fn cluster_weights(&self) -> Vec<f64> {
        let k = self.clusters.iter().max().map_or(0, |c| c + 1);
        let mut out = vec![0.0; k];
        for (c, w) in self.clusters.iter().zip(&self.weights) {
            out[*c] += w;
        }
        out
    }

    pub fn density(&self, i: usize) -> f64 {
        self.weights[i] / self.vol[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeadingForms {
    pub t: f64,
    pub dist: f64,
    /// `2 E^{μ_t}[∇_A E(·,y)]`
    pub gradient: f64,
    /// `−(4/t) Var^{μ_t}[∇_A E(·,y)]`
    pub hessian: f64,
    /// `−(|A|² dist²/t) Var^{μ_t}[cos θ_A]`
    pub hessian_cos: f64,
    /// `max |log_y z|` over the tube nodes; `dist/2` on Γ itself.
    pub tube_radius: f64,
}

impl LeadingForms {
    /// `|gradient| ≤ |A| D` and `−|A|² D² ≤ t·hessian ≤ 0` with
    /// `D = 2·tube_radius`, which tends to `dist` as the tube shrinks onto Γ.
    pub fn within_bounds(&self, a_norm: f64) -> bool {
        let dd = 2.0 * self.tube_radius;
        let tol = 1e-9 * (1.0 + a_norm * dd).powi(2);
        self.gradient.abs() <= a_norm * dd + tol
            && self.t * self.hessian <= tol
            && self.t * self.hessian >= -(a_norm * dd).powi(2) - tol
    }
}

pub fn leading_forms(m: &ModelManifold, x: &Point, y: &Point, t: f64, a: &[f64], epsilon: Option<f64>) -> Result<LeadingForms> {
    let mu = mu_t(m, x, y, t, epsilon)?;
    leading_forms_on(m, x, y, &mu, a)
}

pub fn leading_forms_on(m: &ModelManifold, x: &Point, y: &Point, mu: &MuMeasure, a: &[f64]) -> Result<LeadingForms> {
    if a.len() != m.ambient_dim() {
        return Err(Error::Usage(format!("A needs {} components", m.ambient_dim())));
    }
    let d = m.distance(x, y);
    let an = norm(a);
    let logs: Vec<Vec<f64>> = mu
        .nodes
        .iter()
        .map(|z| m.log(y, z).ok_or_else(|| Error::OnCutLocus("tube node antipodal to y".into())))
        .collect::<Result<_>>()?;
    let grads: Vec<f64> = logs.iter().map(|v| -dot(a, v)).collect();
    let coss: Vec<f64> = logs
        .iter()
        .map(|v| if an == 0.0 { 0.0 } else { -2.0 * dot(a, v) / (d * an) })
        .collect();
    Ok(LeadingForms {
        t: mu.t,
        dist: d,
        gradient: 2.0 * mu.expectation_values(&grads),
        hessian: -4.0 / mu.t * mu.variance_values(&grads),
        hessian_cos: -(an * an * d * d / mu.t) * mu.variance_values(&coss),
        tube_radius: logs.iter().map(|v| norm(v)).fold(0.0, f64::max),
    })
}

pub fn leading_gradient(m: &ModelManifold, x: &Point, y: &Point, t: f64, a: &[f64]) -> Result<f64> {
    Ok(leading_forms(m, x, y, t, a, None)?.gradient)
}

pub fn leading_hessian(m: &ModelManifold, x: &Point, y: &Point, t: f64, a: &[f64]) -> Result<f64> {
    Ok(leading_forms(m, x, y, t, a, None)?.hessian)
}

/// `p_{t/2}(x,z) p_{t/2}(z,y) / p_t(x,y)`
pub fn bridge_midpoint_density(m: &ModelManifold, x: &Point, y: &Point, t: f64, z: &Point) -> Result<f64> {
    check_t(t)?;
    let a = heat_kernel(m, 0.5 * t, x, z)?.log_value;
    let b = heat_kernel(m, 0.5 * t, z, y)?.log_value;
    let c = heat_kernel(m, t, x, y)?.log_value;
    Ok((a + b - c).exp())
}

/// `sup |ν_t/μ_t − 1|` over the tube nodes of `μ_t`.
pub fn bridge_ratio_sup(m: &ModelManifold, x: &Point, y: &Point, t: f64, epsilon: Option<f64>) -> Result<f64> {
    let mu = mu_t(m, x, y, t, epsilon)?;
    let r: Vec<f64> = (0..mu.nodes.len())
        .into_par_iter()
        .map(|i| bridge_midpoint_density(m, x, y, t, &mu.nodes[i]).map(|nu| (nu / mu.density(i) - 1.0).abs()))
        .collect::<Result<_>>()?;
    Ok(r.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitMeasure {
    pub atoms: Vec<Point>,
    pub weights: Vec<f64>,
    /// Leading order `l_i = Σ_j 1/(2k_j)` of every midpoint.
    pub orders: Vec<f64>,
}

/// Limit of `μ_t` as `t → 0` on a discrete Γ with nondegenerate phases.
pub fn limit_measure(m: &ModelManifold, x: &Point, y: &Point) -> Result<LimitMeasure> {
    let recs = match geodesy::gamma_set(m, x, y)? {
        GammaSet::Discrete(r) => r,
        GammaSet::Equator(_) => {
            return Err(Error::Unsupported("limit measure on a continuum of midpoints".into()));
        }
    };
    let mut orders = Vec::new();
    let mut mass = Vec::new();
    for r in &recs {
        let ev: Vec<f64> = (0..r.hessian_h.len()).map(|i| r.hessian_h[i][i]).collect();
        if ev.iter().any(|v| *v <= 1e-12) {
            return Err(Error::Unsupported("degenerate midpoint phase".into()));
        }
        orders.push(0.5 * ev.len() as f64);
        // c_i = Γ(1/2)^n, vol_u = det(∇²h)^{-1/2}
        let vol_u: f64 = ev.iter().map(|v| v.powf(-0.5)).product();
        mass.push(PI.sqrt().powi(ev.len() as i32) * vol_u * r.h0_product);
    }
    let lmin = orders.iter().cloned().fold(f64::INFINITY, f64::min);
    let keep: Vec<usize> = (0..recs.len()).filter(|&i| orders[i] <= lmin + 1e-12).collect();
    let s: f64 = keep.iter().map(|&i| mass[i]).sum();
    Ok(LimitMeasure {
        atoms: keep.iter().map(|&i| recs[i].z.clone()).collect(),
        weights: keep.iter().map(|&i| mass[i] / s).collect(),
        orders: keep.iter().map(|&i| orders[i]).collect(),
    })
}

/// Volume of `{z ∈ Γ_ε : 2(h_{x,y}(z) − min h) < s}`, integrating the radius
/// of the sublevel set along rays from each midpoint.
pub fn sublevel_volume(m: &ModelManifold, x: &Point, y: &Point, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::Usage(format!("s must be nonnegative, got {s}")));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    let gamma = geodesy::gamma_set(m, x, y)?;
    let eps = default_epsilon(m, x, y, &gamma);
    let hmin = 0.5 * m.energy(x, y);
    let phase = |z: &Point| 2.0 * (geodesy::hinged_energy(m, x, y, z) - hmin);
    // largest r ≤ eps with phase below s along the ray
    let radius = |f: &dyn Fn(f64) -> f64| -> f64 {
        if f(eps) < s {
            return eps;
        }
        let (mut lo, mut hi) = (0.0, eps);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    match &gamma {
        GammaSet::Discrete(recs) => {
            let n = m.dim();
            let (dirs, dw) = geodesy::unit_sphere_rule(n - 1, 64);
            let (gx, gw) = gauss_legendre(24);
            let mut total = 0.0;
            for r in recs {
                for (u, wu) in dirs.iter().zip(&dw) {
                    let v: Vec<f64> = (0..m.ambient_dim())
                        .map(|c| u.iter().zip(&r.frame).map(|(ui, e)| ui * e[c]).sum())
                        .collect();
                    let rr = radius(&|rad: f64| phase(&m.exp(&r.z, &scale(&v, rad))));
                    let radial: f64 = gx
                        .iter()
                        .zip(&gw)
                        .map(|(g, w)| {
                            let q = 0.5 * rr * (g + 1.0);
                            0.5 * rr * w * m.jacobian_at_radius(q).value * q.powi(n as i32 - 1)
                        })
                        .sum();
                    total += wu * radial;
                }
            }
            Ok(total)
        }
        GammaSet::Equator(e) => {
            let n = m.dim() as i32;
            let p0 = &e.nodes[0];
            let at = |sig: f64| {
                let c = add(&scale(&p0.coords, (sig / e.radius).cos()), &scale(&e.pole, e.radius * (sig / e.radius).sin()));
                phase(&Point { coords: c })
            };
            let up = radius(&|r| at(r));
            let down = radius(&|r| at(-r));
            let (q, w) = gauss_legendre_on(24, -down, up);
            let normal: f64 = q.iter().zip(&w).map(|(s, wi)| wi * (s / e.radius).cos().powi(n - 1)).sum();
            Ok(e.weights.iter().sum::<f64>() * normal)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t2() -> ModelManifold {
        ModelManifold::torus(&[2.0 * PI, 2.0 * PI]).unwrap()
    }

    #[test]
    fn symmetric_torus_mass_split() {
        let m = t2();
        let x = m.point(vec![0.0, 0.0]).unwrap();
        let y = m.point(vec![PI, 0.0]).unwrap();
        let mu = mu_t(&m, &x, &y, 0.05, None).unwrap();
        assert!((mu.total() - 1.0).abs() < 1e-12);
        let c = mu.cluster_weights();
        assert_eq!(c.len(), 2);
        assert!((c[0] - 0.5).abs() < 1e-10 && (c[1] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn epsilon_refusal_reports_margin() {
        let m = t2();
        let x = m.point(vec![0.0, 0.0]).unwrap();
        let y = m.point(vec![PI, 0.0]).unwrap();
        match mu_t(&m, &x, &y, 0.05, Some(1.0)) {
            Err(Error::EpsilonTooLarge { margin, .. }) => assert!((margin - PI / 4.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sphere_equator_pushforward_uniform() {
        let s = ModelManifold::sphere(2, 1.0).unwrap();
        let mu = mu_t_with(&s, &s.north(), &s.south(), 0.02, &MuOptions { equator_nodes: 64, ..Default::default() }).unwrap();
        // nodes are laid out equator-node-major
        let per = mu.nodes.len() / 64;
        for chunk in mu.weights.chunks(per) {
            assert!((chunk.iter().sum::<f64>() - 1.0 / 64.0).abs() < 1e-12);
        }
    }

    #[test]
    fn near_minimal_log_ratio() {
        let m = t2();
        let x = m.point(vec![0.0, 0.0]).unwrap();
        let y = m.point(vec![PI - 0.2, 0.0]).unwrap();
        let t = 0.05;
        let mu = mu_t_near_minimal(&m, &x, &y, t, 0.5, &MuOptions::default()).unwrap();
        let c = mu.cluster_weights();
        let expected = -PI * 0.2 * 2.0 / t;
        assert!(((c[1] / c[0]).ln() / expected - 1.0).abs() < 0.05);
    }

    #[test]
    fn variance_examples() {
        let m = t2();
        let x = m.point(vec![0.0, 0.0]).unwrap();
        let y = m.point(vec![PI, 0.0]).unwrap();
        let mu = mu_t(&m, &x, &y, 0.05, None).unwrap();
        assert!(mu.variance(|_| 3.0) < 1e-20);
        let two = MuMeasure {
            nodes: vec![x.clone(), y.clone()],
            weights: vec![0.5, 0.5],
            t: 1.0,
            epsilon: 1.0,
            clusters: vec![0, 1],
            vol: vec![1.0, 1.0],
        };
        assert!((two.variance_values(&[1.0, -1.0]) - 1.0).abs() < 1e-15);
        let mut prev = f64::INFINITY;
        for t in [0.04, 0.01, 0.0025] {
            let mu = mu_t(&m, &x, &y, t, None).unwrap();
            let v = mu.variance(|z| m.grad_energy(z, &y, &[1.0, 0.0]).unwrap());
            let err = (v - (PI / 2.0).powi(2)).abs();
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 1e-2);
    }

    #[test]
    fn leading_form_examples() {
        let c = ModelManifold::circle(1.0).unwrap();
        let lf = leading_forms(&c, &c.point(vec![0.0]).unwrap(), &c.point(vec![PI]).unwrap(), 0.01, &[1.0], None).unwrap();
        assert!((lf.t * lf.hessian + PI * PI).abs() < 0.05);
        assert!(lf.within_bounds(1.0));

        let s = ModelManifold::sphere(2, 1.0).unwrap();
        let lf = leading_forms(&s, &s.north(), &s.south(), 0.01, &[1.0, 0.0, 0.0], None).unwrap();
        assert!((lf.t * lf.hessian + PI * PI / 2.0).abs() < 0.05 * PI * PI / 2.0, "{}", lf.t * lf.hessian);
        assert!((lf.hessian - lf.hessian_cos).abs() < 1e-10 * lf.hessian.abs());

        let y = s.exp(&s.north(), &[2.0, 0.0, 0.0]);
        let a = scale(&crate::geodesy::Geodesic { base: s.north(), direction: vec![1.0, 0.0, 0.0], length: 2.0 }.arrival_tangent(&s), 1.0);
        let lf = leading_forms(&s, &s.north(), &y, 0.01, &a, None).unwrap();
        assert!((lf.gradient - 2.0).abs() < 0.05);
        assert!((lf.hessian - lf.hessian_cos).abs() < 1e-10 * lf.hessian.abs().max(1.0));
    }

    #[test]
    fn bridge_integrates_to_one() {
        let m = t2();
        let x = m.point(vec![0.0, 0.0]).unwrap();
        let y = m.point(vec![PI, 0.0]).unwrap();
        let k = 128;
        let h = 2.0 * PI / k as f64;
        let mut s = 0.0;
        for i in 0..k {
            for j in 0..k {
                let z = m.point(vec![i as f64 * h, j as f64 * h]).unwrap();
                s += bridge_midpoint_density(&m, &x, &y, 0.2, &z).unwrap() * h * h;
            }
        }
        assert!((s - 1.0).abs() < 1e-6, "{s}");
        let z = m.point(vec![1.0, 0.4]).unwrap();
        let zr = m.point(vec![1.0, 2.0 * PI - 0.4]).unwrap();
        let a = bridge_midpoint_density(&m, &x, &y, 0.2, &z).unwrap();
        let b = bridge_midpoint_density(&m, &x, &y, 0.2, &zr).unwrap();
        assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn limit_measure_examples() {
        for periods in [[2.0 * PI, 2.0 * PI], [2.0 * PI, 4.0 * PI]] {
            let m = ModelManifold::torus(&periods).unwrap();
            let x = m.point(vec![0.0, 0.0]).unwrap();
            let y = m.point(vec![PI, 0.0]).unwrap();
            let l = limit_measure(&m, &x, &y).unwrap();
            assert_eq!(l.weights.len(), 2);
            assert!((l.weights[0] - 0.5).abs() < 1e-15);
            let mu = mu_t(&m, &x, &y, 0.01, None).unwrap();
            for (a, b) in mu.cluster_weights().iter().zip(&l.weights) {
                assert!((a - b).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn sublevel_volume_scaling() {
        let m = ModelManifold::torus(&[20.0, 20.0]).unwrap();
        let x = m.point(vec![0.0, 0.0]).unwrap();
        let y = m.point(vec![1.0, 0.0]).unwrap();
        assert_eq!(sublevel_volume(&m, &x, &y, 0.0).unwrap(), 0.0);
        let a = sublevel_volume(&m, &x, &y, 1e-4).unwrap();
        let b = sublevel_volume(&m, &x, &y, 1e-2).unwrap();
        let slope = (b / a).ln() / 100f64.ln();
        assert!((slope - 1.0).abs() < 0.05);
        // 2(h − min h) = 2|v|² on the flat torus: disc of radius √(s/2)
        assert!((b - PI * 1e-2 / 2.0).abs() < 1e-8);
        let mut prev = 0.0;
        for s in [1e-3, 1e-2, 1e-1, 0.5] {
            let v = sublevel_volume(&m, &x, &y, s).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }
}
