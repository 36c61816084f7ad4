//! Minimal geodesics, the midpoint set Γ, the hinged energy and its Hessian,
//! tangential cut distance, conjugacy orders and the C/P/R partition.

use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::manifold::{ModelManifold, Point, PolarDirection};
use crate::numerics::fd::curve_derivatives;
use crate::numerics::linalg::{add, dot, norm, normalized, scale, sub};
use crate::numerics::quad::gauss_legendre;

/// Relative tolerance on lengths for admitting ties between minimizers.
pub const TIE_TOL: f64 = 1e-9;
/// Candidates closer than this (relative) but outside `TIE_TOL` set the near-tie flag.
pub const NEAR_TIE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Geodesic {
    pub base: Point,
    /// Unit initial velocity at `base`.
    pub direction: Vec<f64>,
    pub length: f64,
}

impl Geodesic {
    pub fn point_at(&self, m: &ModelManifold, s: f64) -> Point {
        m.exp(&self.base, &scale(&self.direction, s))
    }

    pub fn midpoint(&self, m: &ModelManifold) -> Point {
        self.point_at(m, 0.5 * self.length)
    }

    /// Unit velocity at arclength `s`.
    pub fn velocity_at(&self, m: &ModelManifold, s: f64) -> Vec<f64> {
        match m {
            ModelManifold::Sphere { radius, .. } => {
                let a = s / radius;
                let xh = scale(&self.base.coords, 1.0 / radius);
                add(&scale(&xh, -a.sin()), &scale(&self.direction, a.cos()))
            }
            _ => self.direction.clone(),
        }
    }

    pub fn arrival_tangent(&self, m: &ModelManifold) -> Vec<f64> {
        self.velocity_at(m, self.length)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum MinimalGeodesics {
    Finite { geodesics: Vec<Geodesic>, near_tie: bool },
    /// Sphere antipodes: every direction at `x` is minimal.
    Continuum,
}

fn coincident(m: &ModelManifold, x: &Point, y: &Point) -> bool {
    m.distance(x, y) <= 1e-14 * m.diameter()
}

/// Lattice images `y - x + kL` of a torus displacement, enumerated over
/// `|k_i| <= ceil(diam/L_i) + 1`.
fn torus_images(periods: &[f64], diam: f64, base: &[f64]) -> Vec<Vec<f64>> {
    let bounds: Vec<i64> = periods.iter().map(|l| (diam / l).ceil() as i64 + 1).collect();
    let mut out = Vec::new();
    let mut k: Vec<i64> = bounds.iter().map(|b| -b).collect();
    loop {
        out.push(base.iter().zip(&k).zip(periods).map(|((b, ki), l)| b + *ki as f64 * l).collect());
        let mut i = 0;
        loop {
            if i == k.len() {
                return out;
            }
            k[i] += 1;
            if k[i] > bounds[i] {
                k[i] = -bounds[i];
                i += 1;
            } else {
                break;
            }
        }
    }
}

/// Candidate geodesic displacements (flat models) or directions (sphere),
/// sorted by length.
fn flat_candidates(m: &ModelManifold, x: &Point, y: &Point) -> Vec<Vec<f64>> {
    let mut c = match m {
        ModelManifold::Circle { radius } => {
            let p = 2.0 * PI * radius;
            let d = y.coords[0] - x.coords[0];
            let d = d - p * (d / p).round();
            vec![vec![d], vec![if d >= 0.0 { d - p } else { d + p }]]
        }
        ModelManifold::FlatTorus { periods } => {
            torus_images(periods, m.diameter(), &sub(&y.coords, &x.coords))
        }
        ModelManifold::Sphere { .. } => unreachable!("sphere has no lattice images"),
    };
    c.sort_by(|a, b| norm(a).partial_cmp(&norm(b)).unwrap());
    c
}

pub fn minimal_geodesics(m: &ModelManifold, x: &Point, y: &Point) -> Result<MinimalGeodesics> {
    if coincident(m, x, y) {
        return Err(Error::Coincident);
    }
    match m {
        ModelManifold::Sphere { radius, .. } => {
            let d = m.distance(x, y);
            if d >= PI * radius * (1.0 - TIE_TOL) {
                return Ok(MinimalGeodesics::Continuum);
            }
            let v = m.log(x, y).expect("non-antipodal log exists");
            Ok(MinimalGeodesics::Finite {
                geodesics: vec![Geodesic { base: x.clone(), direction: scale(&v, 1.0 / d), length: d }],
                near_tie: PI * radius - d < NEAR_TIE_TOL * PI * radius,
            })
        }
        _ => {
            let cands = flat_candidates(m, x, y);
            let dmin = norm(&cands[0]);
            let mut geodesics = Vec::new();
            let mut near_tie = false;
            for v in &cands {
                let len = norm(v);
                if len <= dmin * (1.0 + TIE_TOL) {
                    geodesics.push(Geodesic { base: x.clone(), direction: scale(v, 1.0 / len), length: dmin });
                } else if len <= dmin * (1.0 + NEAR_TIE_TOL) {
                    near_tie = true;
                }
            }
            Ok(MinimalGeodesics::Finite { geodesics, near_tie })
        }
    }
}

/// Geodesics from `x` to `y` of length at most `d + window` whose midpoint is
/// a strict local minimum of the hinged energy (flat models only; the sphere
/// returns its minimal geodesic).
pub fn near_minimal_geodesics(m: &ModelManifold, x: &Point, y: &Point, window: f64) -> Result<Vec<Geodesic>> {
    if let ModelManifold::Sphere { .. } = m {
        return match minimal_geodesics(m, x, y)? {
            MinimalGeodesics::Finite { geodesics, .. } => Ok(geodesics),
            MinimalGeodesics::Continuum => Err(Error::Unsupported("near-minimal geodesics on a continuum".into())),
        };
    }
    if coincident(m, x, y) {
        return Err(Error::Coincident);
    }
    let d = m.distance(x, y);
    let mut out = Vec::new();
    for v in flat_candidates(m, x, y) {
        let len = norm(&v);
        if len > d + window {
            continue;
        }
        let g = Geodesic { base: x.clone(), direction: scale(&v, 1.0 / len), length: len };
        let z = g.midpoint(m);
        let tol = 1e-9 * len.max(1.0);
        if (m.distance(x, &z) - 0.5 * len).abs() <= tol
            && (m.distance(y, &z) - 0.5 * len).abs() <= tol
            && (len <= d * (1.0 + TIE_TOL) || (m.distance_to_cut_locus(x, &z) > tol && m.distance_to_cut_locus(y, &z) > tol))
        {
            out.push(g);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MidpointRecord {
    pub z: Point,
    pub geodesic: Geodesic,
    /// Hessian of `h_{x,y}` at `z` in `frame` (radial direction first).
    pub hessian_h: Vec<Vec<f64>>,
    pub frame: Vec<Vec<f64>>,
    /// `H₀(x,z) H₀(y,z)`
    pub h0_product: f64,
    pub h_value: f64,
    pub minimal: bool,
}

impl MidpointRecord {
    pub fn det_hessian(&self) -> f64 {
        nalgebra::DMatrix::from_fn(self.hessian_h.len(), self.hessian_h.len(), |i, j| self.hessian_h[i][j]).determinant()
    }
}

/// Closed-form eigenvalues of `∇²h_{x,y}` at the midpoint of a geodesic of
/// length `d`: radial 2, transverse `2ρ cot ρ` with `ρ = d/2R` on the sphere.
pub fn hessian_h_eigenvalues(m: &ModelManifold, d: f64) -> Vec<f64> {
    let n = m.dim();
    let mut ev = vec![2.0; n];
    if let ModelManifold::Sphere { radius, dim } = m {
        if *dim >= 2 {
            let rho = d / (2.0 * radius);
            let tr = if rho < 1e-8 { 2.0 } else { 2.0 * rho / rho.tan() };
            for e in ev.iter_mut().skip(1) {
                *e = tr;
            }
        }
    }
    ev
}

pub fn midpoint_record(m: &ModelManifold, x: &Point, y: &Point, g: &Geodesic) -> MidpointRecord {
    let z = g.midpoint(m);
    let radial = g.velocity_at(m, 0.5 * g.length);
    let frame = m.frame_with(&z, &radial);
    let ev = hessian_h_eigenvalues(m, g.length);
    let n = ev.len();
    let hessian_h = (0..n).map(|i| (0..n).map(|j| if i == j { ev[i] } else { 0.0 }).collect()).collect();
    let h0 = m.h0_at_distance(0.5 * g.length);
    let minimal = (g.length - m.distance(x, y)).abs() <= TIE_TOL * g.length.max(1.0);
    MidpointRecord {
        h_value: hinged_energy(m, x, y, &z),
        z,
        geodesic: g.clone(),
        hessian_h,
        frame,
        h0_product: h0 * h0,
        minimal,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquatorDescriptor {
    pub x: Point,
    pub y: Point,
    pub radius: f64,
    /// Unit normal of the equatorial hyperplane (`x / R`).
    pub pole: Vec<f64>,
    pub nodes: Vec<Point>,
    /// Surface weights on the equator `S^{n-1}(R)`.
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum GammaSet {
    Discrete(Vec<MidpointRecord>),
    Equator(EquatorDescriptor),
}

impl GammaSet {
    pub fn records(&self) -> &[MidpointRecord] {
        match self {
            GammaSet::Discrete(r) => r,
            GammaSet::Equator(_) => &[],
        }
    }
}

pub const DEFAULT_EQUATOR_NODES: usize = 256;

/// Quadrature on the unit sphere `S^k ⊂ R^{k+1}`: uniform on circles, Gauss–
/// Legendre in `cos φ` for each additional polar angle.
pub fn unit_sphere_rule(k: usize, circle_nodes: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    if k == 0 {
        return (vec![vec![1.0], vec![-1.0]], vec![1.0, 1.0]);
    }
    if k == 1 {
        let n = circle_nodes.max(3);
        let pts = (0..n)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / n as f64;
                vec![a.cos(), a.sin()]
            })
            .collect();
        return (pts, vec![2.0 * PI / n as f64; n]);
    }
    let (sub_pts, sub_w) = unit_sphere_rule(k - 1, circle_nodes);
    let (c, w) = gauss_legendre((circle_nodes / 2).max(4));
    let mut pts = Vec::new();
    let mut wts = Vec::new();
    for (ci, wi) in c.iter().zip(&w) {
        let s = (1.0 - ci * ci).sqrt();
        let jac = s.powi(k as i32 - 2);
        for (p, pw) in sub_pts.iter().zip(&sub_w) {
            let mut q = vec![*ci];
            q.extend(p.iter().map(|v| v * s));
            pts.push(q);
            wts.push(wi * jac * pw);
        }
    }
    (pts, wts)
}

fn equator(m: &ModelManifold, x: &Point, y: &Point, nodes: usize) -> EquatorDescriptor {
    let (dim, radius) = match m {
        ModelManifold::Sphere { dim, radius } => (*dim, *radius),
        _ => unreachable!(),
    };
    let frame = m.tangent_frame(x);
    let circle = if dim <= 2 { nodes } else { (nodes / 8).max(16) };
    let (u, w) = unit_sphere_rule(dim - 1, circle);
    let pts = u
        .iter()
        .map(|ui| {
            let mut c = vec![0.0; dim + 1];
            for (coef, e) in ui.iter().zip(&frame) {
                for (ci, ei) in c.iter_mut().zip(e) {
                    *ci += radius * coef * ei;
                }
            }
            Point { coords: c }
        })
        .collect();
    let rk = radius.powi(dim as i32 - 1);
    EquatorDescriptor {
        x: x.clone(),
        y: y.clone(),
        radius,
        pole: scale(&x.coords, 1.0 / radius),
        nodes: pts,
        weights: w.iter().map(|v| v * rk).collect(),
    }
}

pub fn gamma_set(m: &ModelManifold, x: &Point, y: &Point) -> Result<GammaSet> {
    gamma_set_with(m, x, y, DEFAULT_EQUATOR_NODES)
}

pub fn gamma_set_with(m: &ModelManifold, x: &Point, y: &Point, equator_nodes: usize) -> Result<GammaSet> {
    match minimal_geodesics(m, x, y)? {
        MinimalGeodesics::Continuum => Ok(GammaSet::Equator(equator(m, x, y, equator_nodes))),
        MinimalGeodesics::Finite { geodesics, .. } => {
            let mut recs: Vec<MidpointRecord> = Vec::new();
            for g in &geodesics {
                let r = midpoint_record(m, x, y, g);
                if !recs.iter().any(|q| m.distance(&q.z, &r.z) <= 1e-9) {
                    recs.push(r);
                }
            }
            Ok(GammaSet::Discrete(recs))
        }
    }
}

/// `h_{x,y}(z) = E(x,z) + E(z,y)`
pub fn hinged_energy(m: &ModelManifold, x: &Point, y: &Point, z: &Point) -> f64 {
    m.energy(x, z) + m.energy(z, y)
}

/// Hessian of `h_{x,y}` at a midpoint `z`, in a frame whose first vector is
/// the geodesic direction at `z`.
pub fn hessian_h(m: &ModelManifold, x: &Point, y: &Point, z: &Point) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    if m.in_cut_locus(x, z) || m.in_cut_locus(y, z) {
        return Err(Error::OnCutLocus("midpoint lies on a cut locus".into()));
    }
    let d = m.distance(x, y);
    let tol = 1e-9 * d.max(1.0);
    if (m.distance(x, z) - 0.5 * d).abs() > tol || (m.distance(y, z) - 0.5 * d).abs() > tol {
        return Err(Error::Usage("z is not the midpoint of a minimal geodesic".into()));
    }
    let v = m.log(x, z).ok_or_else(|| Error::OnCutLocus("no direction from x to z".into()))?;
    let g = Geodesic { base: x.clone(), direction: scale(&v, 1.0 / norm(&v)), length: d };
    let r = midpoint_record(m, x, y, &g);
    Ok((r.hessian_h, r.frame))
}

/// Distance along `θ` from `x` to its cut locus.
pub fn cut_distance(m: &ModelManifold, theta: &PolarDirection) -> f64 {
    match m {
        ModelManifold::Circle { radius } | ModelManifold::Sphere { radius, .. } => PI * radius,
        ModelManifold::FlatTorus { periods } => {
            let mut best = f64::INFINITY;
            for v in torus_images(periods, 0.0, &vec![0.0; periods.len()]) {
                let c = dot(&v, &theta.theta);
                if c > 0.0 {
                    best = best.min(dot(&v, &v) / (2.0 * c));
                }
            }
            best
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Order {
    Exact(usize),
    AtLeast(usize),
}

impl Order {
    pub fn finite(&self) -> Option<usize> {
        match self {
            Order::Exact(k) => Some(*k),
            Order::AtLeast(_) => None,
        }
    }

    pub fn at_least(&self, k: usize) -> bool {
        match self {
            Order::Exact(v) | Order::AtLeast(v) => *v >= k,
        }
    }
}

impl std::fmt::Display for Order {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Order::Exact(k) => write!(f, "{k}"),
            Order::AtLeast(k) => write!(f, ">={k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderSettings {
    pub m_max: usize,
    pub zero_threshold: f64,
    /// Derivative scale; defaults to the model radius (1 on the torus).
    pub scale: Option<f64>,
}

impl Default for OrderSettings {
    fn default() -> Self {
        OrderSettings { m_max: 4, zero_threshold: 1e-5, scale: None }
    }
}

fn model_scale(m: &ModelManifold, s: &OrderSettings) -> f64 {
    s.scale.unwrap_or(match m {
        ModelManifold::Circle { radius } | ModelManifold::Sphere { radius, .. } => *radius,
        ModelManifold::FlatTorus { .. } => 1.0,
    })
}

fn first_nonzero(d: &[f64], thr: impl Fn(usize) -> f64, m_max: usize) -> Order {
    match d.iter().enumerate().position(|(i, v)| v.abs() >= thr(i + 1)) {
        Some(i) => Order::Exact(i),
        None => Order::AtLeast(m_max),
    }
}

/// Order of conjugacy of `γ` in the transverse direction `ξ`: first
/// non-vanishing derivative of `θ ↦ exp_x(d, θ)` along `ξ`, minus one.
pub fn conjugacy_order(m: &ModelManifold, g: &Geodesic, xi: &[f64], settings: &OrderSettings) -> Result<Order> {
    if settings.m_max > 6 || settings.m_max == 0 {
        return Err(Error::Usage(format!("m_max must be in 1..=6, got {}", settings.m_max)));
    }
    if m.dim() == 1 {
        return Ok(Order::Exact(0));
    }
    let d = m.exp_directional_derivatives(&g.base, g.length, &g.direction, xi, settings.m_max)?;
    let thr = settings.zero_threshold * model_scale(m, settings);
    Ok(first_nonzero(&d, |_| thr, settings.m_max))
}

/// Order of constancy of `s ↦ h_{x,y}(exp_z(sξ))` at `s = 0`.
pub fn h_constancy_order(
    m: &ModelManifold,
    x: &Point,
    y: &Point,
    z: &Point,
    xi: &[f64],
    settings: &OrderSettings,
) -> Result<Order> {
    if settings.m_max > 6 || settings.m_max == 0 {
        return Err(Error::Usage(format!("m_max must be in 1..=6, got {}", settings.m_max)));
    }
    let xi = normalized(xi).ok_or_else(|| Error::Usage("zero direction".into()))?;
    let h_z = hinged_energy(m, x, y, z);
    let f = |s: f64| vec![hinged_energy(m, x, y, &m.exp(z, &scale(&xi, s))) - h_z];
    let d: Vec<f64> = curve_derivatives(f, settings.m_max).iter().map(|v| v[0]).collect();
    let sc = model_scale(m, settings);
    Ok(first_nonzero(&d, |i| settings.zero_threshold * sc.powi(2 - i as i32), settings.m_max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Associates {
    Finite(Vec<PolarDirection>),
    Continuum,
}

/// Directions `θ̃ ≠ θ` reaching the same cut point at the same distance.
pub fn associated_directions(m: &ModelManifold, theta: &PolarDirection) -> Associates {
    match m {
        ModelManifold::Sphere { dim, .. } if *dim >= 2 => Associates::Continuum,
        ModelManifold::Circle { .. } | ModelManifold::Sphere { .. } => {
            Associates::Finite(vec![PolarDirection { theta: scale(&theta.theta, -1.0) }])
        }
        ModelManifold::FlatTorus { periods } => {
            let d = cut_distance(m, theta);
            let q = scale(&theta.theta, d);
            let mut out = Vec::new();
            for k in torus_images(periods, 0.0, &vec![0.0; periods.len()]) {
                if k.iter().all(|v| *v == 0.0) {
                    continue;
                }
                let v = add(&q, &k);
                if (norm(&v) - d).abs() <= TIE_TOL * d {
                    out.push(PolarDirection { theta: scale(&v, 1.0 / norm(&v)) });
                }
            }
            Associates::Finite(out)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Label {
    C,
    P,
    R,
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}", self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaClassification {
    pub theta: PolarDirection,
    pub label: Label,
    pub associates: Associates,
    pub cut_distance: f64,
    pub conjugacy: Order,
}

impl ThetaClassification {
    pub fn n_associates(&self) -> Option<usize> {
        match &self.associates {
            Associates::Finite(v) => Some(v.len()),
            Associates::Continuum => None,
        }
    }
}

/// Largest conjugacy order over a transverse frame along the geodesic `θ` of
/// length `d(θ)`.
fn max_conjugacy(m: &ModelManifold, x: &Point, theta: &[f64], d: f64, settings: &OrderSettings) -> Result<Order> {
    if m.dim() == 1 {
        return Ok(Order::Exact(0));
    }
    let g = Geodesic { base: x.clone(), direction: theta.to_vec(), length: d };
    let frame = m.frame_with(x, theta);
    let mut best = Order::Exact(0);
    for xi in frame.iter().skip(1) {
        let o = conjugacy_order(m, &g, xi, settings)?;
        let rank = |o: &Order| match o {
            Order::Exact(k) => 2 * k,
            Order::AtLeast(k) => 2 * k + 1,
        };
        if rank(&o) > rank(&best) {
            best = o;
        }
    }
    Ok(best)
}

pub fn classify_theta(m: &ModelManifold, x: &Point, theta: &PolarDirection) -> Result<ThetaClassification> {
    classify_theta_with(m, x, theta, &OrderSettings::default())
}

pub fn classify_theta_with(
    m: &ModelManifold,
    x: &Point,
    theta: &PolarDirection,
    settings: &OrderSettings,
) -> Result<ThetaClassification> {
    let th = m.project_tangent(x, &theta.theta);
    if (norm(&th) - 1.0).abs() > 1e-12 || (norm(&theta.theta) - 1.0).abs() > 1e-12 {
        return Err(Error::Usage("theta must be a unit tangent vector at x".into()));
    }
    let d = cut_distance(m, theta);
    let conj = max_conjugacy(m, x, &theta.theta, d, settings)?;
    let associates = associated_directions(m, theta);
    let label = if conj.at_least(1) {
        Label::C
    } else {
        match &associates {
            Associates::Finite(v) if v.len() == 1 => {
                let c2 = max_conjugacy(m, x, &v[0].theta, cut_distance(m, &v[0]), settings)?;
                if c2.at_least(1) {
                    Label::R
                } else {
                    Label::P
                }
            }
            _ => Label::R,
        }
    };
    Ok(ThetaClassification { theta: theta.clone(), label, associates, cut_distance: d, conjugacy: conj })
}

/// Planar unit directions at angles `2πk/count` (first two tangent axes).
pub fn direction_grid(m: &ModelManifold, x: &Point, count: usize, offset: f64) -> Vec<PolarDirection> {
    let frame = m.tangent_frame(x);
    (0..count)
        .map(|k| {
            let a = 2.0 * PI * (k as f64 + offset) / count as f64;
            let v = if frame.len() >= 2 {
                add(&scale(&frame[0], a.cos()), &scale(&frame[1], a.sin()))
            } else {
                scale(&frame[0], if a.cos() >= 0.0 { 1.0 } else { -1.0 })
            };
            PolarDirection { theta: v }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::fd::central_derivatives;

    fn t2() -> ModelManifold {
        ModelManifold::torus(&[2.0 * PI, 2.0 * PI]).unwrap()
    }

    fn count(g: &MinimalGeodesics) -> Option<usize> {
        match g {
            MinimalGeodesics::Finite { geodesics, .. } => Some(geodesics.len()),
            MinimalGeodesics::Continuum => None,
        }
    }

    #[test]
    fn minimal_geodesic_examples() {
        let c = ModelManifold::circle(1.0).unwrap();
        let g = minimal_geodesics(&c, &c.point(vec![0.0]).unwrap(), &c.point(vec![PI]).unwrap()).unwrap();
        assert_eq!(count(&g), Some(2));
        let m = t2();
        let g = minimal_geodesics(&m, &m.point(vec![0.0, 0.0]).unwrap(), &m.point(vec![PI, PI]).unwrap()).unwrap();
        assert_eq!(count(&g), Some(4));
        let s = ModelManifold::sphere(2, 1.0).unwrap();
        let y = s.point_projected(vec![0.3, 0.1, -0.5]).unwrap();
        assert_eq!(count(&minimal_geodesics(&s, &s.north(), &y).unwrap()), Some(1));
        assert_eq!(minimal_geodesics(&s, &s.north(), &s.south()).unwrap(), MinimalGeodesics::Continuum);
        assert_eq!(minimal_geodesics(&s, &s.north(), &s.north()), Err(Error::Coincident));
    }

    #[test]
    fn geodesic_invariants() {
        let m = ModelManifold::torus(&[2.0 * PI, 4.0 * PI]).unwrap();
        let x = m.point(vec![0.3, 1.0]).unwrap();
        for y in [vec![0.3 + PI, 1.0], vec![2.0, 5.0], vec![0.3 + PI, 1.0 + 2.0 * PI]] {
            let y = m.point(y).unwrap();
            if let MinimalGeodesics::Finite { geodesics, .. } = minimal_geodesics(&m, &x, &y).unwrap() {
                for g in geodesics {
                    assert!((g.length - m.distance(&x, &y)).abs() <= 1e-9 * g.length);
                    let end = g.point_at(&m, g.length);
                    assert!(m.distance(&end, &y) < 1e-10);
                    let z = g.midpoint(&m);
                    assert!((hinged_energy(&m, &x, &y, &z) - 0.5 * m.energy(&x, &y)).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn gamma_examples() {
        let c = ModelManifold::circle(1.0).unwrap();
        let g = gamma_set(&c, &c.point(vec![0.0]).unwrap(), &c.point(vec![PI]).unwrap()).unwrap();
        let mut zs: Vec<f64> = g.records().iter().map(|r| r.z.coords[0]).collect();
        zs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((zs[0] - PI / 2.0).abs() < 1e-12 && (zs[1] - 1.5 * PI).abs() < 1e-12);

        let m = t2();
        let g = gamma_set(&m, &m.point(vec![0.0, 0.0]).unwrap(), &m.point(vec![PI, 0.0]).unwrap()).unwrap();
        let mut zs: Vec<Vec<f64>> = g.records().iter().map(|r| r.z.coords.clone()).collect();
        zs.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap());
        assert!((zs[0][0] - PI / 2.0).abs() < 1e-12 && zs[0][1].abs() < 1e-12);
        assert!((zs[1][0] - 1.5 * PI).abs() < 1e-12);

        let s = ModelManifold::sphere(2, 1.0).unwrap();
        match gamma_set(&s, &s.north(), &s.south()).unwrap() {
            GammaSet::Equator(e) => {
                assert_eq!(e.nodes.len(), DEFAULT_EQUATOR_NODES);
                assert!(e.nodes.iter().all(|p| p.coords[2].abs() < 1e-15));
                assert!((e.weights.iter().sum::<f64>() - 2.0 * PI).abs() < 1e-12);
            }
            _ => panic!("expected equator"),
        }
    }

    #[test]
    fn hinged_energy_examples() {
        let m = t2();
        let x = m.point(vec![0.0, 0.0]).unwrap();
        let y = m.point(vec![PI, 0.0]).unwrap();
        let z = m.point(vec![PI / 2.0, PI / 2.0]).unwrap();
        assert!((hinged_energy(&m, &x, &y, &z) - PI * PI / 2.0).abs() < 1e-12);
        assert!((hinged_energy(&m, &x, &y, &x) - m.energy(&x, &y)).abs() < 1e-15);
    }

    #[test]
    fn hessian_h_examples() {
        let m = t2();
        let x = m.point(vec![0.0, 0.0]).unwrap();
        let y = m.point(vec![1.0, 0.5]).unwrap();
        let z = m.point(vec![0.5, 0.25]).unwrap();
        let (h, _) = hessian_h(&m, &x, &y, &z).unwrap();
        assert_eq!(h, vec![vec![2.0, 0.0], vec![0.0, 2.0]]);

        let s = ModelManifold::sphere(2, 1.0).unwrap();
        let y = s.exp(&s.north(), &[PI / 2.0, 0.0, 0.0]);
        let z = s.exp(&s.north(), &[PI / 4.0, 0.0, 0.0]);
        let (h, _) = hessian_h(&s, &s.north(), &y, &z).unwrap();
        assert!((h[0][0] - 2.0).abs() < 1e-15 && (h[1][1] - PI / 2.0).abs() < 1e-12);
        let ev = hessian_h_eigenvalues(&s, PI * (1.0 - 1e-9));
        assert!(ev[1].abs() < 1e-8);
    }

    #[test]
    fn hessian_h_matches_finite_differences() {
        let s = ModelManifold::sphere(3, 1.3).unwrap();
        let x = s.point_projected(vec![0.2, -0.4, 0.5, 0.7]).unwrap();
        let y = s.point_projected(vec![-0.5, 0.1, 0.3, -0.2]).unwrap();
        let rec = &gamma_set(&s, &x, &y).unwrap().records()[0].clone();
        let n = rec.frame.len();
        for i in 0..n {
            for j in 0..n {
                let f = |a: f64, b: f64| {
                    let mut v = scale(&rec.frame[i], a);
                    v = add(&v, &scale(&rec.frame[j], b));
                    hinged_energy(&s, &x, &y, &s.exp(&rec.z, &v))
                };
                let fd = if i == j {
                    central_derivatives(|u| f(u, 0.0), 1e-3).second
                } else {
                    let h = 1e-3;
                    (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h)
                };
                assert!((fd - rec.hessian_h[i][j]).abs() < 1e-5, "{i}{j}: {fd} vs {}", rec.hessian_h[i][j]);
            }
        }
    }

    #[test]
    fn h_is_minimized_on_gamma() {
        let m = t2();
        let x = m.point(vec![0.0, 0.0]).unwrap();
        let y = m.point(vec![PI, 0.0]).unwrap();
        let hmin = 0.5 * m.energy(&x, &y);
        let k = 64;
        for i in 0..k {
            for j in 0..k {
                let z = m.point(vec![2.0 * PI * i as f64 / k as f64, 2.0 * PI * j as f64 / k as f64]).unwrap();
                let h = hinged_energy(&m, &x, &y, &z);
                assert!(h >= hmin - 1e-8);
                let on_gamma = (z.coords[1] == 0.0) && (z.coords[0] == PI / 2.0 || z.coords[0] == 1.5 * PI);
                if !on_gamma {
                    assert!(h > hmin + 1e-8);
                }
            }
        }
    }

    #[test]
    fn cut_distance_examples() {
        let m = t2();
        assert!((cut_distance(&m, &PolarDirection { theta: vec![1.0, 0.0] }) - PI).abs() < 1e-14);
        let r = 0.5f64.sqrt();
        assert!((cut_distance(&m, &PolarDirection { theta: vec![r, r] }) - PI * 2f64.sqrt()).abs() < 1e-12);
        let s = ModelManifold::sphere(4, 1.0).unwrap();
        assert_eq!(cut_distance(&s, &PolarDirection { theta: vec![1.0, 0.0, 0.0, 0.0, 0.0] }), PI);
    }

    #[test]
    fn order_examples_and_parity() {
        let settings = OrderSettings::default();
        let m = t2();
        let x = m.point(vec![0.0, 0.0]).unwrap();
        let y = m.point(vec![1.0, 0.7]).unwrap();
        let g = match minimal_geodesics(&m, &x, &y).unwrap() {
            MinimalGeodesics::Finite { geodesics, .. } => geodesics[0].clone(),
            _ => unreachable!(),
        };
        let xi = vec![-g.direction[1], g.direction[0]];
        assert_eq!(conjugacy_order(&m, &g, &xi, &settings).unwrap(), Order::Exact(0));
        let z = g.midpoint(&m);
        assert_eq!(h_constancy_order(&m, &x, &y, &z, &xi, &settings).unwrap(), Order::Exact(1));

        let s = ModelManifold::sphere(2, 1.0).unwrap();
        let n = s.north();
        let anti = Geodesic { base: n.clone(), direction: vec![1.0, 0.0, 0.0], length: PI };
        assert_eq!(conjugacy_order(&s, &anti, &[0.0, 1.0, 0.0], &settings).unwrap(), Order::AtLeast(4));
        let quarter = Geodesic { base: n.clone(), direction: vec![1.0, 0.0, 0.0], length: PI / 2.0 };
        assert_eq!(conjugacy_order(&s, &quarter, &[0.0, 1.0, 0.0], &settings).unwrap(), Order::Exact(0));
        let y = quarter.point_at(&s, PI / 2.0);
        let z = quarter.midpoint(&s);
        assert_eq!(h_constancy_order(&s, &n, &y, &z, &[0.0, 1.0, 0.0], &settings).unwrap(), Order::Exact(1));
        let eq = s.point(vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(h_constancy_order(&s, &n, &s.south(), &eq, &[0.0, 1.0, 0.0], &settings).unwrap(), Order::AtLeast(4));
    }

    #[test]
    fn classification_examples() {
        let s = ModelManifold::sphere(2, 1.0).unwrap();
        for th in direction_grid(&s, &s.north(), 12, 0.0) {
            assert_eq!(classify_theta(&s, &s.north(), &th).unwrap().label, Label::C);
        }
        let m = t2();
        let x = m.point(vec![0.0, 0.0]).unwrap();
        let c = classify_theta(&m, &x, &PolarDirection { theta: vec![1.0, 0.0] }).unwrap();
        assert_eq!(c.label, Label::P);
        match &c.associates {
            Associates::Finite(v) => {
                assert_eq!(v.len(), 1);
                assert!((v[0].theta[0] + 1.0).abs() < 1e-12 && v[0].theta[1].abs() < 1e-12);
            }
            _ => panic!(),
        }
        let r = 0.5f64.sqrt();
        let c = classify_theta(&m, &x, &PolarDirection { theta: vec![r, r] }).unwrap();
        assert_eq!(c.label, Label::R);
        assert_eq!(c.n_associates(), Some(3));
        let circle = ModelManifold::circle(2.0).unwrap();
        let c = classify_theta(&circle, &circle.point(vec![1.0]).unwrap(), &PolarDirection { theta: vec![1.0] }).unwrap();
        assert_eq!(c.label, Label::P);
    }

    #[test]
    fn torus_direction_grid_labels() {
        let m = t2();
        let x = m.point(vec![0.0, 0.0]).unwrap();
        let grid = direction_grid(&m, &x, 360, 0.0);
        let mut r_idx = Vec::new();
        for (k, th) in grid.iter().enumerate() {
            let c = classify_theta(&m, &x, th).unwrap();
            if c.label == Label::R {
                r_idx.push(k);
            } else {
                assert_eq!(c.label, Label::P);
            }
        }
        assert_eq!(r_idx, vec![45, 135, 225, 315]);
    }

    #[test]
    fn near_minimal_includes_far_midpoint() {
        let m = t2();
        let x = m.point(vec![0.0, 0.0]).unwrap();
        let y = m.point(vec![PI - 0.2, 0.0]).unwrap();
        let g = near_minimal_geodesics(&m, &x, &y, 0.5).unwrap();
        assert_eq!(g.len(), 2);
        assert!((g[1].length - (PI + 0.2)).abs() < 1e-12);
    }
}
