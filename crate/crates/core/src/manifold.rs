//! Closed-form model manifolds: circle, round sphere and rectangular flat
//! torus, with exact distance, exponential map and Jacobians.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::fd::curve_derivatives;
use crate::numerics::linalg::{axpy, complete_basis, dot, norm, scale, sub, wrap};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "serde_json::Value", into = "ModelSpec")]
pub enum ModelManifold {
    Circle { radius: f64 },
    Sphere { dim: usize, radius: f64 },
    FlatTorus { periods: Vec<f64> },
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "model", rename_all = "snake_case")]
enum ModelSpec {
    Circle { radius: f64 },
    Sphere { dim: usize, radius: f64 },
    Torus { periods: Vec<f64> },
}

// Parsed through `serde_json::Value`: internally tagged enums buffer their
// content, which does not round-trip numbers under `arbitrary_precision`.
impl TryFrom<serde_json::Value> for ModelManifold {
    type Error = Error;
    fn try_from(v: serde_json::Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| Error::InvalidModel("model must be a JSON object".into()))?;
        let num = |key: &str, default: Option<f64>| -> Result<f64> {
            match obj.get(key) {
                Some(x) => x.as_f64().ok_or_else(|| Error::InvalidModel(format!("field `{key}` must be a number"))),
                None => default.ok_or_else(|| Error::InvalidModel(format!("missing field `{key}`"))),
            }
        };
        let kind = obj
            .get("model")
            .and_then(|k| k.as_str())
            .ok_or_else(|| Error::InvalidModel("missing string field `model`".into()))?;
        match kind {
            "circle" => ModelManifold::circle(num("radius", Some(1.0))?),
            "sphere" => {
                let dim = obj
                    .get("dim")
                    .and_then(|d| d.as_u64())
                    .ok_or_else(|| Error::InvalidModel("field `dim` must be a positive integer".into()))?;
                ModelManifold::sphere(dim as usize, num("radius", Some(1.0))?)
            }
            "torus" | "flat_torus" => {
                let periods = obj
                    .get("periods")
                    .and_then(|p| p.as_array())
                    .ok_or_else(|| Error::InvalidModel("field `periods` must be an array".into()))?
                    .iter()
                    .map(|p| p.as_f64().ok_or_else(|| Error::InvalidModel("periods must be numbers".into())))
                    .collect::<Result<Vec<f64>>>()?;
                ModelManifold::torus(&periods)
            }
            other => Err(Error::InvalidModel(format!("unknown model `{other}` (circle, sphere, torus)"))),
        }
    }
}

impl From<ModelManifold> for ModelSpec {
    fn from(m: ModelManifold) -> Self {
        match m {
            ModelManifold::Circle { radius } => ModelSpec::Circle { radius },
            ModelManifold::Sphere { dim, radius } => ModelSpec::Sphere { dim, radius },
            ModelManifold::FlatTorus { periods } => ModelSpec::Torus { periods },
        }
    }
}

/// Coordinates in the model's canonical chart: arclength in `[0, 2πR)` for
/// the circle, an embedded vector of norm `R` for the sphere, coordinates
/// reduced to `[0, L_i)` for the torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub coords: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    pub base: Point,
    pub components: Vec<f64>,
}

/// Unit initial direction at a base point (ambient components on the sphere).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarDirection {
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jacobian {
    pub value: f64,
    /// Set when `|v|` reaches the first conjugate radius.
    pub degenerate: bool,
}

const SPHERE_TOL: f64 = 1e-12;

impl ModelManifold {
    pub fn circle(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidModel(format!("circle radius must be positive, got {radius}")));
        }
        Ok(ModelManifold::Circle { radius })
    }

    pub fn sphere(dim: usize, radius: f64) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidModel("sphere dimension must be at least 1".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidModel(format!("sphere radius must be positive, got {radius}")));
        }
        Ok(ModelManifold::Sphere { dim, radius })
    }

    pub fn torus(periods: &[f64]) -> Result<Self> {
        if periods.is_empty() {
            return Err(Error::InvalidModel("torus needs at least one period".into()));
        }
        if let Some(p) = periods.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
            return Err(Error::InvalidModel(format!("torus periods must be positive, got {p}")));
        }
        Ok(ModelManifold::FlatTorus { periods: periods.to_vec() })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidModel(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    /// Intrinsic dimension `n`.
    pub fn dim(&self) -> usize {
        match self {
            ModelManifold::Circle { .. } => 1,
            ModelManifold::Sphere { dim, .. } => *dim,
            ModelManifold::FlatTorus { periods } => periods.len(),
        }
    }

    /// Length of coordinate vectors for points and tangent vectors.
    pub fn ambient_dim(&self) -> usize {
        match self {
            ModelManifold::Sphere { dim, .. } => dim + 1,
            _ => self.dim(),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            ModelManifold::Circle { radius } | ModelManifold::Sphere { radius, .. } => PI * radius,
            ModelManifold::FlatTorus { periods } => 0.5 * periods.iter().map(|l| l * l).sum::<f64>().sqrt(),
        }
    }

    /// Riemannian volume of the whole model.
    pub fn volume(&self) -> f64 {
        match self {
            ModelManifold::Circle { radius } => 2.0 * PI * radius,
            ModelManifold::Sphere { dim, radius } => unit_sphere_area(*dim) * radius.powi(*dim as i32),
            ModelManifold::FlatTorus { periods } => periods.iter().product(),
        }
    }

    pub fn is_flat(&self) -> bool {
        !matches!(self, ModelManifold::Sphere { dim, .. } if *dim >= 2)
    }

    /// Validates and reduces coordinates to the canonical chart.
    pub fn point(&self, coords: Vec<f64>) -> Result<Point> {
        if coords.len() != self.ambient_dim() {
            return Err(Error::InvalidPoint(format!(
                "expected {} coordinates, got {}",
                self.ambient_dim(),
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint("non-finite coordinate".into()));
        }
        match self {
            ModelManifold::Sphere { radius, .. } => {
                let r = norm(&coords);
                if ((r / radius) - 1.0).abs() > SPHERE_TOL {
                    return Err(Error::InvalidPoint(format!(
                        "sphere point has norm {r}, expected {radius} within relative 1e-12"
                    )));
                }
                Ok(Point { coords: scale(&coords, radius / r) })
            }
            _ => Ok(self.reduce(coords)),
        }
    }

    /// Like [`point`](Self::point) but radially projects sphere coordinates.
    pub fn point_projected(&self, coords: Vec<f64>) -> Result<Point> {
        if let ModelManifold::Sphere { radius, .. } = self {
            let r = norm(&coords);
            if coords.len() != self.ambient_dim() || r == 0.0 || !r.is_finite() {
                return Err(Error::InvalidPoint("cannot project onto the sphere".into()));
            }
            return Ok(Point { coords: scale(&coords, radius / r) });
        }
        self.point(coords)
    }

    fn reduce(&self, coords: Vec<f64>) -> Point {
        let periods: Vec<f64> = match self {
            ModelManifold::Circle { radius } => vec![2.0 * PI * radius],
            ModelManifold::FlatTorus { periods } => periods.clone(),
            ModelManifold::Sphere { .. } => return Point { coords },
        };
        let coords = coords
            .iter()
            .zip(&periods)
            .map(|(c, l)| {
                let r = c - l * (c / l).floor();
                if r >= *l || r < 0.0 {
                    0.0
                } else {
                    r
                }
            })
            .collect();
        Point { coords }
    }

    /// North pole `(0, …, 0, R)` of a sphere; the origin elsewhere.
    pub fn north(&self) -> Point {
        let mut c = vec![0.0; self.ambient_dim()];
        if let ModelManifold::Sphere { radius, dim } = self {
            c[*dim] = *radius;
        }
        Point { coords: c }
    }

    pub fn south(&self) -> Point {
        let mut p = self.north();
        if let ModelManifold::Sphere { .. } = self {
            p.coords = scale(&p.coords, -1.0);
        }
        p
    }

    pub fn tangent(&self, base: &Point, components: Vec<f64>) -> Result<TangentVector> {
        if components.len() != self.ambient_dim() {
            return Err(Error::Usage(format!(
                "tangent vector needs {} components, got {}",
                self.ambient_dim(),
                components.len()
            )));
        }
        if let ModelManifold::Sphere { radius, .. } = self {
            let c = dot(&components, &base.coords) / radius;
            if c.abs() > SPHERE_TOL * norm(&components).max(1.0) {
                return Err(Error::Usage(format!("tangent vector not orthogonal to base (component {c})")));
            }
        }
        Ok(TangentVector { base: base.clone(), components })
    }

    /// Orthogonal projection of an ambient vector onto `T_x M`.
    pub fn project_tangent(&self, x: &Point, v: &[f64]) -> Vec<f64> {
        match self {
            ModelManifold::Sphere { radius, .. } => {
                let c = dot(v, &x.coords) / (radius * radius);
                axpy(v, -c, &x.coords)
            }
            _ => v.to_vec(),
        }
    }

    /// Orthonormal frame of `T_x M` (ambient components on the sphere).
    pub fn tangent_frame(&self, x: &Point) -> Vec<Vec<f64>> {
        match self {
            ModelManifold::Sphere { dim, radius } => {
                let xh = scale(&x.coords, 1.0 / radius);
                complete_basis(&[], &[xh], dim + 1, *dim)
            }
            _ => {
                let n = self.dim();
                (0..n)
                    .map(|i| {
                        let mut e = vec![0.0; n];
                        e[i] = 1.0;
                        e
                    })
                    .collect()
            }
        }
    }

    /// Orthonormal completion of the unit tangent `first` at `x`.
    pub fn frame_with(&self, x: &Point, first: &[f64]) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut avoid = Vec::new();
        if let ModelManifold::Sphere { radius, .. } = self {
            avoid.push(scale(&x.coords, 1.0 / radius));
        }
        complete_basis(&[first.to_vec()], &avoid, self.ambient_dim(), n)
    }

    pub fn exp_map(&self, v: &TangentVector) -> Result<Point> {
        if v.components.len() != self.ambient_dim() || v.base.coords.len() != self.ambient_dim() {
            return Err(Error::Usage("dimension mismatch in exp_map".into()));
        }
        Ok(self.exp(&v.base, &v.components))
    }

    /// Exponential map without validation of `v`.
    pub fn exp(&self, x: &Point, v: &[f64]) -> Point {
        match self {
            ModelManifold::Sphere { radius, .. } => Point { coords: self.lifted_exp(x, v) }.renormalized(*radius),
            _ => self.reduce(self.lifted_exp(x, v)),
        }
    }

    /// Exponential map in ambient (sphere) or universal-cover (flat) coordinates.
    pub fn lifted_exp(&self, x: &Point, v: &[f64]) -> Vec<f64> {
        match self {
            ModelManifold::Sphere { radius, .. } => {
                let r = norm(v);
                if r == 0.0 {
                    return x.coords.clone();
                }
                let a = r / radius;
                let mut out = scale(&x.coords, a.cos());
                for (o, vi) in out.iter_mut().zip(v) {
                    *o += radius * a.sin() * vi / r;
                }
                out
            }
            _ => x.coords.iter().zip(v).map(|(a, b)| a + b).collect(),
        }
    }

    /// Initial velocity of a minimal geodesic from `x` to `y`; `None` for
    /// sphere antipodes where the direction is undetermined.
    pub fn log(&self, x: &Point, y: &Point) -> Option<Vec<f64>> {
        match self {
            ModelManifold::Circle { radius } => Some(vec![wrap(y.coords[0] - x.coords[0], 2.0 * PI * radius)]),
            ModelManifold::FlatTorus { periods } => Some(
                x.coords
                    .iter()
                    .zip(&y.coords)
                    .zip(periods)
                    .map(|((a, b), l)| wrap(b - a, *l))
                    .collect(),
            ),
            ModelManifold::Sphere { radius, .. } => {
                let d = self.distance(x, y);
                let w = self.project_tangent(x, &y.coords);
                let wn = norm(&w);
                if wn <= 1e-300 {
                    if d < 1.0 * radius {
                        return Some(vec![0.0; x.coords.len()]);
                    }
                    return None;
                }
                Some(scale(&w, d / wn))
            }
        }
    }

    pub fn distance(&self, x: &Point, y: &Point) -> f64 {
        match self {
            ModelManifold::Circle { radius } => wrap(y.coords[0] - x.coords[0], 2.0 * PI * radius).abs(),
            ModelManifold::FlatTorus { periods } => x
                .coords
                .iter()
                .zip(&y.coords)
                .zip(periods)
                .map(|((a, b), l)| wrap(b - a, *l).powi(2))
                .sum::<f64>()
                .sqrt(),
            ModelManifold::Sphere { radius, .. } => {
                let d = norm(&sub(&x.coords, &y.coords));
                let s: f64 = x.coords.iter().zip(&y.coords).map(|(a, b)| (a + b).powi(2)).sum::<f64>().sqrt();
                2.0 * radius * d.atan2(s)
            }
        }
    }

    pub fn energy(&self, x: &Point, y: &Point) -> f64 {
        0.5 * self.distance(x, y).powi(2)
    }

    pub fn exp_jacobian(&self, _x: &Point, v: &[f64]) -> Jacobian {
        self.jacobian_at_radius(norm(v))
    }

    pub fn jacobian_at_radius(&self, r: f64) -> Jacobian {
        match self {
            ModelManifold::Sphere { dim, radius } if *dim >= 2 => {
                let a = r / radius;
                let ratio = if a < 1e-8 { 1.0 - a * a / 6.0 } else { a.sin() / a };
                Jacobian {
                    value: ratio.powi(*dim as i32 - 1).max(0.0) * if a >= PI { 0.0 } else { 1.0 },
                    degenerate: a >= PI,
                }
            }
            _ => Jacobian { value: 1.0, degenerate: false },
        }
    }

    /// Leading Minakshisundaram–Pleijel coefficient `H₀(x,y)`.
    pub fn h0(&self, x: &Point, y: &Point) -> Result<f64> {
        if self.in_cut_locus(x, y) {
            return Err(Error::OnCutLocus("H0 is undefined for y in Cut(x)".into()));
        }
        Ok(self.jacobian_at_radius(self.distance(x, y)).value.powf(-0.5))
    }

    /// `H₀` as a function of the distance only, valid off the cut locus.
    pub fn h0_at_distance(&self, r: f64) -> f64 {
        self.jacobian_at_radius(r).value.powf(-0.5)
    }

    /// Volume density in normal polar coordinates.
    pub fn polar_volume_density(&self, _x: &Point, r: f64, _theta: &PolarDirection) -> f64 {
        self.polar_density(r)
    }

    pub fn polar_density(&self, r: f64) -> f64 {
        let n = self.dim() as i32;
        match self {
            ModelManifold::Sphere { radius, .. } => (radius * (r / radius).sin()).max(0.0).powi(n - 1),
            _ => r.powi(n - 1),
        }
    }

    /// `∇_A E(x,·)` at `y` for `A ∈ T_yM`; `None` when no direction is defined.
    pub fn grad_energy(&self, x: &Point, y: &Point, a: &[f64]) -> Option<f64> {
        let v = self.log(y, x)?;
        Some(-dot(a, &v))
    }

    /// `∇²_{A,A} E(x,·)` at `y`, off the cut locus of `x`.
    pub fn hess_energy(&self, x: &Point, y: &Point, a: &[f64]) -> Option<f64> {
        let a2 = dot(a, a);
        match self {
            ModelManifold::Sphere { radius, dim } if *dim >= 2 => {
                let d = self.distance(x, y);
                if d >= PI * radius * (1.0 - 1e-12) {
                    return None;
                }
                if d == 0.0 {
                    return Some(a2);
                }
                let v = self.log(y, x)?;
                let ar = dot(a, &v) / d;
                let rho = d / radius;
                Some(ar * ar + rho / rho.tan() * (a2 - ar * ar))
            }
            _ => Some(a2),
        }
    }

    /// Distance from `z` to the cut locus of `x`.
    pub fn distance_to_cut_locus(&self, x: &Point, z: &Point) -> f64 {
        match self {
            ModelManifold::Circle { radius } | ModelManifold::Sphere { radius, .. } => {
                PI * radius - self.distance(x, z)
            }
            ModelManifold::FlatTorus { periods } => x
                .coords
                .iter()
                .zip(&z.coords)
                .zip(periods)
                .map(|((a, b), l)| 0.5 * l - wrap(b - a, *l).abs())
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn in_cut_locus(&self, x: &Point, y: &Point) -> bool {
        self.distance_to_cut_locus(x, y) <= 1e-12 * self.diameter()
    }

    /// Norms of the first `m_max` derivatives of
    /// `s ↦ exp_x(d (cos s θ₀ + sin s ξ))` at `s = 0`.
    pub fn exp_directional_derivatives(
        &self,
        x: &Point,
        d: f64,
        theta0: &[f64],
        xi: &[f64],
        m_max: usize,
    ) -> Result<Vec<f64>> {
        if m_max > 6 {
            return Err(Error::Usage(format!("m_max must be at most 6, got {m_max}")));
        }
        if self.dim() < 2 {
            return Err(Error::Usage("no transverse direction in dimension 1".into()));
        }
        let curve = |s: f64| {
            let v: Vec<f64> = theta0.iter().zip(xi).map(|(a, b)| d * (s.cos() * a + s.sin() * b)).collect();
            self.lifted_exp(x, &v)
        };
        Ok(curve_derivatives(curve, m_max).iter().map(|v| norm(v)).collect())
    }
}

impl Point {
    fn renormalized(mut self, radius: f64) -> Point {
        let r = norm(&self.coords);
        if r > 0.0 {
            self.coords = scale(&self.coords, radius / r);
        }
        self
    }
}

/// Area of the unit sphere `S^n` in `R^{n+1}`.
pub fn unit_sphere_area(n: usize) -> f64 {
    let a = (n as f64 + 1.0) / 2.0;
    2.0 * PI.powf(a) / statrs::function::gamma::gamma(a)
}
