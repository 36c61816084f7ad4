use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geodesy::{self, GammaSet};
use crate::heatkernel::hess_energy_t;
use crate::manifold::{ModelManifold, Point};
use crate::numerics::fd::central_derivatives;
use crate::numerics::linalg::scale;

pub const DEFAULT_T_GRID: [f64; 5] = [0.08, 0.04, 0.02, 0.01, 0.005];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Cut,
    NonCut,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupReport {
    pub t_grid: Vec<f64>,
    /// `max_A |∇²_{A,A}E_t(x,y)|` over the frame.
    pub hess_norm: Vec<f64>,
    pub verdict: Verdict,
    /// Least-squares slope of `log hess_norm` against `log t`.
    pub fitted_exponent: f64,
}

impl BlowupReport {
    pub fn terminal(&self) -> f64 {
        *self.hess_norm.last().unwrap()
    }
}

const FIT_POINTS: usize = 4;
const CUT_SLOPE: f64 = -0.4;
const CAUCHY_TOL: f64 = 0.1;

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Classifies `y` as cut or non-cut for `x` from the growth of `‖∇²E_t‖`.
pub fn blowup_classifier(m: &ModelManifold, x: &Point, y: &Point, t_grid: &[f64], frame: Option<&[Vec<f64>]>) -> Result<BlowupReport> {
    if t_grid.len() < FIT_POINTS {
        return Err(Error::Config(format!("t_grid needs at least {FIT_POINTS} times")));
    }
    if t_grid.iter().any(|t| !(*t > 0.0)) || t_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("t_grid must be positive and strictly decreasing".into()));
    }
    let frame: Vec<Vec<f64>> = match frame {
        Some(f) => f.to_vec(),
        None => m.tangent_frame(y),
    };
    let jobs: Vec<(usize, usize)> = (0..t_grid.len()).flat_map(|i| (0..frame.len()).map(move |k| (i, k))).collect();
    let vals: Vec<f64> = jobs
        .par_iter()
        .map(|&(i, k)| hess_energy_t(m, t_grid[i], x, y, &frame[k]).map(|d| d.value.abs()))
        .collect::<Result<_>>()?;
    let mut hess_norm = vec![0.0f64; t_grid.len()];
    for ((i, _), v) in jobs.iter().zip(&vals) {
        hess_norm[*i] = hess_norm[*i].max(*v);
    }
    let tail = t_grid.len() - FIT_POINTS;
    let lx: Vec<f64> = t_grid[tail..].iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = hess_norm[tail..].iter().map(|h| h.max(1e-300).ln()).collect();
    let fitted_exponent = slope(&lx, &ly);
    let increasing = hess_norm[tail..].windows(2).all(|w| w[1] > w[0]);
    let n = hess_norm.len();
    let cauchy = (hess_norm[n - 1] - hess_norm[n - 2]).abs() <= CAUCHY_TOL * hess_norm[n - 1].max(1.0);
    let verdict = if fitted_exponent <= CUT_SLOPE && increasing {
        Verdict::Cut
    } else if cauchy && fitted_exponent > CUT_SLOPE / 2.0 {
        Verdict::NonCut
    } else {
        Verdict::Inconclusive
    };
    Ok(BlowupReport { t_grid: t_grid.to_vec(), hess_norm, verdict, fitted_exponent })
}

/// `∇²_{A,A}E(x,y) = 2[∇²_{A,A}E(z,y) − Σ_i (∂_{u_i} ∇_A E(z,y))²]` with `u`
/// the coordinates at the midpoint `z` in which `2h_{x,y}` is `Σ u_i²`.
pub fn regular_hessian(m: &ModelManifold, x: &Point, y: &Point, a: &[f64]) -> Result<f64> {
    if m.distance_to_cut_locus(x, y) < 1e-6 * m.diameter().max(1.0) {
        return Err(Error::OnCutLocus("regular Hessian needs y off Cut(x) by at least 1e-6".into()));
    }
    let rec = match geodesy::gamma_set(m, x, y)? {
        GammaSet::Discrete(r) if r.len() == 1 => r.into_iter().next().unwrap(),
        _ => return Err(Error::InternalFault("expected a single midpoint off the cut locus".into())),
    };
    let hz = m.hess_energy(&rec.z, y, a).ok_or_else(|| Error::OnCutLocus("midpoint".into()))?;
    let step = 1e-3 * m.distance(x, y).max(1e-3);
    let mut s = 0.0;
    for (i, e) in rec.frame.iter().enumerate() {
        let lam = rec.hessian_h[i][i];
        let g = |u: f64| {
            let zz = m.exp(&rec.z, &scale(e, u));
            m.grad_energy(&zz, y, a).unwrap_or(f64::NAN)
        };
        let dv = central_derivatives(g, step).first;
        s += dv * dv / lam;
    }
    Ok(2.0 * (hz - s))
}
