use rayon::prelude::*;
use serde::Serialize;

use super::measure::{epsilon_margin, normalize_log, tube_grid, Margin};
use crate::error::{Error, Result};
use crate::geodesy;
use crate::heatkernel::{energy_derivatives, pleijel_k};
use crate::manifold::{ModelManifold, Point};

/// Kernel data used inside the midpoint integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KernelMode {
    /// Exact `k` and `l` from the heat kernel.
    Exact,
    /// `k ≈ H₀`, `l ≈ −∇_A E`, `∇_A l ≈ −∇²_{A,A} E`.
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepresentationOptions {
    pub epsilon: Option<f64>,
    pub nodes_per_axis: usize,
    /// Relative tolerance on the change of the right-hand side under refinement.
    pub tolerance: f64,
    pub mode: KernelMode,
    pub equator_nodes: usize,
}

impl Default for RepresentationOptions {
    fn default() -> Self {
        RepresentationOptions {
            epsilon: None,
            nodes_per_axis: 21,
            tolerance: 1e-3,
            mode: KernelMode::Exact,
            equator_nodes: geodesy::DEFAULT_EQUATOR_NODES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepresentationCheck {
    /// Kernel time of the integrands; the left side is taken at `2t`.
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub relative_residual: f64,
    pub refinement_change: f64,
    pub nodes: usize,
}

struct Moments {
    mean_l: f64,
    var_l: f64,
    mean_dl: f64,
}

fn moments(m: &ModelManifold, x: &Point, y: &Point, t: f64, a: &[f64], eps: f64, nodes: usize, opts: &RepresentationOptions) -> Result<(Moments, usize)> {
    let gamma = geodesy::gamma_set_with(m, x, y, opts.equator_nodes)?;
    let grid = tube_grid(m, &gamma, 2.0 * t, eps, nodes);
    let rows: Vec<(f64, f64, f64)> = grid
        .par_iter()
        .map(|g| -> Result<(f64, f64, f64)> {
            let h = geodesy::hinged_energy(m, x, y, &g.z);
            match opts.mode {
                KernelMode::Exact => {
                    let kx = pleijel_k(m, t, x, &g.z)?.log_value;
                    let ky = pleijel_k(m, t, &g.z, y)?.log_value;
                    let d = energy_derivatives(m, t, &g.z, y, a)?;
                    Ok((kx + ky - h / t + g.vol.ln(), -d.grad.value, -d.hess.value))
                }
                KernelMode::Truncated => {
                    let h0 = m.h0_at_distance(m.distance(x, &g.z)) * m.h0_at_distance(m.distance(y, &g.z));
                    let grad = m.grad_energy(&g.z, y, a).ok_or_else(|| Error::OnCutLocus("tube node".into()))?;
                    let hess = m.hess_energy(&g.z, y, a).ok_or_else(|| Error::OnCutLocus("tube node".into()))?;
                    Ok((h0.ln() - h / t + g.vol.ln(), -grad, -hess))
                }
            }
        })
        .collect::<Result<_>>()?;
    let logw: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let w = normalize_log(&logw);
    let mean_l: f64 = w.iter().zip(&rows).map(|(w, r)| w * r.1).sum();
    let var_l: f64 = w.iter().zip(&rows).map(|(w, r)| w * (r.1 - mean_l).powi(2)).sum();
    let mean_dl: f64 = w.iter().zip(&rows).map(|(w, r)| w * r.2).sum();
    Ok((Moments { mean_l, var_l, mean_dl }, grid.len()))
}

fn check(
    m: &ModelManifold,
    x: &Point,
    y: &Point,
    t: f64,
    a: &[f64],
    opts: &RepresentationOptions,
    hess: bool,
) -> Result<RepresentationCheck> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    if a.len() != m.ambient_dim() {
        return Err(Error::Usage(format!("A needs {} components", m.ambient_dim())));
    }
    if opts.nodes_per_axis < 9 {
        return Err(Error::Config(format!("nodes_per_axis must be at least 9, got {}", opts.nodes_per_axis)));
    }
    let gamma = geodesy::gamma_set_with(m, x, y, opts.equator_nodes)?;
    let margin = 0.5 * epsilon_margin(m, x, y, &gamma, Margin::CutOnly);
    let eps = match opts.epsilon {
        Some(e) if e > margin => {
            return Err(Error::EpsilonTooLarge { epsilon: e, margin, which: "half the distance from the midpoints to Cut(x) and Cut(y)" })
        }
        Some(e) => e,
        None => margin,
    };
    let rhs_of = |mo: &Moments| {
        if hess {
            -2.0 * mo.mean_dl - 2.0 / t * mo.var_l
        } else {
            -2.0 * mo.mean_l
        }
    };
    let (coarse, _) = moments(m, x, y, t, a, eps, opts.nodes_per_axis, opts)?;
    let (fine, count) = moments(m, x, y, t, a, eps, 2 * opts.nodes_per_axis - 1, opts)?;
    let rhs = rhs_of(&fine);
    let change = (rhs - rhs_of(&coarse)).abs();
    if change > opts.tolerance * rhs.abs().max(1.0) {
        return Err(Error::Quadrature(format!("refining the tube grid changed the integral by {change:e}")));
    }
    let d = energy_derivatives(m, 2.0 * t, x, y, a)?;
    let lhs = if hess { d.hess.value } else { d.grad.value };
    let residual = (lhs - rhs).abs();
    Ok(RepresentationCheck {
        t,
        lhs,
        rhs,
        residual,
        relative_residual: residual / lhs.abs().max(1.0),
        refinement_change: change,
        nodes: count,
    })
}

/// `∇_A E_{2t}(x,y)` against `−2 ∫ l(t,z,y,A) w(z) dz` with
/// `w ∝ k(t,x,z) k(t,y,z) e^{−h_{x,y}(z)/t}` on the tube around Γ.
pub fn representation_check_grad(m: &ModelManifold, x: &Point, y: &Point, t: f64, a: &[f64], opts: &RepresentationOptions) -> Result<RepresentationCheck> {
    check(m, x, y, t, a, opts, false)
}

/// `∇²_{A,A} E_{2t}(x,y)` against `−2 E_w[∇_A l] − (2/t) Var_w[l]`.
pub fn representation_check_hess(m: &ModelManifold, x: &Point, y: &Point, t: f64, a: &[f64], opts: &RepresentationOptions) -> Result<RepresentationCheck> {
    check(m, x, y, t, a, opts, true)
}
