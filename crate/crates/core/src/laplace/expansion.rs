use num_rational::Ratio;
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalForm {
    /// `k_1 ≤ … ≤ k_n` in `g(u) = Σ u_j^{2k_j}`.
    pub exponents: Vec<u32>,
    /// Orthonormal coordinates at the minimum, when known.
    pub frame: Option<Vec<Vec<f64>>>,
}

impl DiagonalForm {
    pub fn new(mut exponents: Vec<u32>) -> Result<Self> {
        if exponents.is_empty() || exponents.contains(&0) {
            return Err(Error::Usage("exponents must be positive integers".into()));
        }
        exponents.sort_unstable();
        Ok(DiagonalForm { exponents, frame: None })
    }

    pub fn phase(&self, u: &[f64]) -> f64 {
        u.iter().zip(&self.exponents).map(|(v, k)| v.powi(2 * *k as i32)).sum()
    }

    /// Leading order `Σ 1/(2k_j)` as an exact rational.
    pub fn leading_order(&self) -> Ratio<i64> {
        self.exponents.iter().map(|k| Ratio::new(1, 2 * *k as i64)).sum()
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

/// Truncated expansion of `∫ e^{−g(u)/t} φ(u) du` for a diagonal phase, with
/// `order` terms per axis. `phi(α)` returns `∂^α φ(0)` for even multi-indices.
pub fn diagonal_expansion<F: Fn(&[usize]) -> f64>(form: &DiagonalForm, phi: F, t: f64, order: usize) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    if order == 0 || order > 2 {
        return Err(Error::Usage(format!("order must be 1 or 2, got {order}")));
    }
    let n = form.exponents.len();
    let mut total = 0.0;
    for flat in 0..order.pow(n as u32) {
        let mut rest = flat;
        let mut alpha = Vec::with_capacity(n);
        let mut term = 1.0;
        for k in &form.exponents {
            let i = rest % order;
            rest /= order;
            alpha.push(2 * i);
            let k = *k as f64;
            let e = (2 * i + 1) as f64 / (2.0 * k);
            term *= gamma(e) / (factorial(2 * i) * k) * t.powf(e);
        }
        total += term * phi(&alpha);
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerOrderTerm {
    /// `1 − 1/k_n`
    #[serde(serialize_with = "super::newton::ser_ratio")]
    pub exponent: Ratio<i64>,
    /// Coefficient of `−t^{−exponent}` scaling in `∇²_{A,A}E_t`.
    pub coefficient: f64,
    /// Coefficient of `t^{1/k_n}` in `Var^{μ_t}(∇_A E)`.
    pub variance_coefficient: f64,
}

/// Leading behaviour of `∇²_{A,A}E_t` for a single midpoint with diagonal
/// phase; `du_grad[j] = ∂_{u_j} ∇_A E(z, y)` at the midpoint.
pub fn lower_order_hessian_term(form: &DiagonalForm, du_grad: &[f64], midpoints: usize) -> Result<LowerOrderTerm> {
    if midpoints != 1 {
        return Err(Error::Unsupported(format!("lower-order term needs a single midpoint, got {midpoints}")));
    }
    if du_grad.len() != form.exponents.len() {
        return Err(Error::Usage("one derivative per coordinate is required".into()));
    }
    let kn = *form.exponents.last().unwrap();
    let ratio = gamma(3.0 / (2.0 * kn as f64)) / gamma(1.0 / (2.0 * kn as f64));
    let s: f64 = form
        .exponents
        .iter()
        .zip(du_grad)
        .filter(|(k, _)| **k == kn)
        .map(|(_, g)| g * g)
        .sum();
    Ok(LowerOrderTerm {
        exponent: Ratio::from_integer(1) - Ratio::new(1, kn as i64),
        coefficient: -4.0 * ratio * s,
        variance_coefficient: ratio * s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quad::integrate;
    use std::f64::consts::PI;

    fn brute_1d(k: u32, t: f64, f: impl Fn(f64) -> f64) -> f64 {
        let l = (60.0 * t).powf(1.0 / (2.0 * k as f64));
        let g = |u: f64| (-(u.powi(2 * k as i32)) / t).exp() * f(u);
        integrate(g, -l, 0.0, 0.0, 1e-13).0 + integrate(g, 0.0, l, 0.0, 1e-13).0
    }

    #[test]
    fn gaussian_and_quartic() {
        let t = 1e-4;
        let f1 = DiagonalForm::new(vec![1]).unwrap();
        assert!((diagonal_expansion(&f1, |_| 1.0, t, 1).unwrap() - (PI * t).sqrt()).abs() < 1e-15);
        let f2 = DiagonalForm::new(vec![2]).unwrap();
        let e = diagonal_expansion(&f2, |_| 1.0, t, 1).unwrap();
        assert!((e / t.powf(0.25) - 1.81280).abs() < 1e-5);
        let b = brute_1d(2, t, |_| 1.0);
        assert!((e / b - 1.0).abs() < 1e-3);
        let f3 = DiagonalForm::new(vec![1, 2]).unwrap();
        let e = diagonal_expansion(&f3, |_| 1.0, t, 1).unwrap();
        assert!((e - PI.sqrt() * gamma(0.25) / 2.0 * t.powf(0.75)).abs() < 1e-15);
    }

    #[test]
    fn two_term_against_quadrature() {
        let t = 1e-3;
        for k in [1, 2] {
            let form = DiagonalForm::new(vec![k]).unwrap();
            let e = diagonal_expansion(&form, |_| 1.0, t, 2).unwrap();
            let b = brute_1d(k, t, f64::exp);
            assert!((e / b - 1.0).abs() < 1e-3, "k={k}: {e} vs {b}");
        }
    }

    #[test]
    fn lower_order_examples() {
        let f = DiagonalForm::new(vec![1, 1]).unwrap();
        let l = lower_order_hessian_term(&f, &[0.3, 0.4], 1).unwrap();
        assert_eq!(l.exponent, Ratio::from_integer(0));
        assert!((l.coefficient + 2.0 * 0.25).abs() < 1e-14);
        let f = DiagonalForm::new(vec![1, 2]).unwrap();
        let l = lower_order_hessian_term(&f, &[0.0, 1.0], 1).unwrap();
        assert!((l.variance_coefficient - 0.337989).abs() < 1e-6);
        assert!(lower_order_hessian_term(&f, &[0.0, 1.0], 2).is_err());
        let t = 1e-4;
        let var = brute_1d(2, t, |v| v * v) / brute_1d(2, t, |_| 1.0);
        assert!((var / t.sqrt() - l.variance_coefficient).abs() < 1e-3);
    }
}
