//! Eigenfunction expansions evaluated in arbitrary precision.
//!
//! At small `t` and large angles the alternating series cancels down to
//! roughly `exp(-θ²/(2t))` of its largest term, so the working precision is
//! chosen from that ratio and the sum is carried out in `astro_float`.

use astro_float::{BigFloat, Consts, RoundingMode};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::manifold::unit_sphere_area;

const RM: RoundingMode = RoundingMode::ToEven;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesCaps {
    pub max_terms: usize,
    pub max_precision_bits: usize,
}

impl Default for SeriesCaps {
    fn default() -> Self {
        SeriesCaps { max_terms: 1_000_000, max_precision_bits: 1 << 18 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub log_value: f64,
    pub relative_error_bound: f64,
    pub terms: usize,
    pub precision_bits: usize,
}

/// Which expansion to sum on the unit-radius model.
#[derive(Debug, Clone, Copy)]
enum Family {
    /// `(1/2π)(1 + 2 Σ e^{-l²t/2} cos lθ)`
    Fourier,
    /// `Σ (2l+n-1)/((n-1)|S^n|) e^{-l(l+n-1)t/2} C_l^{(n-1)/2}(cos θ)`
    Gegenbauer(usize),
}

impl Family {
    fn n(&self) -> usize {
        match self {
            Family::Fourier => 1,
            Family::Gegenbauer(n) => *n,
        }
    }

    /// Upper bound for `log |a_l|` using `|C_l(x)| ≤ C_l(1)`.
    fn log_term_bound(&self, l: usize, t: f64) -> f64 {
        let lf = l as f64;
        match self {
            Family::Fourier => {
                let c = if l == 0 { 0.0 } else { LN_2 };
                c - lf * lf * t / 2.0 - (2.0 * PI).ln()
            }
            Family::Gegenbauer(n) => {
                let nf = *n as f64;
                let lam2 = nf - 1.0;
                let c_at_one = ln_gamma(lf + lam2) - ln_gamma(lam2) - ln_gamma(lf + 1.0);
                ((2.0 * lf + nf - 1.0) / (nf - 1.0)).ln() + c_at_one - lf * (lf + nf - 1.0) * t / 2.0
                    - unit_sphere_area(*n).ln()
            }
        }
    }
}

/// Heat kernel of the unit sphere `S^n` (`n >= 2`) at angle `theta`.
pub fn sphere_kernel(n: usize, t: f64, theta: f64, caps: &SeriesCaps) -> Result<SeriesValue> {
    if n < 2 {
        return Err(Error::Usage("Gegenbauer series needs n >= 2".into()));
    }
    sum_series(Family::Gegenbauer(n), t, theta, caps)
}

/// Heat kernel of the unit circle from its Fourier series.
pub fn circle_fourier_kernel(t: f64, theta: f64, caps: &SeriesCaps) -> Result<SeriesValue> {
    sum_series(Family::Fourier, t, theta, caps)
}

fn big_to_log(b: &BigFloat) -> Option<f64> {
    if !b.is_positive() || b.is_zero() {
        return None;
    }
    let (m, _, _, e, _) = b.as_raw_parts()?;
    let top = *m.last()? as f64 / 2f64.powi(64);
    Some(top.ln() + e as f64 * LN_2)
}

fn sum_series(fam: Family, t: f64, theta: f64, caps: &SeriesCaps) -> Result<SeriesValue> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    let n = fam.n() as f64;
    let theta = theta.clamp(0.0, PI);
    // a safe lower estimate of log p: the Gaussian with a margin
    let log_p_est = -0.5 * n * (2.0 * PI * t).ln() - theta * theta / (2.0 * t) - 5.0;
    let target = log_p_est - 41.5;

    let mut bounds: Vec<f64> = Vec::new();
    let mut l = 0usize;
    loop {
        if l >= caps.max_terms {
            return Err(Error::CapExceeded { what: "spectral term count", cap: caps.max_terms });
        }
        let b = fam.log_term_bound(l, t);
        let decreasing = l > 0 && b < bounds[l - 1];
        bounds.push(b);
        if decreasing && b < target {
            break;
        }
        l += 1;
    }
    let terms = l; // a_0 .. a_{L-1} are summed, a_L starts the tail
    let b_l = bounds[terms];
    let q = (fam.log_term_bound(terms + 1, t) - b_l).exp().min(0.999);
    let log_tail = b_l - (1.0 - q).ln();

    let max_b = bounds.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let bits_f = (max_b - log_p_est) / LN_2 + 2.0 * (terms as f64 + 1.0).log2() + 64.0;
    let bits = (bits_f.ceil().max(128.0) as usize).div_ceil(64) * 64;
    if bits > caps.max_precision_bits {
        return Err(Error::CapExceeded { what: "spectral working precision (bits)", cap: caps.max_precision_bits });
    }

    let p = bits;
    let mut cc = Consts::new().map_err(|e| Error::InternalFault(format!("bigfloat constants: {e:?}")))?;
    let one = BigFloat::from_f64(1.0, p);
    let int = |v: usize| BigFloat::from_f64(v as f64, p);
    let x = BigFloat::from_f64(theta, p).cos(p, RM, &mut cc);
    // both decay factors must derive from the same t in working precision,
    // otherwise the cancellation that produces exp(-θ²/2t) is destroyed
    let minus_t = BigFloat::from_f64(-t, p);
    let e_t = minus_t.exp(p, RM, &mut cc);
    let half_nt = minus_t.mul(&int(fam.n()), p, RM).div(&int(2), p, RM);
    let mut g = half_nt.exp(p, RM, &mut cc);
    let mut w = one.clone();
    let mut sum;
    match fam {
        Family::Fourier => {
            let two_x = x.mul(&int(2), p, RM);
            let (mut c_prev, mut c_cur) = (one.clone(), x.clone());
            let mut acc = BigFloat::from_f64(0.0, p);
            for l in 1..terms {
                w = w.mul(&g, p, RM);
                g = g.mul(&e_t, p, RM);
                if l >= 2 {
                    let next = two_x.mul(&c_cur, p, RM).sub(&c_prev, p, RM);
                    c_prev = c_cur;
                    c_cur = next;
                }
                acc = acc.add(&w.mul(&c_cur, p, RM), p, RM);
            }
            sum = one.add(&acc.mul(&int(2), p, RM), p, RM);
            sum = sum.div(&BigFloat::from_f64(2.0, p).mul(&cc.pi(p, RM), p, RM), p, RM);
        }
        Family::Gegenbauer(nn) => {
            // C_0 = 1, C_1 = 2λx = (n-1)x
            let (mut c_prev, mut c_cur) = (one.clone(), x.mul(&int(nn - 1), p, RM));
            sum = int(nn - 1);
            for l in 1..terms {
                w = w.mul(&g, p, RM);
                g = g.mul(&e_t, p, RM);
                if l >= 2 {
                    let a = x.mul(&c_cur, p, RM).mul(&int(2 * l + nn - 3), p, RM);
                    let b = c_prev.mul(&int(l + nn - 3), p, RM);
                    let next = a.sub(&b, p, RM).div(&int(l), p, RM);
                    c_prev = c_cur;
                    c_cur = next;
                }
                let term = w.mul(&c_cur, p, RM).mul(&int(2 * l + nn - 1), p, RM);
                sum = sum.add(&term, p, RM);
            }
            let log_sum = big_to_log(&sum).ok_or_else(|| {
                Error::InternalFault(format!("spectral sum lost positivity (t={t}, theta={theta}, bits={p})"))
            })?;
            let log_value = log_sum - ((nn - 1) as f64).ln() - unit_sphere_area(nn).ln();
            return Ok(SeriesValue {
                log_value,
                relative_error_bound: (log_tail - log_value).exp() + 2f64.powi(-60),
                terms,
                precision_bits: p,
            });
        }
    }
    let log_value = big_to_log(&sum).ok_or_else(|| {
        Error::InternalFault(format!("Fourier sum lost positivity (t={t}, theta={theta}, bits={p})"))
    })?;
    Ok(SeriesValue {
        log_value,
        relative_error_bound: (log_tail - log_value).exp() + 2f64.powi(-60),
        terms,
        precision_bits: p,
    })
}
