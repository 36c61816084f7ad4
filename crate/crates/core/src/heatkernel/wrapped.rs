//! Image sums for the circle and the rectangular flat torus.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WrappedSum {
    /// `log Σ_k exp(-((δ + kP)² - δ²)/(2t))`
    pub log_sum: f64,
    pub relative_tail: f64,
    pub terms: usize,
}

/// Image sum around the nearest image; `delta` must satisfy `|δ| ≤ P/2`.
pub fn wrapped_log_sum(delta: f64, period: f64, t: f64, max_terms: usize) -> Result<WrappedSum> {
    let term = |k: f64| (-(k * period) * (2.0 * delta + k * period) / (2.0 * t)).exp();
    let mut sum = 1.0;
    let mut k = 1usize;
    loop {
        if 2 * k + 1 > max_terms {
            return Err(Error::CapExceeded { what: "image sum term count", cap: max_terms });
        }
        let kf = k as f64;
        let (a, b) = (term(kf), term(-kf));
        sum += a + b;
        // beyond k ≥ kmin both sequences decay at least geometrically
        let past_peak = kf * period >= 2.0 * delta.abs();
        if past_peak && (a + b) < 1e-17 * sum {
            let next = term(kf + 1.0) + term(-kf - 1.0);
            let q = (-(period * period) / t).exp().min(0.5);
            return Ok(WrappedSum { log_sum: sum.ln(), relative_tail: next / (1.0 - q) / sum, terms: 2 * k + 1 });
        }
        k += 1;
    }
}

/// `log p_t` of the circle of circumference `period` at arclength offset `delta`.
pub fn log_circle_kernel(delta: f64, period: f64, t: f64, max_terms: usize) -> Result<WrappedSum> {
    let s = wrapped_log_sum(delta, period, t, max_terms)?;
    Ok(WrappedSum {
        log_sum: -0.5 * (2.0 * PI * t).ln() - delta * delta / (2.0 * t) + s.log_sum,
        ..s
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_circle_on_diagonal() {
        let v = log_circle_kernel(0.0, 2.0 * PI, 0.5, 1_000_000).unwrap();
        assert!((v.log_sum.exp() - 0.564_189_583_547_756_3).abs() < 1e-6);
    }

    #[test]
    fn brute_force_agreement() {
        for (d, t) in [(0.3_f64, 0.7_f64), (PI, 2.0), (-1.0, 15.0)] {
            let mut s = 0.0;
            for k in -400i32..=400 {
                let a = d + 2.0 * PI * k as f64;
                s += (-(a * a) / (2.0 * t)).exp();
            }
            s /= (2.0 * PI * t).sqrt();
            let v = log_circle_kernel(d, 2.0 * PI, t, 1_000_000).unwrap();
            assert!((v.log_sum.exp() / s - 1.0).abs() < 1e-14, "{d} {t}");
        }
    }
}
