use rayon::prelude::*;

/// First and second derivative estimates from a 5-point central stencil,
/// extrapolated against the same stencil at twice the step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentralDerivatives {
    pub first: f64,
    pub second: f64,
    pub first_err: f64,
    pub second_err: f64,
    pub step: f64,
}

fn d1(fm2: f64, fm1: f64, fp1: f64, fp2: f64, h: f64) -> f64 {
    (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h)
}

fn d2(fm2: f64, fm1: f64, f0: f64, fp1: f64, fp2: f64, h: f64) -> f64 {
    (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h)
}

/// Evaluates `f` at `0, ±h, ±2h, ±4h` and returns Richardson-improved first
/// and second derivatives at 0 with `|D(h) - D(2h)| / 15` as error estimate.
pub fn central_derivatives<F>(f: F, h: f64) -> CentralDerivatives
where
    F: Fn(f64) -> f64 + Sync,
{
    let offsets = [-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0];
    let v: Vec<f64> = offsets.par_iter().map(|&k| f(k * h)).collect();
    let (fm4, fm2, fm1, f0, fp1, fp2, fp4) = (v[0], v[1], v[2], v[3], v[4], v[5], v[6]);
    let g1 = d1(fm2, fm1, fp1, fp2, h);
    let g2 = d1(fm4, fm2, fp2, fp4, 2.0 * h);
    let s1 = d2(fm2, fm1, f0, fp1, fp2, h);
    let s2 = d2(fm4, fm2, f0, fp2, fp4, 2.0 * h);
    CentralDerivatives {
        first: g1 + (g1 - g2) / 15.0,
        second: s1 + (s1 - s2) / 15.0,
        first_err: (g1 - g2).abs() / 15.0,
        second_err: (s1 - s2).abs() / 15.0,
        step: h,
    }
}

/// Stencil over offsets `-3..=3` and the step it is meant for.
pub fn stencil(order: usize) -> Option<([f64; 7], f64, f64)> {
    // (coefficients, step, divisor exponent already folded into the scale)
    let (c, h, denom): ([f64; 7], f64, f64) = match order {
        1 => ([0.0, 1.0, -8.0, 0.0, 8.0, -1.0, 0.0], 1e-2, 12.0),
        2 => ([0.0, -1.0, 16.0, -30.0, 16.0, -1.0, 0.0], 1e-2, 12.0),
        3 => ([0.0, -1.0, 2.0, 0.0, -2.0, 1.0, 0.0], 1e-2, 2.0),
        4 => ([0.0, 1.0, -4.0, 6.0, -4.0, 1.0, 0.0], 1e-2, 1.0),
        5 => ([-1.0, 4.0, -5.0, 0.0, 5.0, -4.0, 1.0], 5e-2, 2.0),
        6 => ([1.0, -6.0, 15.0, -20.0, 15.0, -6.0, 1.0], 5e-2, 1.0),
        _ => return None,
    };
    Some((c, h, denom * h.powi(order as i32)))
}

/// Derivatives of orders `1..=m_max` (at most 6) of a vector-valued curve at 0.
pub fn curve_derivatives<F>(f: F, m_max: usize) -> Vec<Vec<f64>>
where
    F: Fn(f64) -> Vec<f64>,
{
    let mut cache: Vec<((i32, u64), Vec<f64>)> = Vec::new();
    let mut eval = |k: i32, h: f64| -> Vec<f64> {
        let key = (k, h.to_bits());
        if let Some((_, v)) = cache.iter().find(|(kk, _)| *kk == key) {
            return v.clone();
        }
        let v = f(k as f64 * h);
        cache.push((key, v.clone()));
        v
    };
    (1..=m_max.min(6))
        .map(|order| {
            let (c, h, scale) = stencil(order).expect("order in range");
            let mut acc: Vec<f64> = Vec::new();
            for (i, &ci) in c.iter().enumerate() {
                if ci == 0.0 {
                    continue;
                }
                let v = eval(i as i32 - 3, h);
                if acc.is_empty() {
                    acc = vec![0.0; v.len()];
                }
                for (a, b) in acc.iter_mut().zip(&v) {
                    *a += ci * b;
                }
            }
            acc.iter().map(|a| a / scale).collect()
        })
        .collect()
}
