use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * p - pm1) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let c = 0.5 * (b + a);
    let h = 0.5 * (b - a);
    (x.iter().map(|t| c + h * t).collect(), w.iter().map(|v| v * h).collect())
}

/// Composite Gauss–Legendre over consecutive breakpoints.
pub fn composite_gauss_legendre(breaks: &[f64], per_panel: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::new();
    let mut ws = Vec::new();
    for pair in breaks.windows(2) {
        let (x, w) = gauss_legendre_on(per_panel, pair[0], pair[1]);
        xs.extend(x);
        ws.extend(w);
    }
    (xs, ws)
}

/// Trapezoid nodes and weights with `n >= 2` points on `[a, b]`.
pub fn trapezoid(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let h = (b - a) / (n - 1) as f64;
    let x = (0..n).map(|i| a + h * i as f64).collect();
    let w = (0..n)
        .map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h })
        .collect();
    (x, w)
}

const GK_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * GK_WK[7];
    let mut g = fc * GK_WG[3];
    for i in 0..7 {
        let dx = h * GK_X[i];
        let s = f(c - dx) + f(c + dx);
        k += GK_WK[i] * s;
        if i % 2 == 1 {
            g += GK_WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integration with a global error target.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> (f64, f64) {
    let mut segs: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (v, e) = gk15(&mut f, a, b);
    segs.push((a, b, v, e));
    for _ in 0..2000 {
        let total: f64 = segs.iter().map(|s| s.2).sum();
        let err: f64 = segs.iter().map(|s| s.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            break;
        }
        let (imax, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .unwrap();
        let (lo, hi, _, _) = segs.swap_remove(imax);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        segs.push((lo, mid, v1, e1));
        segs.push((mid, hi, v2, e2));
    }
    segs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    (segs.iter().map(|s| s.2).sum(), segs.iter().map(|s| s.3).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in [1usize, 2, 5, 16, 64] {
            let (x, w) = gauss_legendre(n);
            let deg = 2 * n - 1;
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((s - exact).abs() < 1e-13, "n={n} {s} {exact}");
        }
    }

    #[test]
    fn adaptive_gaussian() {
        let (v, _) = integrate(|x| (-x * x).exp(), -10.0, 10.0, 1e-14, 1e-13);
        assert!((v - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn adaptive_handles_kinks() {
        let (v, _) = integrate(|x: f64| x.abs().sqrt(), -1.0, 1.0, 1e-12, 1e-12);
        assert!((v - 4.0 / 3.0).abs() < 1e-9);
    }
}
