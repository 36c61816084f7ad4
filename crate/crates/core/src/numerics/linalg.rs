pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `a + s b`
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn normalized(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    if n == 0.0 || !n.is_finite() {
        None
    } else {
        Some(scale(a, 1.0 / n))
    }
}

/// Removes from `v` its components along the orthonormal vectors `basis`.
pub fn orthogonalize(v: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut w = v.to_vec();
    // two passes keep the result orthogonal to working precision
    for _ in 0..2 {
        for b in basis {
            let c = dot(&w, b);
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= c * bi;
            }
        }
    }
    w
}

/// Extends the orthonormal set `start` with standard basis vectors of
/// `R^dim` until `count` vectors have been produced past the vectors in `avoid`.
pub fn complete_basis(start: &[Vec<f64>], avoid: &[Vec<f64>], dim: usize, count: usize) -> Vec<Vec<f64>> {
    let mut all: Vec<Vec<f64>> = avoid.to_vec();
    all.extend(start.iter().cloned());
    let mut out: Vec<Vec<f64>> = start.to_vec();
    let mut candidates: Vec<(usize, f64)> = (0..dim)
        .map(|i| {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            (i, norm(&orthogonalize(&e, &all)))
        })
        .collect();
    // most independent axes first, ties by index, for a deterministic frame
    candidates.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    for (i, _) in candidates {
        if out.len() >= count {
            break;
        }
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        let w = orthogonalize(&e, &all);
        if let Some(u) = normalized(&w) {
            if norm(&w) > 1e-8 {
                all.push(u.clone());
                out.push(u);
            }
        }
    }
    out
}

/// Angle-wrapping of a coordinate difference into `[-L/2, L/2]`.
pub fn wrap(delta: f64, period: f64) -> f64 {
    let r = delta - period * (delta / period).round();
    if r > period / 2.0 {
        r - period
    } else if r < -period / 2.0 {
        r + period
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn completion_is_orthonormal() {
        let start = vec![vec![0.6, 0.8, 0.0]];
        let b = complete_basis(&start, &[], 3, 3);
        assert_eq!(b.len(), 3);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((dot(&b[i], &b[j]) - e).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn wrap_is_centered() {
        assert!((wrap(3.0 * std::f64::consts::PI / 2.0, 2.0 * std::f64::consts::PI) + std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(wrap(0.25, 1.0), 0.25);
    }
}
