use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numerics::quad::integrate;

type Q = Ratio<i128>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NewtonDiagram {
    pub n: usize,
    /// Exponent multi-indices with their coefficients.
    pub terms: Vec<(Vec<u32>, f64)>,
}

impl NewtonDiagram {
    pub fn new(terms: Vec<(Vec<u32>, f64)>) -> Result<Self> {
        let n = terms.first().map(|t| t.0.len()).ok_or_else(|| Error::Diagram("empty diagram".into()))?;
        if n == 0 {
            return Err(Error::Diagram("multi-indices must be nonempty".into()));
        }
        if terms.iter().any(|t| t.0.len() != n) {
            return Err(Error::Diagram("multi-indices of different lengths".into()));
        }
        if terms.iter().any(|t| t.0.iter().all(|a| *a == 0)) {
            return Err(Error::Diagram("constant term present".into()));
        }
        for (a, c) in &terms {
            let pure = a.iter().filter(|v| **v > 0).count() == 1;
            if pure && (*c <= 0.0 || a.iter().sum::<u32>() % 2 == 1) {
                return Err(Error::Diagram(format!("pure power {a:?} must be even with a positive coefficient")));
            }
        }
        for j in 0..n {
            if terms.iter().all(|t| t.0[j] == 0) {
                return Err(Error::Diagram(format!("coordinate u_{} never appears; the integral is unbounded", j + 1)));
            }
        }
        Ok(NewtonDiagram { n, terms })
    }

    /// Diagram with unit coefficients.
    pub fn from_exponents(exps: &[Vec<u32>]) -> Result<Self> {
        Self::new(exps.iter().map(|a| (a.clone(), 1.0)).collect())
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(a, c)| c * a.iter().zip(u).map(|(k, v)| v.powi(*k as i32)).product::<f64>())
            .sum()
    }

    fn points(&self) -> Vec<Vec<i128>> {
        self.terms.iter().map(|t| t.0.iter().map(|v| *v as i128).collect()).collect()
    }
}

/// Minimise `cᵀx` subject to `Ax = b`, `x ≥ 0` in exact arithmetic (two-phase
/// simplex, Bland's rule). `None` when infeasible.
fn simplex(a: &[Vec<Q>], b: &[Q], c: &[Q]) -> Result<Option<(Q, Vec<Q>)>> {
    let m = a.len();
    let nv = c.len();
    let width = nv + m + 1;
    let mut t: Vec<Vec<Q>> = Vec::with_capacity(m);
    for i in 0..m {
        let flip = b[i].is_negative();
        let mut row: Vec<Q> = a[i].iter().map(|v| if flip { -*v } else { *v }).collect();
        row.extend((0..m).map(|k| if k == i { Q::one() } else { Q::zero() }));
        row.push(if flip { -b[i] } else { b[i] });
        t.push(row);
    }
    let mut basis: Vec<usize> = (nv..nv + m).collect();

    fn pivot(t: &mut [Vec<Q>], basis: &mut [usize], r: usize, col: usize) {
        let p = t[r][col];
        for v in t[r].iter_mut() {
            *v /= p;
        }
        let row = t[r].clone();
        for (i, other) in t.iter_mut().enumerate() {
            if i != r && !other[col].is_zero() {
                let f = other[col];
                for (o, rv) in other.iter_mut().zip(&row) {
                    *o -= f * rv;
                }
            }
        }
        basis[r] = col;
    }

    fn run(t: &mut [Vec<Q>], basis: &mut [usize], cost: &[Q], allowed: usize) -> Result<()> {
        let last = t[0].len() - 1;
        for _ in 0..10_000 {
            let entering = (0..allowed).find(|&j| {
                let z: Q = basis.iter().zip(t.iter()).map(|(bi, row)| cost[*bi] * row[j]).sum();
                cost[j] - z < Q::zero()
            });
            let Some(col) = entering else { return Ok(()) };
            let mut best: Option<(Q, usize, usize)> = None;
            for (i, row) in t.iter().enumerate() {
                if row[col] > Q::zero() {
                    let ratio = row[last] / row[col];
                    let better = match best {
                        None => true,
                        Some((br, _, bb)) => ratio < br || (ratio == br && basis[i] < bb),
                    };
                    if better {
                        best = Some((ratio, i, basis[i]));
                    }
                }
            }
            let Some((_, r, _)) = best else {
                return Err(Error::Diagram("unbounded linear program".into()));
            };
            pivot(t, basis, r, col);
        }
        Err(Error::InternalFault("simplex iteration limit".into()))
    }

    let mut phase1 = vec![Q::zero(); width - 1];
    for v in phase1.iter_mut().skip(nv) {
        *v = Q::one();
    }
    run(&mut t, &mut basis, &phase1, width - 1)?;
    let infeas: Q = basis.iter().zip(&t).map(|(bi, row)| phase1[*bi] * row[width - 1]).sum();
    if infeas > Q::zero() {
        return Ok(None);
    }
    let mut r = 0;
    while r < t.len() {
        if basis[r] >= nv {
            if let Some(col) = (0..nv).find(|&j| !t[r][j].is_zero()) {
                pivot(&mut t, &mut basis, r, col);
            } else {
                t.remove(r);
                basis.remove(r);
                continue;
            }
        }
        r += 1;
    }
    let mut cost = c.to_vec();
    cost.extend(std::iter::repeat_n(Q::zero(), m));
    if !t.is_empty() {
        run(&mut t, &mut basis, &cost, nv)?;
    }
    let mut x = vec![Q::zero(); nv];
    for (bi, row) in basis.iter().zip(&t) {
        if *bi < nv {
            x[*bi] = row[width - 1];
        }
    }
    let val = x.iter().zip(c).map(|(a, b)| *a * b).sum();
    Ok(Some((val, x)))
}

fn q(v: i128) -> Q {
    Q::from_integer(v)
}

/// `min_λ max_j Σ_i λ_i α_{ij}` over the probability simplex.
fn diagonal_hit(points: &[Vec<i128>], n: usize) -> Result<Q> {
    let m = points.len();
    let nv = m + 1 + n;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for j in 0..n {
        let mut row = vec![Q::zero(); nv];
        for (i, p) in points.iter().enumerate() {
            row[i] = q(p[j]);
        }
        row[m] = q(-1);
        row[m + 1 + j] = Q::one();
        a.push(row);
        b.push(Q::zero());
    }
    let mut row = vec![Q::zero(); nv];
    for v in row.iter_mut().take(m) {
        *v = Q::one();
    }
    a.push(row);
    b.push(Q::one());
    let mut c = vec![Q::zero(); nv];
    c[m] = Q::one();
    simplex(&a, &b, &c)?.map(|r| r.0).ok_or_else(|| Error::InternalFault("remoteness LP infeasible".into()))
}

/// Whether `q − δd` stays in the Newton polyhedron for some `δ > 0`.
fn two_sided(points: &[Vec<i128>], n: usize, qv: &[Q], d: &[Q]) -> Result<bool> {
    let m = points.len();
    let nv = m + 1 + n + 1;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for j in 0..n {
        let mut row = vec![Q::zero(); nv];
        for (i, p) in points.iter().enumerate() {
            row[i] = q(p[j]);
        }
        row[m] = d[j];
        row[m + 1 + j] = Q::one();
        a.push(row);
        b.push(qv[j]);
    }
    let mut row = vec![Q::zero(); nv];
    for v in row.iter_mut().take(m) {
        *v = Q::one();
    }
    a.push(row);
    b.push(Q::one());
    let mut row = vec![Q::zero(); nv];
    row[m] = Q::one();
    row[nv - 1] = Q::one();
    a.push(row);
    b.push(Q::one());
    let mut c = vec![Q::zero(); nv];
    c[m] = q(-1);
    Ok(match simplex(&a, &b, &c)? {
        Some((v, _)) => v < Q::zero(),
        None => false,
    })
}

fn rank(rows: &[Vec<Q>]) -> usize {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c] / m[r][c];
                let pr = m[r].clone();
                for (a, b) in m[i].iter_mut().zip(&pr) {
                    *a -= f * b;
                }
            }
        }
        r += 1;
    }
    r
}

pub(crate) fn ser_ratio<S: Serializer>(r: &Ratio<i64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Remoteness {
    #[serde(serialize_with = "ser_ratio")]
    pub p: Ratio<i64>,
    pub k_mult: usize,
    pub face_dim: usize,
}

pub fn newton_remoteness(d: &NewtonDiagram) -> Result<Remoteness> {
    let pts = d.points();
    let n = d.n;
    let r0 = diagonal_hit(&pts, n)?;
    if !r0.is_positive() {
        return Err(Error::Diagram("diagonal meets the polyhedron at the origin".into()));
    }
    let qv = vec![r0; n];
    let mut dirs: Vec<Vec<Q>> = pts.iter().map(|p| p.iter().map(|v| q(*v) - r0).collect()).collect();
    dirs.extend((0..n).map(|j| (0..n).map(|i| if i == j { Q::one() } else { Q::zero() }).collect()));
    let mut accepted = Vec::new();
    for dv in dirs {
        if dv.iter().any(|v| !v.is_zero()) && two_sided(&pts, n, &qv, &dv)? {
            accepted.push(dv);
        }
    }
    let face_dim = rank(&accepted);
    let p = Ratio::new(*r0.denom() as i64, *r0.numer() as i64);
    Ok(Remoteness { p, k_mult: (n as i64 - 1 - face_dim as i64).max(0) as usize, face_dim })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaplaceLeadingTerm {
    /// Exponent `α` of `t^α |log t|^m`.
    #[serde(serialize_with = "ser_ratio")]
    pub alpha: Ratio<i64>,
    pub m: usize,
    /// Constant `c` with `φ = 1`; computed by quadrature for `n ≤ 2`.
    pub c: Option<f64>,
}

/// `∫ e^{−g(u)/t} du` over a box around the origin, nested adaptive quadrature.
pub fn phase_integral(d: &NewtonDiagram, t: f64) -> Result<f64> {
    let mut bounds = Vec::with_capacity(d.n);
    for j in 0..d.n {
        let l = d
            .terms
            .iter()
            .filter(|(a, _)| a[j] > 0 && a.iter().filter(|v| **v > 0).count() == 1)
            .map(|(a, c)| (60.0 * t / c).powf(1.0 / a[j] as f64))
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
        bounds.push(l.ok_or_else(|| Error::Unsupported(format!("no pure power in u_{}", j + 1)))?);
    }
    fn nested(d: &NewtonDiagram, t: f64, bounds: &[f64], prefix: &mut Vec<f64>) -> f64 {
        let k = prefix.len();
        let l = bounds[k];
        let mut f = |u: f64| {
            prefix.push(u);
            let v = if prefix.len() == bounds.len() { (-d.eval(prefix) / t).exp() } else { nested(d, t, bounds, prefix) };
            prefix.pop();
            v
        };
        integrate(&mut f, -l, 0.0, 0.0, 1e-11).0 + integrate(&mut f, 0.0, l, 0.0, 1e-11).0
    }
    Ok(nested(d, t, &bounds, &mut Vec::new()))
}

pub fn laplace_leading_term(d: &NewtonDiagram) -> Result<LaplaceLeadingTerm> {
    let r = newton_remoteness(d)?;
    let alpha = r.p;
    let a = *alpha.numer() as f64 / *alpha.denom() as f64;
    let c = if d.n <= 2 {
        let (t1, t2) = (1e-6f64, 1e-8f64);
        let r1 = phase_integral(d, t1)? / t1.powf(a);
        let r2 = phase_integral(d, t2)? / t2.powf(a);
        let (l1, l2) = (t1.ln().abs(), t2.ln().abs());
        Some(match r.k_mult {
            0 => r2,
            m => (r2 - r1) / (l2.powi(m as i32) - l1.powi(m as i32)),
        })
    } else {
        None
    };
    Ok(LaplaceLeadingTerm { alpha, m: r.k_mult, c })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Nondegeneracy {
    pub nondegenerate: bool,
    /// Always true: the check samples and refines, it does not prove.
    pub heuristic: bool,
    /// Face exponents and a point of `(ℝ∖0)ⁿ` where all `∂g_γ/∂u_j` vanish.
    pub witness: Option<(Vec<Vec<u32>>, Vec<f64>)>,
    pub min_gradient_norm2: f64,
}

/// Compact faces of dimension ≥ 1, as index sets.
fn compact_faces(pts: &[Vec<i128>], n: usize) -> Result<Vec<Vec<usize>>> {
    let m = pts.len();
    let diff = |a: usize, b: usize| -> Vec<Q> { (0..n).map(|j| q(pts[a][j] - pts[b][j])).collect() };
    let mut seen: Vec<Vec<usize>> = Vec::new();
    let mut faces = Vec::new();
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            subsets.push(vec![i, j]);
            if n == 3 {
                for k in j + 1..m {
                    subsets.push(vec![i, j, k]);
                }
            }
        }
    }
    for s in subsets {
        let base: Vec<Vec<Q>> = s[1..].iter().map(|&k| diff(k, s[0])).collect();
        let r = rank(&base);
        if r != s.len() - 1 {
            continue;
        }
        let span: Vec<usize> = (0..m)
            .filter(|&k| {
                let mut rows = base.clone();
                rows.push(diff(k, s[0]));
                rank(&rows) == r
            })
            .collect();
        if seen.contains(&span) {
            continue;
        }
        seen.push(span.clone());
        // find w ≥ 1 orthogonal to the span, strictly separating the rest
        let others: Vec<usize> = (0..m).filter(|k| !span.contains(k)).collect();
        let nv = n + 1 + others.len() + 1;
        let mut a = Vec::new();
        let mut b = Vec::new();
        for row_d in &base {
            let mut row = vec![Q::zero(); nv];
            row[..n].copy_from_slice(row_d);
            a.push(row);
            b.push(-row_d.iter().sum::<Q>());
        }
        for (oi, &k) in others.iter().enumerate() {
            let dk = diff(k, s[0]);
            let mut row = vec![Q::zero(); nv];
            row[..n].copy_from_slice(&dk);
            row[n] = q(-1);
            row[n + 1 + oi] = q(-1);
            a.push(row);
            b.push(-dk.iter().sum::<Q>());
        }
        let mut row = vec![Q::zero(); nv];
        row[n] = Q::one();
        row[nv - 1] = Q::one();
        a.push(row);
        b.push(Q::one());
        let mut c = vec![Q::zero(); nv];
        c[n] = q(-1);
        if let Some((v, _)) = simplex(&a, &b, &c)? {
            if v < Q::zero() {
                faces.push(span);
            }
        }
    }
    Ok(faces)
}

fn unit_grid(n: usize) -> Vec<Vec<f64>> {
    use std::f64::consts::PI;
    match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..720).map(|i| {
            let a = 2.0 * PI * (i as f64 + 0.5) / 720.0;
            vec![a.cos(), a.sin()]
        }).collect(),
        _ => {
            let mut out = Vec::new();
            for i in 0..60 {
                let th = PI * (i as f64 + 0.5) / 60.0;
                for j in 0..120 {
                    let ph = 2.0 * PI * (j as f64 + 0.5) / 120.0;
                    out.push(vec![th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]);
                }
            }
            out
        }
    }
}

/// Sampling check that `∂g_γ/∂u_j` have no common zero in `(ℝ∖0)ⁿ` on
/// every compact face `γ` of dimension at least one.
pub fn nondegeneracy_check(d: &NewtonDiagram) -> Result<Nondegeneracy> {
    let total = d.terms.iter().map(|t| t.0.iter().sum::<u32>()).max().unwrap_or(0);
    if d.n > 3 || total > 12 {
        return Err(Error::Unsupported("nondegeneracy check needs n ≤ 3 and degree ≤ 12".into()));
    }
    let faces = compact_faces(&d.points(), d.n)?;
    let mut best = f64::INFINITY;
    let mut witness = None;
    for face in faces {
        let terms: Vec<&(Vec<u32>, f64)> = face.iter().map(|&i| &d.terms[i]).collect();
        let obj = |u: &[f64]| -> f64 {
            (0..d.n)
                .map(|j| {
                    terms
                        .iter()
                        .filter(|(a, _)| a[j] > 0)
                        .map(|(a, c)| {
                            c * a[j] as f64
                                * a.iter().zip(u).enumerate().map(|(k, (e, v))| v.powi(*e as i32 - (k == j) as i32)).product::<f64>()
                        })
                        .sum::<f64>()
                        .powi(2)
                })
                .sum()
        };
        let mut cands: Vec<(f64, Vec<f64>)> = unit_grid(d.n).into_iter().map(|u| (obj(&u), u)).collect();
        cands.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for (_, start) in cands.into_iter().take(8) {
            let mut u = start;
            let mut f = obj(&u);
            let mut step = 0.05;
            while step > 1e-13 {
                let mut improved = false;
                for j in 0..d.n {
                    for sgn in [-1.0, 1.0] {
                        let mut v = u.clone();
                        v[j] += sgn * step;
                        let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                        v.iter_mut().for_each(|a| *a /= nv);
                        let fv = obj(&v);
                        if fv < f {
                            u = v;
                            f = fv;
                            improved = true;
                        }
                    }
                }
                if !improved {
                    step *= 0.5;
                }
            }
            let off_axes = u.iter().all(|v| v.abs() > 1e-3);
            if off_axes && f < best {
                best = f;
                if f < 1e-10 {
                    witness = Some((terms.iter().map(|t| t.0.clone()).collect(), u.clone()));
                }
            }
        }
    }
    Ok(Nondegeneracy { nondegenerate: witness.is_none(), heuristic: true, witness, min_gradient_norm2: best })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(e: &[&[u32]]) -> NewtonDiagram {
        NewtonDiagram::from_exponents(&e.iter().map(|a| a.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn remoteness_examples() {
        let r = newton_remoteness(&diag(&[&[2, 0], &[0, 2]])).unwrap();
        assert_eq!((r.p, r.k_mult, r.face_dim), (Ratio::from_integer(1), 0, 1));
        let r = newton_remoteness(&diag(&[&[2]])).unwrap();
        assert_eq!((r.p, r.k_mult), (Ratio::new(1, 2), 0));
        let r = newton_remoteness(&diag(&[&[2, 2], &[6, 0], &[0, 6]])).unwrap();
        assert_eq!((r.p, r.k_mult, r.face_dim), (Ratio::new(1, 2), 1, 0));
        let r = newton_remoteness(&diag(&[&[2, 0, 0], &[0, 2, 0], &[0, 0, 2]])).unwrap();
        assert_eq!((r.p, r.k_mult), (Ratio::new(3, 2), 0));
        let r = newton_remoteness(&diag(&[&[2, 0], &[0, 4]])).unwrap();
        assert_eq!(r.p, Ratio::new(3, 4));
    }

    #[test]
    fn remoteness_invariances() {
        let base = newton_remoteness(&diag(&[&[2, 2], &[6, 0], &[0, 6]])).unwrap();
        let perm = newton_remoteness(&diag(&[&[0, 6], &[2, 2], &[6, 0]])).unwrap();
        assert_eq!(base, perm);
        let swapped = newton_remoteness(&diag(&[&[2, 2], &[0, 6], &[6, 0]])).unwrap();
        assert_eq!(base, swapped);
        let inner = newton_remoteness(&diag(&[&[2, 2], &[6, 0], &[0, 6], &[3, 3], &[4, 4]])).unwrap();
        assert_eq!(base, inner);
    }

    #[test]
    fn diagram_errors() {
        assert!(NewtonDiagram::from_exponents(&[]).is_err());
        assert!(NewtonDiagram::from_exponents(&[vec![2, 0]]).is_err());
        assert!(NewtonDiagram::from_exponents(&[vec![0, 0], vec![2, 2]]).is_err());
    }

    #[test]
    fn leading_constants() {
        let l = laplace_leading_term(&diag(&[&[2, 0], &[0, 2]])).unwrap();
        assert!((l.c.unwrap() - std::f64::consts::PI).abs() < 1e-6);
        let l = laplace_leading_term(&diag(&[&[2]])).unwrap();
        assert!((l.c.unwrap() - std::f64::consts::PI.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn nondegeneracy_examples() {
        assert!(nondegeneracy_check(&diag(&[&[2, 0], &[0, 2]])).unwrap().nondegenerate);
        assert!(nondegeneracy_check(&diag(&[&[2, 0], &[0, 4]])).unwrap().nondegenerate);
        let g = NewtonDiagram::new(vec![(vec![2, 0], 1.0), (vec![1, 1], -2.0), (vec![0, 2], 1.0)]).unwrap();
        let r = nondegeneracy_check(&g).unwrap();
        assert!(!r.nondegenerate);
        let (_, u) = r.witness.unwrap();
        assert!((u[0] - u[1]).abs() < 1e-4);
        assert!(nondegeneracy_check(&diag(&[&[2, 0, 0], &[0, 2, 0], &[0, 0, 4]])).unwrap().nondegenerate);
    }
}
