use std::f64::consts::PI;

use heatcut::cutanalysis::rho_on_p;
use heatcut::heatkernel::{energy_t, heat_kernel};
use heatcut::laplace::{mu_t, newton_remoteness, NewtonDiagram};
use heatcut::{ModelManifold, PolarDirection};
use proptest::prelude::*;

fn sphere_point(m: &ModelManifold, a: f64, b: f64) -> heatcut::Point {
    m.point_projected(vec![a.cos() * b.sin(), a.sin() * b.sin(), b.cos()]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn torus_kernel_symmetric_and_translation_invariant(
        x0 in 0.0..6.0f64, x1 in 0.0..6.0f64, y0 in 0.0..6.0f64, y1 in 0.0..6.0f64, s in 0.0..3.0f64, t in 0.01..1.0f64,
    ) {
        let m = ModelManifold::torus(&[2.0 * PI, 4.0 * PI]).unwrap();
        let x = m.point(vec![x0, x1]).unwrap();
        let y = m.point(vec![y0, y1]).unwrap();
        let a = heat_kernel(&m, t, &x, &y).unwrap().value;
        let b = heat_kernel(&m, t, &y, &x).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-14 * a.max(1e-300));
        let xs = m.point(vec![x0 + s, x1 - s]).unwrap();
        let ys = m.point(vec![y0 + s, y1 - s]).unwrap();
        let c = heat_kernel(&m, t, &xs, &ys).unwrap().value;
        prop_assert!((a - c).abs() <= 1e-12 * a.max(1e-300));
    }

    #[test]
    fn sphere_distance_and_energy_t(a1 in 0.0..6.2f64, b1 in 0.05..3.1f64, a2 in 0.0..6.2f64, b2 in 0.05..3.1f64, t in 0.02..0.5f64) {
        let m = ModelManifold::sphere(2, 1.0).unwrap();
        let x = sphere_point(&m, a1, b1);
        let y = sphere_point(&m, a2, b2);
        let d = m.distance(&x, &y);
        prop_assert!((d - m.distance(&y, &x)).abs() < 1e-14);
        prop_assert!(d <= PI + 1e-12);
        let n = m.north();
        prop_assert!(d <= m.distance(&x, &n) + m.distance(&n, &y) + 1e-12);
        let et = energy_t(&m, t, &x, &y).unwrap().value;
        prop_assert!(et.is_finite());
    }

    #[test]
    fn mu_is_a_probability(y0 in 0.5..5.5f64, y1 in 0.5..5.5f64, t in 0.005..0.05f64) {
        let m = ModelManifold::torus(&[2.0 * PI, 2.0 * PI]).unwrap();
        let x = m.point(vec![0.0, 0.0]).unwrap();
        let y = m.point(vec![y0, y1]).unwrap();
        let mu = mu_t(&m, &x, &y, t, None).unwrap();
        prop_assert!((mu.total() - 1.0).abs() < 1e-12);
        prop_assert!(mu.weights.iter().all(|w| *w >= 0.0));
    }

    #[test]
    fn rho_is_nonpositive_and_quadratic(ang in 0.05..1.5f64, a0 in -2.0..2.0f64, a1 in -2.0..2.0f64, s in 0.1..3.0f64) {
        let m = ModelManifold::torus(&[2.0 * PI, 2.0 * PI]).unwrap();
        let x = m.point(vec![0.3, -0.2]).unwrap();
        let th = PolarDirection { theta: vec![ang.cos(), ang.sin()] };
        if (ang - PI / 4.0).abs() > 1e-3 {
            let r = rho_on_p(&m, &x, &th, &[a0, a1]).unwrap().rho;
            let rs = rho_on_p(&m, &x, &th, &[s * a0, s * a1]).unwrap().rho;
            prop_assert!(r <= 0.0);
            prop_assert!((rs - s * s * r).abs() <= 1e-10 * (1.0 + rs.abs()));
        }
    }

    #[test]
    fn remoteness_invariant_under_coordinate_swap(a in 1u32..4, b in 1u32..4, c in 1u32..3) {
        let exps = vec![vec![2 * a, 0], vec![0, 2 * b], vec![2 * c, 2 * c]];
        let swapped: Vec<Vec<u32>> = exps.iter().map(|e| vec![e[1], e[0]]).collect();
        let r1 = newton_remoteness(&NewtonDiagram::from_exponents(&exps).unwrap()).unwrap();
        let r2 = newton_remoteness(&NewtonDiagram::from_exponents(&swapped).unwrap()).unwrap();
        prop_assert_eq!(r1, r2);
    }
}
