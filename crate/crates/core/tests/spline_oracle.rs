mod common;

use std::f64::consts::PI;

use common::{adaptive, pv_oracle};
use quasi_herglotz::SplineBasis;

#[test]
fn hilbert_matches_principal_value_quadrature() {
    for order in 2..=4 {
        let basis = SplineBasis::new(0.3, 1.7, 6, order).unwrap();
        let mut worst: f64 = 0.0;
        for n in 0..basis.count() {
            let (lo, hi) = basis.support(n).unwrap();
            let width = hi - lo;
            for k in 0..200 {
                let x = lo - 0.75 * width + 2.5 * width * (k as f64 + 0.37) / 200.0;
                let got = basis.hilbert_eval(n, x).unwrap();
                let want = pv_oracle(&basis, n, x);
                worst = worst.max((got - want).abs());
                assert!((got - want).abs() <= 1e-8, "order {order} n {n} x {x}: {got} vs {want}");
            }
        }
        println!("order {order}: max |closed form - quadrature| = {worst:.2e}");
    }
}

#[test]
fn hilbert_at_knots_matches_quadrature() {
    let basis = SplineBasis::new(-1.0, 2.0, 5, 2).unwrap();
    for n in 0..basis.count() {
        let (lo, _) = basis.support(n).unwrap();
        for k in 0..=2 {
            let x = lo + k as f64 * basis.spacing();
            let got = basis.hilbert_eval(n, x).unwrap();
            assert!((got - pv_oracle(&basis, n, x)).abs() <= 1e-8, "n {n} knot {k}");
        }
    }
}

#[test]
fn far_field_decays_like_a_point_mass() {
    for order in 2..=5 {
        let basis = SplineBasis::new(0.0, 1.0, 8, order).unwrap();
        for n in 0..basis.count() {
            let area = basis.moment(n, 0).unwrap();
            for x in [1e3, -1e3] {
                let want = -area / (PI * x);
                let got = basis.hilbert_eval(n, x).unwrap();
                assert!(((got - want) / want).abs() <= 0.01, "order {order} n {n} x {x}");
            }
        }
    }
}

#[test]
fn moments_match_quadrature() {
    let basis = SplineBasis::new(0.4, 2.2, 7, 3).unwrap();
    for n in 0..basis.count() {
        let (lo, hi) = basis.support(n).unwrap();
        for k in [-3, -2, -1, 0, 1, 2, 5] {
            let f = |x: f64| basis.eval(n, x).unwrap() * x.powi(k);
            let mut want = 0.0;
            for j in 0..basis.order() {
                let a = lo + j as f64 * basis.spacing();
                want += adaptive(&f, a, (a + basis.spacing()).min(hi), 1e-15, 30);
            }
            let got = basis.moment(n, k).unwrap();
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "n {n} k {k}: {got} vs {want}");
        }
    }
}
