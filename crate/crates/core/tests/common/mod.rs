#![allow(dead_code, clippy::excessive_precision)]

use std::f64::consts::PI;

use quasi_herglotz::SplineBasis;

const XK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Gauss–Kronrod 7/15 rule: (estimate, error estimate).
fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let (f1, f2) = (f(c - h * XK[j]), f(c + h * XK[j]));
        kron += WK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

pub fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
    let (v, err) = gk15(f, a, b);
    if err <= tol || depth == 0 {
        return v;
    }
    let m = 0.5 * (a + b);
    adaptive(f, a, m, 0.5 * tol, depth - 1) + adaptive(f, m, b, 0.5 * tol, depth - 1)
}

/// `(1/π) p.v.∫ p_n(ξ)/(ξ - x) dξ` by singularity subtraction and adaptive
/// quadrature between knots.
pub fn pv_oracle(basis: &SplineBasis, n: usize, x: f64) -> f64 {
    let (lo, hi) = basis.support(n).unwrap();
    let px = basis.eval(n, x).unwrap();
    let inside = lo < x && x < hi;
    let f = |xi: f64| {
        let p = basis.eval(n, xi).unwrap();
        if inside {
            if xi == x {
                0.0
            } else {
                (p - px) / (xi - x)
            }
        } else {
            p / (xi - x)
        }
    };
    let mut cuts: Vec<f64> = (0..=basis.order()).map(|k| lo + k as f64 * basis.spacing()).collect();
    cuts[basis.order()] = hi;
    if inside {
        cuts.push(x);
        cuts.sort_by(f64::total_cmp);
    }
    let mut total = 0.0;
    for w in cuts.windows(2) {
        if w[1] > w[0] {
            total += adaptive(&f, w[0], w[1], 1e-14, 40);
        }
    }
    if inside {
        total += px * ((hi - x) / (x - lo)).ln();
    }
    total / PI
}
