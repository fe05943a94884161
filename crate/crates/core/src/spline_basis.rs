//! Uniform B-spline families with closed-form Hilbert transforms and power moments.
//!
//! A basis of order `m` (polynomial degree `m - 1`) with `N` functions on
//! `[lo, hi]` uses `N + m` equidistant breakpoints
//! `ξ_k = lo + k δ`, `δ = (hi - lo) / (N + m - 1)`, so every function is
//! supported inside `[lo, hi]`. For `m = 2` this gives `N` unit-peak hats with
//! peaks at `lo + k δ`, `k = 1..=N`. Functions are normalized to a partition
//! of unity, hence each has area `δ`.
//!
//! Indices are zero-based.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Switch to the multipole expansion once the evaluation point is this many
/// spacings (per unit of order) away from the support center.
const FAR_FIELD_RADIUS_PER_ORDER: f64 = 8.0;
/// Number of even central moments kept in the multipole expansion.
const FAR_FIELD_TERMS: usize = 9;
/// Cells with `δ/|c|` below this use the binomial series for moments.
const SERIES_RATIO: f64 = 0.25;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "BasisRecord", into = "BasisRecord")]
pub struct SplineBasis {
    order: usize,
    lo: f64,
    hi: f64,
    count: usize,
    spacing: f64,
    /// `cells[r][i]`: coefficient of `u^i` of the function on its `r`-th cell,
    /// `u ∈ [0, 1)` the local cell coordinate.
    cells: Vec<Vec<f64>>,
    /// Even central moments of the cardinal B-spline (area one, unit spacing).
    central_moments: Vec<f64>,
    /// `(-1)^j C(m, j) / (m - 1)!`, the truncated-power weights.
    weights: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct BasisRecord {
    lo: f64,
    hi: f64,
    count: usize,
    order: usize,
}

impl TryFrom<BasisRecord> for SplineBasis {
    type Error = Error;

    fn try_from(r: BasisRecord) -> Result<Self> {
        SplineBasis::new(r.lo, r.hi, r.count, r.order)
    }
}

impl From<SplineBasis> for BasisRecord {
    fn from(b: SplineBasis) -> Self {
        BasisRecord { lo: b.lo, hi: b.hi, count: b.count, order: b.order }
    }
}

impl PartialEq for SplineBasis {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order
            && self.count == other.count
            && self.lo == other.lo
            && self.hi == other.hi
    }
}

/// Builds `count` uniform B-splines of the given order living on `[lo, hi]`.
pub fn make_uniform_basis(lo: f64, hi: f64, count: usize, order: usize) -> Result<SplineBasis> {
    SplineBasis::new(lo, hi, count, order)
}

impl SplineBasis {
    pub fn new(lo: f64, hi: f64, count: usize, order: usize) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(invalid(format!("non-finite basis bounds [{lo}, {hi}]")));
        }
        if hi <= lo {
            return Err(invalid(format!("empty basis support [{lo}, {hi}]")));
        }
        if count < 1 {
            return Err(invalid("basis needs at least one function"));
        }
        if order < 2 {
            return Err(invalid(format!("B-spline order must be >= 2, got {order}")));
        }
        let spacing = (hi - lo) / (count + order - 1) as f64;
        if spacing <= 0.0 || !spacing.is_finite() {
            return Err(invalid("degenerate breakpoint spacing"));
        }
        let fact = factorial(order - 1);
        let weights = (0..=order)
            .map(|j| sign(j) * binomial(order, j) / fact)
            .collect();
        Ok(Self {
            order,
            lo,
            hi,
            count,
            spacing,
            cells: (0..order).map(|r| cell_polynomial(order, r)).collect(),
            central_moments: cardinal_central_moments(order, FAR_FIELD_TERMS),
            weights,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// The interval `[lo, hi]` covered by the whole family.
    pub fn bounds(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn breakpoint(&self, k: usize) -> f64 {
        if k + 1 == self.count + self.order {
            self.hi
        } else {
            self.lo + k as f64 * self.spacing
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        (0..self.count + self.order).map(|k| self.breakpoint(k)).collect()
    }

    /// Closed support `[ξ_n, ξ_{n+m}]` of function `n`.
    pub fn support(&self, n: usize) -> Result<(f64, f64)> {
        self.check(n)?;
        Ok((self.breakpoint(n), self.breakpoint(n + self.order)))
    }

    /// Center of the support of function `n` (its symmetry axis).
    pub fn center(&self, n: usize) -> Result<f64> {
        let (a, b) = self.support(n)?;
        Ok(0.5 * (a + b))
    }

    fn check(&self, n: usize) -> Result<()> {
        if n >= self.count {
            Err(Error::IndexOutOfRange { index: n, count: self.count })
        } else {
            Ok(())
        }
    }

    /// Value of function `n` at `x` (Cox–de Boor recurrence).
    pub fn eval(&self, n: usize, x: f64) -> Result<f64> {
        self.check(n)?;
        Ok(self.value(n, x))
    }

    pub(crate) fn value(&self, n: usize, x: f64) -> f64 {
        let m = self.order;
        let u = (x - self.breakpoint(n)) / self.spacing;
        if !(u >= 0.0 && u < m as f64) {
            return 0.0;
        }
        let cell = (u.floor() as usize).min(m - 1);
        // Order-1 pieces are indicator functions of the unit cells.
        let mut basis = vec![0.0; m];
        basis[cell] = 1.0;
        for d in 2..=m {
            let denom = (d - 1) as f64;
            for k in 0..=(m - d) {
                let left = (u - k as f64) / denom * basis[k];
                let right = ((k + d) as f64 - u) / denom * basis[k + 1];
                basis[k] = left + right;
            }
        }
        basis[0]
    }

    /// `(1/π) p.v.∫ p_n(ξ) / (ξ - x) dξ`.
    pub fn hilbert_eval(&self, n: usize, x: f64) -> Result<f64> {
        self.check(n)?;
        if !x.is_finite() {
            return Err(invalid(format!("non-finite evaluation point {x}")));
        }
        Ok(self.hilbert(n, x))
    }

    pub(crate) fn hilbert(&self, n: usize, x: f64) -> f64 {
        let m = self.order;
        let u = (x - self.breakpoint(n)) / self.spacing;
        let v = u - 0.5 * m as f64;
        if v.abs() >= FAR_FIELD_RADIUS_PER_ORDER * m as f64 {
            return self.multipole(Complex64::new(v, 0.0)).re;
        }
        let mut acc = 0.0;
        for (j, w) in self.weights.iter().enumerate() {
            let t = u - j as f64;
            if t != 0.0 {
                acc += w * t.powi(m as i32 - 1) * t.abs().ln();
            }
        }
        -acc / PI
    }

    /// `(1/π) ∫ p_n(ξ) / (ξ - z) dξ` for `Im z > 0`. Its boundary limit is
    /// `hilbert_eval(n, x) + i eval(n, x)`.
    pub fn cauchy_eval(&self, n: usize, z: Complex64) -> Result<Complex64> {
        self.check(n)?;
        if !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::Domain(format!("Cauchy transform needs Im z > 0, got {z}")));
        }
        Ok(self.cauchy(n, z))
    }

    pub(crate) fn cauchy(&self, n: usize, z: Complex64) -> Complex64 {
        let m = self.order;
        let w = (z - self.breakpoint(n)) / self.spacing;
        let v = w - 0.5 * m as f64;
        if v.norm() >= FAR_FIELD_RADIUS_PER_ORDER * m as f64 {
            return self.multipole(v);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, weight) in self.weights.iter().enumerate() {
            let t = w - j as f64;
            acc += *weight * t.powi(m as i32 - 1) * (-t).ln();
        }
        -acc / PI
    }

    /// `-(1/π) Σ_k M_k / v^{k+1}` with `v` measured from the support center
    /// in units of the spacing.
    fn multipole(&self, v: Complex64) -> Complex64 {
        let inv = v.inv();
        let inv2 = inv * inv;
        let mut pow = inv;
        let mut acc = Complex64::new(0.0, 0.0);
        for mk in &self.central_moments {
            acc += *mk * pow;
            pow *= inv2;
        }
        -acc / PI
    }

    /// `∫ x^k p_n(x) dx`, in closed form.
    pub fn moment(&self, n: usize, k: i32) -> Result<f64> {
        let (a, b) = self.support(n)?;
        if k < 0 && a <= 0.0 && b >= 0.0 {
            return Err(Error::DivergentMoment { power: k, lo: a, hi: b });
        }
        let delta = self.spacing;
        let mut total = 0.0;
        for (r, poly) in self.cells.iter().enumerate() {
            let c = self.breakpoint(n + r);
            let cell: f64 = if c == 0.0 {
                poly.iter()
                    .enumerate()
                    .map(|(i, coef)| coef * delta.powi(k) / (k + i as i32 + 1) as f64)
                    .sum()
            } else if delta <= SERIES_RATIO * c.abs() {
                cell_moment_series(poly, c, delta, k)
            } else {
                // level[j] holds ∫_0^1 (c + δu)^{k+j} u^i du for the current i.
                let mut level: Vec<f64> = (0..poly.len())
                    .map(|j| power_cell_integral(c, delta, k + j as i32))
                    .collect();
                let mut cell = poly[0] * level[0];
                for (i, coef) in poly.iter().enumerate().skip(1) {
                    for j in 0..level.len() - i {
                        level[j] = (level[j + 1] - c * level[j]) / delta;
                    }
                    cell += coef * level[0];
                }
                cell
            };
            total += delta * cell;
        }
        Ok(total)
    }
}

/// `∫_0^1 P(u) (c + δu)^k du` by the binomial series of `(1 + (δ/c) u)^k`.
fn cell_moment_series(poly: &[f64], c: f64, delta: f64, k: i32) -> f64 {
    let r = delta / c;
    let mut acc = 0.0;
    let mut g = 1.0;
    for j in 0..400 {
        let term: f64 = g * poly
            .iter()
            .enumerate()
            .map(|(i, coef)| coef / (i + j + 1) as f64)
            .sum::<f64>();
        acc += term;
        if term.abs() <= 1e-18 * acc.abs() || g == 0.0 {
            break;
        }
        g *= r * (k - j as i32) as f64 / (j + 1) as f64;
    }
    c.powi(k) * acc
}

/// `∫_0^1 (c + δu)^k du`.
fn power_cell_integral(c: f64, delta: f64, k: i32) -> f64 {
    let crosses = c <= 0.0 && c + delta >= 0.0;
    if crosses {
        debug_assert!(k >= 0);
        let e = k + 1;
        return ((c + delta).powi(e) - c.powi(e)) / (e as f64 * delta);
    }
    let ratio = (delta / c).ln_1p();
    if k == -1 {
        ratio / delta
    } else {
        let e = (k + 1) as f64;
        c.powi(k + 1) * (e * ratio).exp_m1() / (e * delta)
    }
}

fn sign(j: usize) -> f64 {
    if j.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Coefficients in `u` of the order-`m` cardinal B-spline on cell `r`,
/// from its truncated-power form `Σ_j (-1)^j C(m,j) (u + r - j)_+^{m-1} / (m-1)!`.
fn cell_polynomial(m: usize, r: usize) -> Vec<f64> {
    let fact = factorial(m - 1);
    (0..m)
        .map(|i| {
            let s: f64 = (0..=r)
                .map(|j| sign(j) * binomial(m, j) * ((r - j) as f64).powi((m - 1 - i) as i32))
                .sum();
            binomial(m - 1, i) * s / fact
        })
        .collect()
}

/// Even central moments `E[s^{2k}]`, `k = 0..terms`, of the cardinal B-spline
/// of order `m` (sum of `m` independent uniforms on `[-1/2, 1/2]`).
fn cardinal_central_moments(m: usize, terms: usize) -> Vec<f64> {
    // Bernoulli numbers B_2, B_4, ..., B_20.
    const BERNOULLI: [f64; 10] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
        7.0 / 6.0,
        -3617.0 / 510.0,
        43867.0 / 798.0,
        -174611.0 / 330.0,
    ];
    let max_n = 2 * (terms - 1);
    // Cumulants: κ_{2j} = m B_{2j} / (2j); odd cumulants vanish.
    let mut kappa = vec![0.0; max_n + 1];
    for j in 1..=max_n / 2 {
        kappa[2 * j] = m as f64 * BERNOULLI[j - 1] / (2 * j) as f64;
    }
    let mut mom = vec![0.0; max_n + 1];
    mom[0] = 1.0;
    for n in 1..=max_n {
        mom[n] = (1..=n)
            .map(|k| binomial(n - 1, k - 1) * kappa[k] * mom[n - k])
            .sum();
    }
    (0..terms).map(|k| mom[2 * k]).collect()
}
