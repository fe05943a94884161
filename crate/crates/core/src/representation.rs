//! Finite quasi-Herglotz representations: a linear term, real-axis point
//! masses and a B-spline density, evaluated on the real axis and in the upper
//! half-plane.
//!
//! The measure is parametrized in the β picture: a point mass of amplitude `p`
//! at `ξ` contributes `p / (ξ - z)`, and the density is
//! `β'(x) = (1/π) Σ c_n p_n(x)` so that `Im q(x) = Σ c_n p_n(x)` on the axis.
//! The constant term is the absorbed constant `ǎ`:
//!
//! ```text
//! q(z) = ǎ + b z + Σ_i p_i / (ξ_i - z) + ∫ β'(ξ) / (ξ - z) dξ
//! ```
//!
//! In symmetric mode (`q(z) = -conj(q(-conj z))`), `ǎ = 0` and masses and
//! spline functions are stored for the right half only; each is mirrored to
//! `-ξ` with the same amplitude, except a mass located at the origin.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spline_basis::SplineBasis;

/// Relative distance below which an evaluation point is treated as sitting
/// on a point mass.
const POLE_TOLERANCE: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointMass {
    pub location: f64,
    pub amplitude: f64,
}

impl PointMass {
    pub fn new(location: f64, amplitude: f64) -> Result<Self> {
        if !location.is_finite() || !amplitude.is_finite() {
            return Err(invalid(format!("non-finite point mass ({location}, {amplitude})")));
        }
        Ok(Self { location, amplitude })
    }

    /// Amplitude of the same mass in the finite σ measure, `dβ = (1 + ξ²) dσ`.
    pub fn sigma_amplitude(&self) -> f64 {
        self.amplitude / (1.0 + self.location * self.location)
    }

    pub fn from_sigma(location: f64, sigma_amplitude: f64) -> Result<Self> {
        Self::new(location, sigma_amplitude * (1.0 + location * location))
    }

    fn at_origin(&self) -> bool {
        self.location == 0.0
    }
}

/// Asymptotic expansion coefficients at the origin and at infinity.
#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticCoeffs {
    /// `a_{-1}, a_0, ..., a_M`.
    pub at_zero: Vec<f64>,
    /// `b_1, b_0, b_{-1}, ..., b_{-K}`.
    pub at_infinity: Vec<f64>,
    pub order_zero: i32,
    pub order_infinity: i32,
}

impl AsymptoticCoeffs {
    /// `a_k` of the expansion `q(z) = a_{-1}/z + a_0 + a_1 z + ...` at the origin.
    pub fn a(&self, k: i32) -> Option<f64> {
        usize::try_from(k + 1).ok().and_then(|i| self.at_zero.get(i).copied())
    }

    /// `b_k` of the expansion `q(z) = b_1 z + b_0 + b_{-1}/z + ...` at infinity.
    pub fn b(&self, k: i32) -> Option<f64> {
        usize::try_from(1 - k).ok().and_then(|i| self.at_infinity.get(i).copied())
    }
}

/// Real and imaginary coefficient rows of `q(x)` with respect to the parameter
/// vector (see [`QuasiHerglotzRep::parameters`]).
#[derive(Clone, Debug)]
pub struct BoundaryRow {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RepRecord", into = "RepRecord")]
pub struct QuasiHerglotzRep {
    symmetric: bool,
    a_check: f64,
    b: f64,
    masses: Vec<PointMass>,
    bases: Vec<SplineBasis>,
    density_coeffs: Vec<f64>,
}

/// On-disk layout of a representation.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RepRecord {
    symmetric: bool,
    #[serde(default)]
    a_check: f64,
    b: f64,
    #[serde(default)]
    masses: Vec<PointMass>,
    #[serde(default)]
    bases: Vec<SplineBasis>,
    #[serde(default)]
    density_coeffs: Vec<f64>,
}

impl TryFrom<RepRecord> for QuasiHerglotzRep {
    type Error = Error;

    fn try_from(r: RepRecord) -> Result<Self> {
        Self::new(r.symmetric, r.a_check, r.b, r.masses, r.bases, r.density_coeffs)
    }
}

impl From<QuasiHerglotzRep> for RepRecord {
    fn from(r: QuasiHerglotzRep) -> Self {
        RepRecord {
            symmetric: r.symmetric,
            a_check: r.a_check,
            b: r.b,
            masses: r.masses,
            bases: r.bases,
            density_coeffs: r.density_coeffs,
        }
    }
}

impl QuasiHerglotzRep {
    pub fn new(
        symmetric: bool,
        a_check: f64,
        b: f64,
        masses: Vec<PointMass>,
        bases: Vec<SplineBasis>,
        density_coeffs: Vec<f64>,
    ) -> Result<Self> {
        let count: usize = bases.iter().map(SplineBasis::count).sum();
        if density_coeffs.len() != count {
            return Err(invalid(format!(
                "{} density coefficients for {count} basis functions",
                density_coeffs.len()
            )));
        }
        if symmetric && a_check != 0.0 {
            return Err(invalid("symmetric representations have a_check = 0"));
        }
        if !a_check.is_finite() || !b.is_finite() || density_coeffs.iter().any(|c| !c.is_finite()) {
            return Err(invalid("non-finite representation parameter"));
        }
        for m in &masses {
            PointMass::new(m.location, m.amplitude)?;
            if symmetric && m.location < 0.0 {
                return Err(invalid("symmetric representations store masses at x >= 0 only"));
            }
        }
        Ok(Self { symmetric, a_check, b, masses, bases, density_coeffs })
    }

    /// Linear term only: `q(z) = ǎ + b z`.
    pub fn linear(symmetric: bool, a_check: f64, b: f64) -> Result<Self> {
        Self::new(symmetric, a_check, b, Vec::new(), Vec::new(), Vec::new())
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn a_check(&self) -> f64 {
        self.a_check
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn masses(&self) -> &[PointMass] {
        &self.masses
    }

    pub fn bases(&self) -> &[SplineBasis] {
        &self.bases
    }

    pub fn density_coeffs(&self) -> &[f64] {
        &self.density_coeffs
    }

    pub fn basis_count(&self) -> usize {
        self.density_coeffs.len()
    }

    /// Iterates over `(basis, local index, coefficient)` for every spline.
    pub fn splines(&self) -> impl Iterator<Item = (&SplineBasis, usize, f64)> + '_ {
        self.bases
            .iter()
            .flat_map(|b| (0..b.count()).map(move |n| (b, n)))
            .zip(self.density_coeffs.iter())
            .map(|((b, n), &c)| (b, n, c))
    }

    // Parameter vector: [ǎ (general mode only), b, p_1..p_M, c_1..c_N].

    pub fn parameter_count(&self) -> usize {
        usize::from(!self.symmetric) + 1 + self.masses.len() + self.density_coeffs.len()
    }

    pub fn a_check_index(&self) -> Option<usize> {
        (!self.symmetric).then_some(0)
    }

    pub fn b_index(&self) -> usize {
        usize::from(!self.symmetric)
    }

    pub fn mass_index(&self, i: usize) -> usize {
        self.b_index() + 1 + i
    }

    pub fn coeff_index(&self, n: usize) -> usize {
        self.b_index() + 1 + self.masses.len() + n
    }

    pub fn parameters(&self) -> Vec<f64> {
        let mut theta = Vec::with_capacity(self.parameter_count());
        if !self.symmetric {
            theta.push(self.a_check);
        }
        theta.push(self.b);
        theta.extend(self.masses.iter().map(|m| m.amplitude));
        theta.extend_from_slice(&self.density_coeffs);
        theta
    }

    /// Same structure (mode, mass locations, bases) with new parameter values.
    pub fn with_parameters(&self, theta: &[f64]) -> Result<Self> {
        if theta.len() != self.parameter_count() {
            return Err(invalid(format!(
                "expected {} parameters, got {}",
                self.parameter_count(),
                theta.len()
            )));
        }
        let a_check = self.a_check_index().map_or(0.0, |i| theta[i]);
        let b = theta[self.b_index()];
        let masses = self
            .masses
            .iter()
            .enumerate()
            .map(|(i, m)| PointMass { location: m.location, amplitude: theta[self.mass_index(i)] })
            .collect();
        let coeffs = theta[self.coeff_index(0)..].to_vec();
        Self::new(self.symmetric, a_check, b, masses, self.bases.clone(), coeffs)
    }

    fn check_pole(&self, x: f64) -> Result<()> {
        for m in self.masses.iter().filter(|m| m.amplitude != 0.0) {
            let hits = |xi: f64| (x - xi).abs() <= POLE_TOLERANCE * xi.abs().max(1.0);
            if hits(m.location) || (self.symmetric && hits(-m.location)) {
                return Err(Error::Pole { x });
            }
        }
        Ok(())
    }

    /// Real-axis mass kernel: the factor multiplying the amplitude in `Re q(x)`.
    fn mass_kernel(&self, m: &PointMass, x: f64) -> f64 {
        let xi = m.location;
        if self.symmetric {
            if m.at_origin() {
                -1.0 / x
            } else {
                1.0 / (xi - x) - 1.0 / (xi + x)
            }
        } else {
            1.0 / (xi - x)
        }
    }

    /// Boundary value `q(x) = lim_{y→0+} q(x + iy)`.
    pub fn eval_boundary(&self, x: f64) -> Result<Complex64> {
        if !x.is_finite() {
            return Err(invalid(format!("non-finite evaluation point {x}")));
        }
        self.check_pole(x)?;
        let mut re = self.a_check + self.b * x;
        re += self.masses.iter().map(|m| m.amplitude * self.mass_kernel(m, x)).sum::<f64>();
        let mut im = 0.0;
        for (basis, n, c) in self.splines() {
            if c == 0.0 {
                continue;
            }
            if self.symmetric {
                re += c * (basis.hilbert(n, x) - basis.hilbert(n, -x));
                im += c * (basis.value(n, x) + basis.value(n, -x));
            } else {
                re += c * basis.hilbert(n, x);
                im += c * basis.value(n, x);
            }
        }
        Ok(Complex64::new(re, im))
    }

    /// Coefficients of `Re q(x)` and `Im q(x)` with respect to the parameters.
    pub fn boundary_row(&self, x: f64) -> Result<BoundaryRow> {
        if !x.is_finite() {
            return Err(invalid(format!("non-finite evaluation point {x}")));
        }
        let mut re = vec![0.0; self.parameter_count()];
        let mut im = vec![0.0; self.parameter_count()];
        for m in &self.masses {
            let hits = |xi: f64| (x - xi).abs() <= POLE_TOLERANCE * xi.abs().max(1.0);
            if hits(m.location) || (self.symmetric && hits(-m.location)) {
                return Err(Error::Pole { x });
            }
        }
        if let Some(i) = self.a_check_index() {
            re[i] = 1.0;
        }
        re[self.b_index()] = x;
        for (i, m) in self.masses.iter().enumerate() {
            re[self.mass_index(i)] = self.mass_kernel(m, x);
        }
        for (k, (basis, n, _)) in self.splines().enumerate() {
            let j = self.coeff_index(k);
            if self.symmetric {
                re[j] = basis.hilbert(n, x) - basis.hilbert(n, -x);
                im[j] = basis.value(n, x) + basis.value(n, -x);
            } else {
                re[j] = basis.hilbert(n, x);
                im[j] = basis.value(n, x);
            }
        }
        Ok(BoundaryRow { re, im })
    }

    /// Value in the open upper half-plane.
    pub fn eval_upper(&self, z: Complex64) -> Result<Complex64> {
        if !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::Domain(format!("upper half-plane evaluation needs Im z > 0, got {z}")));
        }
        let mut q = self.a_check + self.b * z;
        for m in &self.masses {
            let xi = m.location;
            q += m.amplitude
                * if self.symmetric {
                    if m.at_origin() {
                        -z.inv()
                    } else {
                        (xi - z).inv() - (xi + z).inv()
                    }
                } else {
                    (xi - z).inv()
                };
        }
        let mirrored = -z.conj();
        for (basis, n, c) in self.splines() {
            if c == 0.0 {
                continue;
            }
            q += c * basis.cauchy(n, z);
            if self.symmetric {
                q -= c * basis.cauchy(n, mirrored).conj();
            }
        }
        Ok(q)
    }

    /// `∫ ξ^k dβ` over the whole (mirrored, in symmetric mode) measure.
    /// A mass at the origin enters only for `k = 0` and only when
    /// `include_origin` is set.
    pub fn measure_moment(&self, k: i32, include_origin: bool) -> Result<f64> {
        let mirror = |v: f64, k: i32| {
            if self.symmetric {
                v * (1.0 + if k % 2 == 0 { 1.0 } else { -1.0 })
            } else {
                v
            }
        };
        let mut total = 0.0;
        for m in &self.masses {
            if m.at_origin() {
                if include_origin && k == 0 {
                    total += m.amplitude;
                }
            } else {
                total += mirror(m.amplitude * m.location.powi(k), k);
            }
        }
        for (basis, n, c) in self.splines() {
            if c != 0.0 {
                total += mirror(c * basis.moment(n, k)? / std::f64::consts::PI, k);
            }
        }
        Ok(total)
    }

    /// Total amplitude of masses located exactly at the origin.
    pub fn origin_mass(&self) -> f64 {
        self.masses.iter().filter(|m| m.at_origin()).map(|m| m.amplitude).sum()
    }

    fn density_touches_origin(&self) -> bool {
        self.splines().any(|(basis, n, c)| {
            let (a, b) = basis.support(n).expect("index in range");
            c != 0.0 && a <= 0.0 && b >= 0.0
        })
    }

    /// Expansion coefficients up to order `max_order_zero` at the origin and
    /// `max_order_inf` at infinity (both at least -1).
    pub fn asymptotic_coeffs(&self, max_order_zero: i32, max_order_inf: i32) -> Result<AsymptoticCoeffs> {
        if max_order_zero < -1 || max_order_inf < -1 {
            return Err(invalid("expansion orders start at -1"));
        }
        let mut at_infinity = vec![self.b, self.a_check];
        for k in 1..=max_order_inf {
            at_infinity.push(-self.measure_moment(k - 1, true)?);
        }
        at_infinity.truncate((max_order_inf + 2) as usize);

        let mut at_zero = vec![-self.origin_mass()];
        if max_order_zero >= 0 && self.density_touches_origin() {
            return Err(Error::UnavailableExpansion(
                "density support reaches the origin; only a_{-1} exists".into(),
            ));
        }
        for j in 0..=max_order_zero {
            let moment = self.measure_moment(-j - 1, false).map_err(|e| match e {
                Error::DivergentMoment { .. } => Error::UnavailableExpansion(e.to_string()),
                other => other,
            })?;
            at_zero.push(match j {
                0 => self.a_check + moment,
                1 => self.b + moment,
                _ => moment,
            });
        }
        Ok(AsymptoticCoeffs {
            at_zero,
            at_infinity,
            order_zero: max_order_zero,
            order_infinity: max_order_inf,
        })
    }

    /// The constant `a` of the form in which the density kernel carries the
    /// `ξ / (1 + ξ²)` compensator (point masses uncompensated):
    /// `a = ǎ + ∫ ξ / (1 + ξ²) β'(ξ) dξ`.
    pub fn a_compensated(&self) -> f64 {
        if self.symmetric {
            return 0.0;
        }
        // ξ / (1 + ξ²) = Re 1 / (ξ - i), and (1/π) ∫ p_n / (ξ - i) is the Cauchy transform.
        let i = Complex64::new(0.0, 1.0);
        let shift: f64 = self.splines().map(|(basis, n, c)| c * basis.cauchy(n, i).re).sum();
        self.a_check + shift
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("representation serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spline_basis::make_uniform_basis;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn single_hat(symmetric: bool, lo: f64, c: f64) -> QuasiHerglotzRep {
        let basis = make_uniform_basis(lo, lo + 2.0, 1, 2).unwrap();
        QuasiHerglotzRep::new(symmetric, 0.0, 0.0, vec![], vec![basis], vec![c]).unwrap()
    }

    #[test]
    fn symmetric_drude_term() {
        let rep = QuasiHerglotzRep::new(true, 0.0, 1.0, vec![PointMass::new(0.0, 2.0).unwrap()], vec![], vec![])
            .unwrap();
        let q = rep.eval_boundary(1.0).unwrap();
        assert_abs_diff_eq!(q.re, -1.0, epsilon = 1e-15);
        assert_eq!(q.im, 0.0);
        assert!(matches!(rep.eval_boundary(0.0), Err(Error::Pole { .. })));
    }

    #[test]
    fn hat_imaginary_part_and_far_real_part() {
        let rep = single_hat(false, 0.0, PI);
        assert_abs_diff_eq!(rep.eval_boundary(1.0).unwrap().im, PI, epsilon = 1e-14);
        // π × (1/π)[-(10 ln 10 - 18 ln 9 + 8 ln 8)]
        let expected = -(10.0 * 10f64.ln() - 18.0 * 9f64.ln() + 8.0 * 8f64.ln());
        assert_abs_diff_eq!(rep.eval_boundary(10.0).unwrap().re, expected, epsilon = 1e-12);
        assert_abs_diff_eq!(expected, -0.111340, epsilon = 1e-5);
    }

    #[test]
    fn upper_half_plane_examples() {
        let rep = QuasiHerglotzRep::new(false, 0.0, 0.0, vec![PointMass::new(1.0, 1.0).unwrap()], vec![], vec![])
            .unwrap();
        let q = rep.eval_upper(Complex64::new(0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(q.re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(q.im, 0.5, epsilon = 1e-15);

        let rep = QuasiHerglotzRep::linear(false, 0.0, 3.0).unwrap();
        let q = rep.eval_upper(Complex64::new(0.0, 2.0)).unwrap();
        assert_eq!(q, Complex64::new(0.0, 6.0));
        assert!(matches!(rep.eval_upper(Complex64::new(1.0, 0.0)), Err(Error::Domain(_))));
        assert!(rep.eval_upper(Complex64::new(1.0, -1.0)).is_err());
    }

    #[test]
    fn boundary_row_reproduces_eval() {
        let basis = make_uniform_basis(0.5, 1.5, 6, 2).unwrap();
        for symmetric in [false, true] {
            let masses = vec![PointMass::new(0.0, 0.3).unwrap(), PointMass::new(2.0, -0.7).unwrap()];
            let coeffs = vec![0.1, -0.4, 0.9, 0.0, 0.2, 1.1];
            let a = if symmetric { 0.0 } else { 0.25 };
            let rep = QuasiHerglotzRep::new(symmetric, a, 1.3, masses, vec![basis.clone()], coeffs).unwrap();
            let theta = rep.parameters();
            for x in [0.3, 0.77, 1.0, 1.49, 2.5] {
                let row = rep.boundary_row(x).unwrap();
                let q = rep.eval_boundary(x).unwrap();
                let re: f64 = row.re.iter().zip(&theta).map(|(r, t)| r * t).sum();
                let im: f64 = row.im.iter().zip(&theta).map(|(r, t)| r * t).sum();
                assert_abs_diff_eq!(re, q.re, epsilon = 1e-12);
                assert_abs_diff_eq!(im, q.im, epsilon = 1e-12);
            }
            let back = rep.with_parameters(&theta).unwrap();
            assert_eq!(back, rep);
        }
    }

    #[test]
    fn asymptotics_of_single_mass() {
        let rep = QuasiHerglotzRep::new(false, 0.0, 0.0, vec![PointMass::new(2.0, 1.0).unwrap()], vec![], vec![])
            .unwrap();
        let ac = rep.asymptotic_coeffs(1, 3).unwrap();
        assert_eq!(ac.b(1), Some(0.0));
        assert_abs_diff_eq!(ac.b(-1).unwrap(), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ac.b(-2).unwrap(), -2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ac.a(0).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(ac.a(1).unwrap(), 0.25, epsilon = 1e-15);
        assert_eq!(ac.a(-1), Some(0.0));

        let rep = QuasiHerglotzRep::new(true, 0.0, 1.0, vec![PointMass::new(0.0, 5.0).unwrap()], vec![], vec![])
            .unwrap();
        let ac = rep.asymptotic_coeffs(1, 1).unwrap();
        assert_eq!(ac.a(-1), Some(-5.0));
        assert_eq!(ac.b(1), Some(1.0));
    }

    #[test]
    fn expansion_at_zero_unavailable_when_density_touches_origin() {
        let rep = single_hat(false, -1.0, 1.0);
        assert!(rep.asymptotic_coeffs(-1, 2).is_ok());
        assert!(matches!(rep.asymptotic_coeffs(0, 2), Err(Error::UnavailableExpansion(_))));
    }

    #[test]
    fn symmetric_reflection() {
        let basis = make_uniform_basis(0.4, 1.6, 5, 2).unwrap();
        let rep = QuasiHerglotzRep::new(
            true,
            0.0,
            0.8,
            vec![PointMass::new(0.0, 1.5).unwrap(), PointMass::new(2.0, -0.3).unwrap()],
            vec![basis],
            vec![0.3, -0.2, 0.5, 0.1, 0.7],
        )
        .unwrap();
        for x in [0.1, 0.45, 0.9, 1.3, 1.7, 3.0] {
            let plus = rep.eval_boundary(x).unwrap();
            let minus = rep.eval_boundary(-x).unwrap();
            assert_abs_diff_eq!(minus.re, -plus.re, epsilon = 1e-12);
            assert_abs_diff_eq!(minus.im, plus.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn json_round_trip_and_schema_errors() {
        let rep = single_hat(false, 1.0, 0.5);
        let text = rep.to_json();
        assert_eq!(QuasiHerglotzRep::from_json(&text).unwrap(), rep);
        let bad = text.replace("\"density_coeffs\": [\n    0.5\n  ]", "\"density_coeffs\": []");
        assert!(matches!(QuasiHerglotzRep::from_json(&bad), Err(Error::Schema(_))));
        assert!(QuasiHerglotzRep::from_json("{\"symmetric\": true, \"a_check\": 1.0, \"b\": 0.0}").is_err());
    }

    #[test]
    fn sigma_conversion() {
        let m = PointMass::from_sigma(2.0, 1.0).unwrap();
        assert_eq!(m.amplitude, 5.0);
        assert_eq!(m.sigma_amplitude(), 1.0);
    }

    #[test]
    fn compensated_constant() {
        // A hat symmetric about the origin has ∫ ξ/(1+ξ²) β' = 0.
        let rep = single_hat(false, -1.0, 1.0);
        assert_abs_diff_eq!(rep.a_compensated(), 0.0, epsilon = 1e-14);
        let rep = QuasiHerglotzRep::new(
            false,
            0.2,
            0.0,
            vec![],
            vec![make_uniform_basis(1.0, 3.0, 1, 2).unwrap()],
            vec![PI],
        )
        .unwrap();
        // ∫_1^3 hat(ξ) ξ/(1+ξ²) dξ by Simpson on a fine grid.
        let n = 20000;
        let h = 2.0 / n as f64;
        let f = |x: f64| (1.0 - (x - 2.0).abs()).max(0.0) * x / (1.0 + x * x);
        let mut s = f(1.0) + f(3.0);
        for i in 1..n {
            s += f(1.0 + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        assert_abs_diff_eq!(rep.a_compensated(), 0.2 + s * h / 3.0, epsilon = 1e-9);
    }
}
