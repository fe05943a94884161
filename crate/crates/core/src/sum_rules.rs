//! Sum-rule integrals and identities for finite representations, and the
//! passive-approximation bound for a constant target permittivity.
//!
//! For a finite representation the double limit defining the left-hand side,
//! `lim_{ε→0+} lim_{y→0+} (1/π) ∫_{ε<|x|<1/ε} x^k Im q(x + iy) dx`,
//! is a plain integral over the measure: the spline density contributes its
//! power moments and a mass at `ξ ≠ 0` contributes `p ξ^k` (the Poisson kernel
//! concentrates on `ξ`). A mass at the origin is cut out by `|x| > ε` and
//! never contributes.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::representation::QuasiHerglotzRep;

/// One discretized identity `(1/π) ∫ x^k Im q dx = rhs`, used as an equality
/// row by the optimizer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SumRuleRecord")]
pub struct SumRuleConstraint {
    power: i32,
    rhs: f64,
}

#[derive(Deserialize)]
struct SumRuleRecord {
    power: i32,
    rhs: f64,
}

impl TryFrom<SumRuleRecord> for SumRuleConstraint {
    type Error = Error;

    fn try_from(r: SumRuleRecord) -> Result<Self> {
        Self::new(r.power, r.rhs)
    }
}

impl SumRuleConstraint {
    pub fn new(power: i32, rhs: f64) -> Result<Self> {
        if power % 2 != 0 {
            return Err(invalid(format!("sum-rule power must be even, got {power}")));
        }
        if !rhs.is_finite() {
            return Err(invalid("sum-rule right-hand side must be finite"));
        }
        Ok(Self { power, rhs })
    }

    /// The `k = -2` rule fixing the static limit: `rhs = a_1 - b_1`.
    pub fn static_limit(a1: f64, b1: f64) -> Result<Self> {
        Self::new(-2, a1 - b1)
    }

    pub fn power(&self) -> i32 {
        self.power
    }

    pub fn rhs(&self) -> f64 {
        self.rhs
    }

    pub fn with_rhs(self, rhs: f64) -> Result<Self> {
        Self::new(self.power, rhs)
    }

    /// `|sum_rule_integral(rep, k) - rhs|`.
    pub fn residual(&self, rep: &QuasiHerglotzRep) -> Result<f64> {
        Ok((sum_rule_integral(rep, self.power)? - self.rhs).abs())
    }
}

/// `(1/π) ∫ x^k Im q(x) dx` over the real line, origin excluded.
pub fn sum_rule_integral(rep: &QuasiHerglotzRep, k: i32) -> Result<f64> {
    rep.measure_moment(k, false)
}

/// Right-hand side of the identity for power `k`, from the expansion
/// coefficients of `rep`:
/// `a_{-k-1}` for `k <= -3`, `a_{-k-1} - b_{-k-1}` for `-2 <= k <= 0`,
/// `-b_{-k-1}` for `k >= 1`.
pub fn identity_rhs(rep: &QuasiHerglotzRep, k: i32) -> Result<f64> {
    let order_zero = if k <= 0 { -k - 1 } else { -1 };
    let order_inf = if k >= -2 { k + 1 } else { -1 };
    let coeffs = rep.asymptotic_coeffs(order_zero, order_inf)?;
    let a = |j: i32| coeffs.a(j).expect("order requested");
    let b = |j: i32| coeffs.b(j).expect("order requested");
    Ok(match k {
        k if k <= -3 => a(-k - 1),
        -2..=0 => a(-k - 1) - b(-k - 1),
        _ => -b(-k - 1),
    })
}

/// Absolute mismatch between both sides of the sum-rule identity for power `k`.
pub fn verify_sum_rule(rep: &QuasiHerglotzRep, k: i32) -> Result<f64> {
    let lhs = sum_rule_integral(rep, k)?;
    let rhs = identity_rhs(rep, k)?;
    Ok((lhs - rhs).abs())
}

/// Lower bound `Δ = (ε_∞ - ε_t) B / (2 + B)` on the sup-norm error of any
/// passive permittivity with high-frequency limit `eps_inf` approximating the
/// constant `eps_t` over `[1 - B/2, 1 + B/2]`.
pub fn passive_bound(eps_inf: f64, eps_t: f64, bandwidth: f64) -> Result<f64> {
    if !(bandwidth > 0.0 && bandwidth < 2.0) {
        return Err(invalid(format!("relative bandwidth must lie in (0, 2), got {bandwidth}")));
    }
    if !eps_inf.is_finite() || !eps_t.is_finite() {
        return Err(invalid("non-finite permittivity"));
    }
    if eps_inf < eps_t {
        return Err(invalid(format!(
            "bound needs eps_inf >= eps_t, got eps_inf = {eps_inf}, eps_t = {eps_t}"
        )));
    }
    Ok((eps_inf - eps_t) * bandwidth / (2.0 + bandwidth))
}
