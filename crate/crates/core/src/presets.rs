//! Bundled metamaterial-permittivity scenarios.
//!
//! All four approximate the constant permittivity `ε_t = -1` with weight
//! `1/x` in the sup norm, with `b = ε_∞ = 1` and a symmetric representation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::approx::{BasisSpec, Interval, Norm, Region, Scenario, Target, Weight};
use crate::error::{invalid, Error, Result};
use crate::sum_rules::SumRuleConstraint;

pub const EPS_TARGET: f64 = -1.0;
pub const EPS_INF: f64 = 1.0;
pub const EPS_STATIC: f64 = 3.0;

/// Hat spacing of 100 linear splines spanning `[0.97, 1.03]`, used to express
/// point masses near the band as equivalent hat coefficients.
pub const REFERENCE_SPACING: f64 = 0.06 / 101.0;

/// Mass amplitude in angular-frequency units, `(2π)² p`.
pub fn angular_strength(amplitude: f64) -> f64 {
    4.0 * std::f64::consts::PI * std::f64::consts::PI * amplitude
}

/// Coefficient of a linear hat with spacing `spacing` carrying the same
/// measure as a point mass of `amplitude`.
pub fn hat_equivalent(amplitude: f64, spacing: f64) -> f64 {
    std::f64::consts::PI * amplitude / spacing
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Passive: Drude mass at 0 plus non-negative splines on `[0.97, 1.03]`, `B = 0.02`.
    #[serde(rename = "passive_5_1")]
    Passive,
    /// Non-positive splines on `[0.97, 0.99] ∪ [1.01, 1.03]`.
    #[serde(rename = "nonpassive_5_2")]
    NonPassive,
    /// Non-positive point masses at 0.971 and 1.029 instead of splines.
    #[serde(rename = "pointmass_5_3")]
    PointMass,
    /// `B = 0.2` with the static-permittivity sum rule `ε_s = 3`.
    #[serde(rename = "sumrule_5_4")]
    SumRule,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Passive, Preset::NonPassive, Preset::PointMass, Preset::SumRule];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Passive => "passive_5_1",
            Preset::NonPassive => "nonpassive_5_2",
            Preset::PointMass => "pointmass_5_3",
            Preset::SumRule => "sumrule_5_4",
        }
    }

    pub fn scenario(self) -> Scenario {
        match self {
            Preset::Passive => passive(0.02),
            Preset::NonPassive => non_passive(0.02),
            Preset::PointMass => point_mass(0.971, 1.029),
            Preset::SumRule => sum_rule(EPS_STATIC),
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| invalid(format!("unknown preset '{s}'")))
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn iv(lo: f64, hi: f64) -> Interval {
    Interval { lo, hi }
}

fn band(bandwidth: f64) -> Vec<Interval> {
    vec![iv(1.0 - bandwidth / 2.0, 1.0 + bandwidth / 2.0)]
}

fn common(name: &str, omega: Vec<Interval>) -> Scenario {
    Scenario {
        name: Some(name.to_string()),
        symmetric: true,
        omega,
        target: Target::Permittivity { eps_re: EPS_TARGET, eps_im: 0.0 },
        weight: Weight::InverseX,
        norm: Norm::LInf,
        region_pos: Region::default(),
        region_neg: Region::default(),
        basis: None,
        b_fixed: Some(EPS_INF),
        param_boxes: Vec::new(),
        sum_rules: Vec::new(),
        samples_per_cell: 8,
        endpoint_samples: 8,
        display_spacing: None,
    }
}

pub fn passive(bandwidth: f64) -> Scenario {
    let mut s = common("passive_5_1", band(bandwidth));
    s.region_pos = Region { intervals: vec![iv(0.97, 1.03)], points: vec![0.0] };
    s.basis = Some(BasisSpec { count: 100, order: 2 });
    s
}

pub fn non_passive(bandwidth: f64) -> Scenario {
    let (lo, hi) = (1.0 - bandwidth / 2.0, 1.0 + bandwidth / 2.0);
    let mut s = common("nonpassive_5_2", band(bandwidth));
    s.region_pos = Region { intervals: Vec::new(), points: vec![0.0] };
    s.region_neg = Region { intervals: vec![iv(0.97, lo), iv(hi, 1.03)], points: Vec::new() };
    s.basis = Some(BasisSpec { count: 100, order: 2 });
    s
}

pub fn point_mass(x_l: f64, x_u: f64) -> Scenario {
    let mut s = common("pointmass_5_3", band(0.02));
    s.region_pos = Region { intervals: Vec::new(), points: vec![0.0] };
    s.region_neg = Region { intervals: Vec::new(), points: vec![x_l, x_u] };
    s.display_spacing = Some(REFERENCE_SPACING);
    s
}

pub fn sum_rule(eps_static: f64) -> Scenario {
    let mut s = common("sumrule_5_4", vec![iv(0.9, 1.1)]);
    s.region_pos = Region { intervals: vec![iv(0.01, 0.9), iv(1.5, 2.0)], points: Vec::new() };
    s.region_neg = Region { intervals: vec![iv(1.1, 1.5)], points: Vec::new() };
    s.basis = Some(BasisSpec { count: 1000, order: 2 });
    s.sum_rules = vec![SumRuleConstraint::static_limit(eps_static, EPS_INF).expect("finite")];
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for p in Preset::ALL {
            p.scenario().validate().unwrap();
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
    }

    #[test]
    fn passive_problem_size() {
        let asm = crate::approx::assemble_full(&Preset::Passive.scenario()).unwrap();
        assert_eq!(asm.layout.template.parameter_count(), 102);
        assert_eq!(asm.problem.variable_count, 103);
        assert!(asm.problem.eq_rhs.is_empty());
    }

    #[test]
    fn display_conventions() {
        assert!((angular_strength(2.0) - 78.956_835_208_714_86).abs() < 1e-12);
        let basis = crate::spline_basis::SplineBasis::new(0.97, 1.03, 100, 2).unwrap();
        assert!((basis.spacing() - REFERENCE_SPACING).abs() < 1e-15);
        let c = hat_equivalent(1e-3, basis.spacing());
        assert!((c * basis.moment(10, 0).unwrap() / std::f64::consts::PI - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn sum_rule_row_shape() {
        let asm = crate::approx::assemble_full(&Preset::SumRule.scenario()).unwrap();
        assert_eq!(asm.problem.eq_rhs, vec![2.0]);
        let row = asm.problem.eq_matrix.row(0);
        let rep = &asm.layout.template;
        assert_eq!(row[rep.b_index()], 0.0);
        let (basis, n, _) = rep.splines().next().unwrap();
        let expected = 2.0 * basis.moment(n, -2).unwrap() / std::f64::consts::PI;
        assert!((row[rep.coeff_index(0)] - expected).abs() < 1e-15);
    }
}
