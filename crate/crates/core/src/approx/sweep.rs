use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::assemble::{solve_approximation, ApproxResult};
use super::scenario::{Interval, Scenario};
use crate::cone_solver::SolveOptions;
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    /// Relative bandwidth: Ω becomes `[c - B/2, c + B/2]` around its center `c`.
    #[serde(rename = "B")]
    Bandwidth,
    /// Upper point-mass location `x_u`; the lower one mirrors to `2c - x_u`.
    #[serde(rename = "x_u")]
    UpperMass,
    /// Static permittivity: the `k = -2` row gets `rhs = ε_s - b`.
    #[serde(rename = "eps_s")]
    StaticPermittivity,
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "B" => Ok(Self::Bandwidth),
            "x_u" => Ok(Self::UpperMass),
            "eps_s" => Ok(Self::StaticPermittivity),
            other => Err(invalid(format!("unknown sweep axis '{other}' (expected B, x_u or eps_s)"))),
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Bandwidth => "B",
            Self::UpperMass => "x_u",
            Self::StaticPermittivity => "eps_s",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub value: f64,
    pub outcome: std::result::Result<ApproxResult, String>,
}

fn omega_hull(s: &Scenario) -> (f64, f64) {
    let lo = s.omega.iter().map(|i| i.lo).fold(f64::INFINITY, f64::min);
    let hi = s.omega.iter().map(|i| i.hi).fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Copy of `template` with the axis set to `value`.
pub fn apply_axis(template: &Scenario, axis: SweepAxis, value: f64) -> Result<Scenario> {
    if !value.is_finite() {
        return Err(invalid("sweep value must be finite"));
    }
    let mut s = template.clone();
    let (lo, hi) = omega_hull(template);
    let center = 0.5 * (lo + hi);
    match axis {
        SweepAxis::Bandwidth => {
            if template.omega.len() != 1 {
                return Err(invalid("bandwidth sweeps need a single omega interval"));
            }
            let (new_lo, new_hi) = (center - value / 2.0, center + value / 2.0);
            s.omega = vec![Interval::new(new_lo, new_hi)?];
            for region in [&mut s.region_pos, &mut s.region_neg] {
                for iv in &mut region.intervals {
                    if iv.hi == lo {
                        iv.hi = new_lo;
                    }
                    if iv.lo == hi {
                        iv.lo = new_hi;
                    }
                    *iv = Interval::new(iv.lo, iv.hi)?;
                }
            }
        }
        SweepAxis::UpperMass => {
            let region = if template.region_neg.points.iter().filter(|&&p| p != 0.0).count() == 2 {
                &mut s.region_neg
            } else if template.region_pos.points.iter().filter(|&&p| p != 0.0).count() == 2 {
                &mut s.region_pos
            } else {
                return Err(invalid("x_u sweeps need exactly two nonzero point masses in one region"));
            };
            let keep: Vec<f64> = region.points.iter().copied().filter(|&p| p == 0.0).collect();
            region.points = keep;
            region.points.extend([2.0 * center - value, value]);
        }
        SweepAxis::StaticPermittivity => {
            let b = template
                .b_fixed
                .ok_or_else(|| invalid("eps_s sweeps need a fixed b (high-frequency permittivity)"))?;
            let rule = s
                .sum_rules
                .iter_mut()
                .find(|r| r.power() == -2)
                .ok_or_else(|| invalid("eps_s sweeps need a k = -2 sum rule"))?;
            *rule = rule.with_rhs(value - b)?;
        }
    }
    s.validate()?;
    Ok(s)
}

/// One solve per value, in parallel; results keep the order of `values`.
pub fn sweep(template: &Scenario, axis: SweepAxis, values: &[f64], options: &SolveOptions) -> Vec<SweepPoint> {
    values
        .par_iter()
        .map(|&value| SweepPoint {
            value,
            outcome: apply_axis(template, axis, value)
                .and_then(|s| solve_approximation(&s, options))
                .map_err(|e| e.to_string()),
        })
        .collect()
}

/// Parses `lo:hi:n` into `n` equally spaced values.
pub fn parse_values(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || invalid(format!("expected lo:hi:n, got '{spec}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n == 0 || !lo.is_finite() || !hi.is_finite() {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_grids() {
        assert_eq!(parse_values("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_values("2:5:1").unwrap(), vec![2.0]);
        assert!(parse_values("0:1").is_err());
        assert!(parse_values("0:1:0").is_err());
        assert!(parse_values("a:1:2").is_err());
    }

    #[test]
    fn axis_names() {
        for a in [SweepAxis::Bandwidth, SweepAxis::UpperMass, SweepAxis::StaticPermittivity] {
            assert_eq!(a.to_string().parse::<SweepAxis>().unwrap(), a);
        }
        assert!("q".parse::<SweepAxis>().is_err());
    }
}
