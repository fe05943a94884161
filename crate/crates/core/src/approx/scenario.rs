use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::representation::{PointMass, QuasiHerglotzRep};
use crate::spline_basis::SplineBasis;
use crate::sum_rules::SumRuleConstraint;

/// Closed interval, serialized as `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Schema(format!("interval [{lo}, {hi}] must be finite with lo < hi")));
        }
        Ok(Self { lo, hi })
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    fn overlaps(&self, other: &Interval) -> bool {
        self.lo < other.hi && other.lo < self.hi
    }
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = Error;

    fn try_from(v: [f64; 2]) -> Result<Self> {
        Self::new(v[0], v[1])
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

/// Union of closed intervals and isolated points.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    #[serde(default)]
    pub intervals: Vec<Interval>,
    #[serde(default)]
    pub points: Vec<f64>,
}

impl Region {
    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty() && self.points.is_empty()
    }
}

/// Function to approximate on the boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Target {
    /// Constant permittivity `ε`: `F(x) = x ε`.
    Permittivity { eps_re: f64, eps_im: f64 },
    Constant { re: f64, im: f64 },
    /// Linear interpolation of a sample table.
    Samples { x: Vec<f64>, re: Vec<f64>, im: Vec<f64> },
    /// Boundary values of a given representation.
    Representation { rep: QuasiHerglotzRep },
}

impl Target {
    pub fn eval(&self, x: f64) -> Result<Complex64> {
        match self {
            Target::Permittivity { eps_re, eps_im } => Ok(Complex64::new(x * eps_re, x * eps_im)),
            Target::Constant { re, im } => Ok(Complex64::new(*re, *im)),
            Target::Samples { x: xs, re, im } => Ok(Complex64::new(interpolate(xs, re, x)?, interpolate(xs, im, x)?)),
            Target::Representation { rep } => rep.eval_boundary(x),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Target::Permittivity { eps_re, eps_im } if !(eps_re.is_finite() && eps_im.is_finite()) => {
                Err(Error::Schema("target permittivity must be finite".into()))
            }
            Target::Constant { re, im } if !(re.is_finite() && im.is_finite()) => {
                Err(Error::Schema("target constant must be finite".into()))
            }
            Target::Samples { x, re, im } => check_table("target", x, &[re, im]),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Weight {
    #[default]
    Unit,
    /// `w(x) = 1/x`, so that `w |q - x ε_t| = |ε - ε_t|`.
    InverseX,
    Samples { x: Vec<f64>, w: Vec<f64> },
}

impl Weight {
    pub fn eval(&self, x: f64) -> Result<f64> {
        let w = match self {
            Weight::Unit => 1.0,
            Weight::InverseX => 1.0 / x,
            Weight::Samples { x: xs, w } => interpolate(xs, w, x)?,
        };
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::Assembly(format!("weight must be positive and finite, got {w} at x = {x}")));
        }
        Ok(w)
    }
}

/// Index `p` of the weighted `L^p` norm `(∫ (w |q - F|)^p dx)^{1/p}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Norm {
    #[serde(rename = "1")]
    L1,
    #[serde(rename = "2")]
    L2,
    #[default]
    #[serde(rename = "inf")]
    LInf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSpec {
    /// Total number of B-splines, split over the region intervals.
    pub count: usize,
    #[serde(default = "default_order")]
    pub order: usize,
}

fn default_order() -> usize {
    2
}

/// Parameter addressed by a box constraint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Param {
    ACheck,
    B,
    /// Point mass in ascending location order.
    Mass { index: usize },
    Coeff { index: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamBox {
    pub param: Param,
    #[serde(default)]
    pub lower: Option<f64>,
    #[serde(default)]
    pub upper: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub symmetric: bool,
    /// Approximation domain; the right half only in symmetric mode.
    pub omega: Vec<Interval>,
    pub target: Target,
    #[serde(default)]
    pub weight: Weight,
    #[serde(default)]
    pub norm: Norm,
    /// `I₁`: measure constrained non-negative.
    #[serde(default)]
    pub region_pos: Region,
    /// `I₂`: measure constrained non-positive.
    #[serde(default)]
    pub region_neg: Region,
    #[serde(default)]
    pub basis: Option<BasisSpec>,
    /// Fixes `b` (the high-frequency permittivity `ε_∞` for permittivity targets).
    #[serde(default)]
    pub b_fixed: Option<f64>,
    #[serde(default)]
    pub param_boxes: Vec<ParamBox>,
    #[serde(default)]
    pub sum_rules: Vec<SumRuleConstraint>,
    #[serde(default = "default_samples_per_cell")]
    pub samples_per_cell: usize,
    #[serde(default = "default_endpoint_samples")]
    pub endpoint_samples: usize,
    /// Hat spacing for reporting point masses as equivalent hat coefficients;
    /// defaults to the finest basis spacing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub display_spacing: Option<f64>,
}

fn default_samples_per_cell() -> usize {
    8
}

fn default_endpoint_samples() -> usize {
    8
}

/// Variables and bounds implied by a scenario.
#[derive(Clone, Debug)]
pub struct Layout {
    /// Representation with the scenario's structure and zero parameters.
    pub template: QuasiHerglotzRep,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// One point of the norm discretization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: f64,
    /// `w(x)`.
    pub weight: f64,
    /// Trapezoidal quadrature weight.
    pub quad: f64,
}

/// Grid cells per Ω interval used when no spline basis sets the scale.
const MIN_CELLS_PER_INTERVAL: f64 = 16.0;

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)
            .map_err(|e| Error::Schema(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let assembly = |m: String| Err(Error::Assembly(m));
        if let Some(h) = self.display_spacing {
            if !(h.is_finite() && h > 0.0) {
                return assembly(format!("display_spacing must be positive, got {h}"));
            }
        }
        if self.omega.is_empty() {
            return assembly("omega is empty".into());
        }
        let omega = sorted(&self.omega);
        if omega.windows(2).any(|w| w[0].hi >= w[1].lo) {
            return assembly("omega intervals must be disjoint".into());
        }
        self.target.validate()?;
        if let Weight::Samples { x, w } = &self.weight {
            check_table("weight", x, &[w])?;
        }
        if self.samples_per_cell == 0 {
            return assembly("samples_per_cell must be positive".into());
        }
        if let Some(b) = self.b_fixed {
            if !b.is_finite() {
                return assembly("b_fixed must be finite".into());
            }
        }
        if self.symmetric {
            if omega[0].lo <= 0.0 {
                return assembly("symmetric scenarios specify omega on x > 0".into());
            }
            let neg_interval = [&self.region_pos, &self.region_neg]
                .iter()
                .any(|r| r.intervals.iter().any(|i| i.lo < 0.0) || r.points.iter().any(|&p| p < 0.0));
            if neg_interval {
                return assembly("symmetric scenarios specify regions on x >= 0".into());
            }
        }
        if self.weight == Weight::InverseX && omega.iter().any(|i| i.contains(0.0)) {
            return assembly("weight 1/x is singular on omega".into());
        }
        for a in &self.region_pos.intervals {
            for b in &self.region_neg.intervals {
                if a.overlaps(b) {
                    return assembly(format!(
                        "regions overlap on [{}, {}] and [{}, {}]",
                        a.lo, a.hi, b.lo, b.hi
                    ));
                }
            }
        }
        let points = self.mass_specs();
        for w in points.windows(2) {
            if w[0].0 == w[1].0 {
                return assembly(format!("duplicate point mass location {}", w[0].0));
            }
        }
        for &(x, sign) in &points {
            if !x.is_finite() {
                return assembly("point mass location must be finite".into());
            }
            if omega.iter().any(|i| i.contains(x)) || (self.symmetric && omega.iter().any(|i| i.contains(-x))) {
                return assembly(format!("point mass at {x} lies inside omega"));
            }
            let other = if sign > 0.0 { &self.region_neg } else { &self.region_pos };
            if other.intervals.iter().any(|i| i.contains(x)) {
                return assembly(format!("point mass at {x} lies in the region of opposite sign"));
            }
        }
        let intervals = self.region_intervals();
        match (&self.basis, intervals.is_empty()) {
            (None, false) => return assembly("region intervals need a basis".into()),
            (Some(_), true) => return assembly("basis given but no region intervals".into()),
            (Some(b), false) => {
                if b.order < 2 {
                    return assembly("spline order must be at least 2".into());
                }
                if b.count < intervals.len() {
                    return assembly(format!(
                        "basis count {} is smaller than the number of region intervals {}",
                        b.count,
                        intervals.len()
                    ));
                }
            }
            (None, true) => {}
        }
        for r in &self.sum_rules {
            if r.power() != -2 && r.power() != 0 {
                return assembly(format!("sum-rule rows support powers -2 and 0, got {}", r.power()));
            }
        }
        Ok(())
    }

    /// Point-mass locations in ascending order with their sign (+1 in `I₁`).
    pub fn mass_specs(&self) -> Vec<(f64, f64)> {
        let mut v: Vec<(f64, f64)> = self
            .region_pos
            .points
            .iter()
            .map(|&x| (x, 1.0))
            .chain(self.region_neg.points.iter().map(|&x| (x, -1.0)))
            .collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    }

    /// Maximal intervals of `I₁` and `I₂`, sorted, with their sign.
    pub fn region_intervals(&self) -> Vec<(Interval, f64)> {
        let mut out: Vec<(Interval, f64)> = merge(&self.region_pos.intervals)
            .into_iter()
            .map(|i| (i, 1.0))
            .chain(merge(&self.region_neg.intervals).into_iter().map(|i| (i, -1.0)))
            .collect();
        out.sort_by(|a, b| a.0.lo.total_cmp(&b.0.lo));
        out
    }

    /// Splits the basis count over the region intervals by length
    /// (largest remainders).
    pub fn basis_counts(&self) -> Vec<usize> {
        let intervals = self.region_intervals();
        let Some(spec) = self.basis else {
            return vec![0; intervals.len()];
        };
        let total: f64 = intervals.iter().map(|(i, _)| i.len()).sum();
        let shares: Vec<f64> = intervals.iter().map(|(i, _)| spec.count as f64 * i.len() / total).collect();
        let mut counts: Vec<usize> = shares.iter().map(|s| s.floor() as usize).collect();
        let mut left = spec.count - counts.iter().sum::<usize>();
        let mut order: Vec<usize> = (0..shares.len()).collect();
        order.sort_by(|&a, &b| (shares[b] - shares[b].floor()).total_cmp(&(shares[a] - shares[a].floor())));
        for &k in order.iter().cycle() {
            if left == 0 {
                break;
            }
            counts[k] += 1;
            left -= 1;
        }
        counts
    }

    pub fn layout(&self) -> Result<Layout> {
        self.validate()?;
        let masses: Vec<PointMass> = self
            .mass_specs()
            .iter()
            .map(|&(x, _)| PointMass::new(x, 0.0))
            .collect::<Result<_>>()?;
        let intervals = self.region_intervals();
        let counts = self.basis_counts();
        let order = self.basis.map_or(2, |b| b.order);
        let mut bases = Vec::new();
        for ((iv, _), &count) in intervals.iter().zip(&counts) {
            if count == 0 {
                return Err(Error::Assembly(format!(
                    "interval [{}, {}] receives no basis functions; raise the basis count",
                    iv.lo, iv.hi
                )));
            }
            bases.push(SplineBasis::new(iv.lo, iv.hi, count, order)?);
        }
        let n_coeffs: usize = counts.iter().sum();
        let template = QuasiHerglotzRep::new(self.symmetric, 0.0, 0.0, masses, bases, vec![0.0; n_coeffs])?;

        let d = template.parameter_count();
        let mut lower = vec![f64::NEG_INFINITY; d];
        let mut upper = vec![f64::INFINITY; d];
        if let Some(b) = self.b_fixed {
            lower[template.b_index()] = b;
            upper[template.b_index()] = b;
        }
        for (i, &(_, sign)) in self.mass_specs().iter().enumerate() {
            set_sign(&mut lower, &mut upper, template.mass_index(i), sign);
        }
        let mut k = 0;
        for ((_, sign), &count) in intervals.iter().zip(&counts) {
            for _ in 0..count {
                set_sign(&mut lower, &mut upper, template.coeff_index(k), *sign);
                k += 1;
            }
        }
        for pb in &self.param_boxes {
            let idx = match pb.param {
                Param::ACheck => template
                    .a_check_index()
                    .ok_or_else(|| Error::Assembly("symmetric scenarios have no a_check parameter".into()))?,
                Param::B => template.b_index(),
                Param::Mass { index } if index < template.masses().len() => template.mass_index(index),
                Param::Coeff { index } if index < n_coeffs => template.coeff_index(index),
                p => return Err(Error::Assembly(format!("box refers to missing parameter {p:?}"))),
            };
            if let Some(lo) = pb.lower {
                lower[idx] = lower[idx].max(lo);
            }
            if let Some(hi) = pb.upper {
                upper[idx] = upper[idx].min(hi);
            }
            if lower[idx] > upper[idx] {
                return Err(Error::Assembly(format!("empty box on parameter {:?}", pb.param)));
            }
        }
        Ok(Layout { template, lower, upper })
    }

    /// Sample grid on Ω: `samples_per_cell` points per spline cell (or per
    /// sixteenth of each Ω interval, whichever is finer) plus Chebyshev
    /// clusters at the interval ends.
    pub fn grid(&self, layout: &Layout) -> Result<Vec<Sample>> {
        let delta = layout
            .template
            .bases()
            .iter()
            .map(SplineBasis::spacing)
            .fold(f64::INFINITY, f64::min);
        let mut out = Vec::new();
        for iv in sorted(&self.omega) {
            let cell = delta.min(iv.len() / MIN_CELLS_PER_INTERVAL);
            let steps = (iv.len() * self.samples_per_cell as f64 / cell).ceil().max(1.0) as usize;
            let h = iv.len() / steps as f64;
            let mut xs: Vec<f64> = (0..=steps).map(|k| iv.lo + k as f64 * h).collect();
            xs[steps] = iv.hi;
            let k = self.endpoint_samples;
            for j in 1..=k {
                let t = h * (1.0 - (std::f64::consts::FRAC_PI_2 * j as f64 / (k + 1) as f64).cos());
                xs.push(iv.lo + t);
                xs.push(iv.hi - t);
            }
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            for (i, &x) in xs.iter().enumerate() {
                let left = if i > 0 { x - xs[i - 1] } else { 0.0 };
                let right = if i + 1 < xs.len() { xs[i + 1] - x } else { 0.0 };
                out.push(Sample { x, weight: self.weight.eval(x)?, quad: 0.5 * (left + right) });
            }
        }
        Ok(out)
    }
}

fn set_sign(lower: &mut [f64], upper: &mut [f64], idx: usize, sign: f64) {
    if sign > 0.0 {
        lower[idx] = 0.0;
    } else {
        upper[idx] = 0.0;
    }
}

fn sorted(v: &[Interval]) -> Vec<Interval> {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    s
}

fn merge(v: &[Interval]) -> Vec<Interval> {
    let mut out: Vec<Interval> = Vec::new();
    for iv in sorted(v) {
        match out.last_mut() {
            Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
            _ => out.push(iv),
        }
    }
    out
}

fn check_table(what: &str, x: &[f64], cols: &[&Vec<f64>]) -> Result<()> {
    if x.len() < 2 {
        return Err(Error::Schema(format!("{what} table needs at least two rows")));
    }
    if cols.iter().any(|c| c.len() != x.len()) {
        return Err(Error::Schema(format!("{what} table columns differ in length")));
    }
    if x.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Schema(format!("{what} table abscissae must increase strictly")));
    }
    if x.iter().chain(cols.iter().flat_map(|c| c.iter())).any(|v| !v.is_finite()) {
        return Err(Error::Schema(format!("{what} table entries must be finite")));
    }
    Ok(())
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> Result<f64> {
    let n = xs.len();
    if x < xs[0] || x > xs[n - 1] {
        return Err(Error::Assembly(format!("x = {x} lies outside the sample table [{}, {}]", xs[0], xs[n - 1])));
    }
    let k = xs.partition_point(|&v| v <= x).clamp(1, n - 1);
    let t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    Ok(ys[k - 1] + t * (ys[k] - ys[k - 1]))
}
