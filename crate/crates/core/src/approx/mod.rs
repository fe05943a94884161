//! Constrained quasi-Herglotz approximation of sampled frequency responses.

mod assemble;
mod scenario;
mod sweep;

pub use assemble::{
    assemble, assemble_full, discrete_norm, evaluate, solve_approximation, sum_rule_residuals, sum_rule_row,
    ApproxResult, Assembly, SampleResidual,
};
pub use scenario::{BasisSpec, Interval, Layout, Norm, Param, ParamBox, Region, Sample, Scenario, Target, Weight};
pub use sweep::{apply_axis, parse_values, sweep, SweepAxis, SweepPoint};
