//! Quasi-Herglotz functions generated by B-spline and point-mass measures,
//! their sum rules, and constrained approximation of frequency responses by
//! second-order cone programming.

pub mod approx;
pub mod cli;
pub mod cone_solver;
pub mod error;
pub mod presets;
pub mod representation;
pub mod spline_basis;
pub mod sum_rules;

pub use approx::{solve_approximation, ApproxResult, Scenario};
pub use cone_solver::{ConeProblem, ConeSolution, SolveOptions, SolveStatus};
pub use error::{Error, Result};
pub use presets::Preset;
pub use representation::{PointMass, QuasiHerglotzRep};
pub use spline_basis::SplineBasis;
pub use sum_rules::{passive_bound, verify_sum_rule, SumRuleConstraint};
