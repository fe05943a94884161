//! Small dense conic solver.
//!
//! Solves
//!
//! ```text
//! minimize    cᵀθ + ½ θᵀPθ
//! subject to  Aθ = e
//!             lower ≤ θ ≤ upper
//!             ‖G_j θ + g_j‖₂ ≤ θ_{t_j}
//! ```
//!
//! with a homogeneous self-dual primal-dual interior-point method
//! (Mehrotra predictor-corrector, Nesterov-Todd scaling).

mod cones;
mod ipm;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(invalid(format!(
                "matrix data has {} entries, expected {rows}x{cols}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(invalid("matrix entries must be finite"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<f64>], cols: usize) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.len() != cols) {
            return Err(invalid(format!("row of length {} in a {cols}-column matrix", r.len())));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| cones::dot(self.row(i), x)).collect()
    }
}

/// `‖matrix · θ + offset‖₂ ≤ θ[bound_var]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SocConstraint {
    pub matrix: DenseMatrix,
    pub offset: Vec<f64>,
    pub bound_var: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeProblem {
    pub variable_count: usize,
    pub objective: Vec<f64>,
    /// Positive semidefinite `P` of the term `½ θᵀPθ`.
    pub quadratic: Option<DenseMatrix>,
    pub eq_matrix: DenseMatrix,
    pub eq_rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub soc: Vec<SocConstraint>,
}

impl ConeProblem {
    /// Zero objective, no constraints.
    pub fn new(variable_count: usize) -> Self {
        Self {
            variable_count,
            objective: vec![0.0; variable_count],
            quadratic: None,
            eq_matrix: DenseMatrix::zeros(0, variable_count),
            eq_rhs: Vec::new(),
            lower: vec![f64::NEG_INFINITY; variable_count],
            upper: vec![f64::INFINITY; variable_count],
            soc: Vec::new(),
        }
    }

    pub fn add_equality(&mut self, row: Vec<f64>, rhs: f64) -> Result<()> {
        if row.len() != self.variable_count {
            return Err(invalid("equality row length differs from variable count"));
        }
        let mut rows: Vec<Vec<f64>> = (0..self.eq_matrix.rows()).map(|i| self.eq_matrix.row(i).to_vec()).collect();
        rows.push(row);
        self.eq_matrix = DenseMatrix::from_rows(&rows, self.variable_count)?;
        self.eq_rhs.push(rhs);
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.variable_count;
        if n == 0 {
            return Err(invalid("problem has no variables"));
        }
        if self.objective.len() != n || self.lower.len() != n || self.upper.len() != n {
            return Err(invalid("objective and bound vectors must have one entry per variable"));
        }
        if self.objective.iter().any(|v| !v.is_finite()) || self.eq_rhs.iter().any(|v| !v.is_finite()) {
            return Err(invalid("objective and right-hand sides must be finite"));
        }
        if self.eq_matrix.cols() != n || self.eq_matrix.rows() != self.eq_rhs.len() {
            return Err(invalid("equality matrix shape mismatch"));
        }
        if let Some(p) = &self.quadratic {
            if p.rows() != n || p.cols() != n {
                return Err(invalid("quadratic term must be square"));
            }
        }
        for (i, (lo, hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi || *lo == f64::INFINITY || *hi == f64::NEG_INFINITY {
                return Err(invalid(format!("invalid bounds [{lo}, {hi}] on variable {i}")));
            }
        }
        for (j, c) in self.soc.iter().enumerate() {
            if c.matrix.cols() != n || c.matrix.rows() != c.offset.len() {
                return Err(invalid(format!("second-order cone row {j} has mismatched shape")));
            }
            if c.offset.iter().any(|v| !v.is_finite()) {
                return Err(invalid(format!("second-order cone row {j} has a non-finite offset")));
            }
            if c.bound_var >= n {
                return Err(invalid(format!("second-order cone row {j} bounds a missing variable")));
            }
            if !(self.lower[c.bound_var] >= 0.0) {
                return Err(invalid(format!(
                    "second-order cone row {j} bounds variable {} which needs a lower bound >= 0",
                    c.bound_var
                )));
            }
        }
        Ok(())
    }

    /// `cᵀθ + ½ θᵀPθ`.
    pub fn objective_at(&self, theta: &[f64]) -> f64 {
        let lin = cones::dot(&self.objective, theta);
        match &self.quadratic {
            Some(p) => lin + 0.5 * cones::dot(theta, &p.mul_vec(theta)),
            None => lin,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Primal residual and duality gap below `tol_rel`; the dual residual is
    /// either below `tol_rel` too or has stagnated below `sqrt(tol_rel)`.
    Optimal,
    /// The constraints admit no point.
    Infeasible,
    /// The objective is unbounded below on the feasible set.
    Unbounded,
    MaxIterations,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeSolution {
    pub theta: Vec<f64>,
    pub objective_value: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Relative feasibility and gap tolerance.
    pub tol_rel: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol_rel: 1e-8, max_iter: 100 }
    }
}

pub fn solve(problem: &ConeProblem, options: &SolveOptions) -> Result<ConeSolution> {
    problem.validate()?;
    if !(options.tol_rel > 0.0 && options.tol_rel < 1.0) {
        return Err(invalid("tol_rel must lie in (0, 1)"));
    }
    ipm::solve(problem, options)
}
