use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::scenario::{Layout, Norm, Sample, Scenario};
use crate::cone_solver::{self, ConeProblem, ConeSolution, DenseMatrix, SocConstraint, SolveOptions, SolveStatus};
use crate::error::{Error, Result};
use crate::representation::QuasiHerglotzRep;
use crate::sum_rules::sum_rule_integral;

/// Assembled cone program together with the data needed to read it back.
#[derive(Clone, Debug)]
pub struct Assembly {
    pub problem: ConeProblem,
    pub layout: Layout,
    pub samples: Vec<Sample>,
    pub targets: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleResidual {
    pub x: f64,
    pub q: Complex64,
    pub target: Complex64,
    pub weight: f64,
    /// `w(x) |q(x) - F(x)|`.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxResult {
    pub rep: QuasiHerglotzRep,
    /// Achieved discretized weighted norm `d_N`.
    pub error: f64,
    pub solution: ConeSolution,
    pub samples: Vec<SampleResidual>,
}

pub fn assemble(scenario: &Scenario) -> Result<ConeProblem> {
    Ok(assemble_full(scenario)?.problem)
}

pub fn assemble_full(scenario: &Scenario) -> Result<Assembly> {
    let layout = scenario.layout()?;
    let samples = scenario.grid(&layout)?;
    let rep = &layout.template;
    let d = rep.parameter_count();
    let targets: Vec<Complex64> = samples.iter().map(|s| scenario.target.eval(s.x)).collect::<Result<_>>()?;

    let aux = match scenario.norm {
        Norm::LInf | Norm::L2 => 1,
        Norm::L1 => samples.len(),
    };
    let n = d + aux;
    let mut problem = ConeProblem::new(n);
    problem.lower[..d].copy_from_slice(&layout.lower);
    problem.upper[..d].copy_from_slice(&layout.upper);
    problem.lower[d..].fill(0.0);

    let mut stacked: Vec<Vec<f64>> = Vec::new();
    let mut offsets = Vec::new();
    for (k, (s, f)) in samples.iter().zip(&targets).enumerate() {
        let row = rep.boundary_row(s.x).map_err(|e| match e {
            Error::Pole { x } => Error::Assembly(format!("sample grid hits a point mass at x = {x}")),
            e => e,
        })?;
        let scale = match scenario.norm {
            Norm::LInf | Norm::L1 => s.weight,
            Norm::L2 => s.weight * s.quad.sqrt(),
        };
        let mut re: Vec<f64> = row.re.iter().map(|v| scale * v).collect();
        let mut im: Vec<f64> = row.im.iter().map(|v| scale * v).collect();
        re.resize(n, 0.0);
        im.resize(n, 0.0);
        let off = [-scale * f.re, -scale * f.im];
        match scenario.norm {
            Norm::LInf | Norm::L1 => {
                let t = if scenario.norm == Norm::LInf { d } else { d + k };
                problem.soc.push(SocConstraint {
                    matrix: DenseMatrix::from_rows(&[re, im], n)?,
                    offset: off.to_vec(),
                    bound_var: t,
                });
                if scenario.norm == Norm::L1 {
                    problem.objective[t] = s.quad;
                }
            }
            Norm::L2 => {
                stacked.push(re);
                stacked.push(im);
                offsets.extend(off);
            }
        }
    }
    match scenario.norm {
        Norm::LInf | Norm::L2 => problem.objective[d] = 1.0,
        Norm::L1 => {}
    }
    if scenario.norm == Norm::L2 {
        problem.soc.push(SocConstraint { matrix: DenseMatrix::from_rows(&stacked, n)?, offset: offsets, bound_var: d });
    }

    for rule in &scenario.sum_rules {
        let mut row = sum_rule_row(rep, rule.power())?;
        row.resize(n, 0.0);
        problem.add_equality(row, rule.rhs())?;
    }
    Ok(Assembly { problem, layout, samples, targets })
}

/// Coefficients of `(1/π) ∫ x^k Im q dx` with respect to the parameters.
pub fn sum_rule_row(rep: &QuasiHerglotzRep, k: i32) -> Result<Vec<f64>> {
    let mirror = if rep.is_symmetric() { 1.0 } else { 0.0 };
    let parity = if k % 2 == 0 { 1.0 } else { -1.0 };
    let mut row = vec![0.0; rep.parameter_count()];
    for (i, m) in rep.masses().iter().enumerate() {
        if m.location != 0.0 {
            row[rep.mass_index(i)] = m.location.powi(k) * (1.0 + mirror * parity);
        }
    }
    for (j, (basis, n, _)) in rep.splines().enumerate() {
        row[rep.coeff_index(j)] = basis.moment(n, k)? / PI * (1.0 + mirror * parity);
    }
    Ok(row)
}

/// Weighted discrete norm of `q - F` over the samples.
pub fn discrete_norm(norm: Norm, samples: &[Sample], residuals: &[f64]) -> f64 {
    match norm {
        Norm::LInf => residuals.iter().copied().fold(0.0, f64::max),
        Norm::L1 => samples.iter().zip(residuals).map(|(s, r)| s.quad * r).sum(),
        Norm::L2 => samples.iter().zip(residuals).map(|(s, r)| s.quad * r * r).sum::<f64>().sqrt(),
    }
}

pub fn evaluate(rep: &QuasiHerglotzRep, samples: &[Sample], targets: &[Complex64]) -> Result<Vec<SampleResidual>> {
    samples
        .iter()
        .zip(targets)
        .map(|(s, f)| {
            let q = rep.eval_boundary(s.x)?;
            Ok(SampleResidual { x: s.x, q, target: *f, weight: s.weight, residual: s.weight * (q - f).norm() })
        })
        .collect()
}

pub fn solve_approximation(scenario: &Scenario, options: &SolveOptions) -> Result<ApproxResult> {
    let asm = assemble_full(scenario)?;
    let solution = cone_solver::solve(&asm.problem, options)?;
    if solution.status != SolveStatus::Optimal {
        return Err(Error::Solver(format!(
            "status {:?} after {} iterations (primal residual {:.3e}, dual residual {:.3e})",
            solution.status, solution.iterations, solution.primal_residual, solution.dual_residual
        )));
    }
    let d = asm.layout.template.parameter_count();
    let rep = asm.layout.template.with_parameters(&solution.theta[..d])?;
    let samples = evaluate(&rep, &asm.samples, &asm.targets)?;
    let residuals: Vec<f64> = samples.iter().map(|s| s.residual).collect();
    let error = discrete_norm(scenario.norm, &asm.samples, &residuals);
    Ok(ApproxResult { rep, error, solution, samples })
}

/// `|(1/π) ∫ x^k Im q dx - rhs|` for every sum-rule row of the scenario.
pub fn sum_rule_residuals(scenario: &Scenario, rep: &QuasiHerglotzRep) -> Result<Vec<f64>> {
    scenario
        .sum_rules
        .iter()
        .map(|r| Ok((sum_rule_integral(rep, r.power())? - r.rhs()).abs()))
        .collect()
}
