use quasi_herglotz::cone_solver::{solve, ConeProblem, DenseMatrix, SocConstraint, SolveOptions, SolveStatus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn opts() -> SolveOptions {
    SolveOptions::default()
}

fn soc(rows: Vec<Vec<f64>>, offset: Vec<f64>, n: usize, bound_var: usize) -> SocConstraint {
    SocConstraint { matrix: DenseMatrix::from_rows(&rows, n).unwrap(), offset, bound_var }
}

#[test]
fn distance_to_a_point() {
    let mut p = ConeProblem::new(3);
    p.objective[2] = 1.0;
    p.lower[2] = 0.0;
    p.soc.push(soc(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]], vec![-1.0, -2.0], 3, 2));
    let sol = solve(&p, &opts()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!((sol.theta[0] - 1.0).abs() < 1e-6);
    assert!((sol.theta[1] - 2.0).abs() < 1e-6);
    assert!(sol.theta[2].abs() < 1e-7);
}

#[test]
fn active_lower_bound() {
    let mut p = ConeProblem::new(1);
    p.objective[0] = 1.0;
    p.lower[0] = 3.0;
    let sol = solve(&p, &opts()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!((sol.objective_value - 3.0).abs() < 1e-7);
}

#[test]
fn distance_to_a_halfline() {
    let mut p = ConeProblem::new(2);
    p.objective[1] = 1.0;
    p.upper[0] = 0.0;
    p.lower[1] = 0.0;
    p.soc.push(soc(vec![vec![1.0, 0.0]], vec![-1.0], 2, 1));
    let sol = solve(&p, &opts()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!((sol.theta[1] - 1.0).abs() < 1e-7);
    assert!(sol.theta[0].abs() < 1e-7);
}

#[test]
fn quadratic_objective() {
    let mut p = ConeProblem::new(3);
    p.quadratic = Some(DenseMatrix::new(3, 3, vec![2.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 2.0]).unwrap());
    p.objective = vec![-2.0, 4.0, -6.0];
    p.lower[2] = 0.0;
    p.upper[2] = 1.5;
    let sol = solve(&p, &opts()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!((sol.objective_value + 11.75).abs() < 1e-7, "{}", sol.objective_value);
    for (got, want) in sol.theta.iter().zip([1.0, -2.0, 1.5]) {
        assert!((got - want).abs() < 1e-4, "{got} vs {want}");
    }
}

#[test]
fn infeasible_constraints() {
    let mut p = ConeProblem::new(2);
    p.objective = vec![1.0, 1.0];
    p.lower = vec![0.0, 0.0];
    p.add_equality(vec![1.0, 1.0], -1.0).unwrap();
    let sol = solve(&p, &opts()).unwrap();
    assert_eq!(sol.status, SolveStatus::Infeasible);
}

#[test]
fn unbounded_objective() {
    let mut p = ConeProblem::new(2);
    p.objective = vec![-1.0, 0.0];
    p.lower = vec![0.0, 0.0];
    p.soc.push(soc(vec![vec![0.0, 0.0]], vec![0.0], 2, 1));
    let sol = solve(&p, &opts()).unwrap();
    assert_eq!(sol.status, SolveStatus::Unbounded);
}

#[test]
fn rejects_malformed_problems() {
    let mut p = ConeProblem::new(2);
    p.soc.push(soc(vec![vec![1.0, 0.0]], vec![0.0], 2, 1));
    assert!(solve(&p, &opts()).is_err());
    let mut p = ConeProblem::new(2);
    p.lower[0] = 2.0;
    p.upper[0] = 1.0;
    assert!(solve(&p, &opts()).is_err());
    assert!(DenseMatrix::new(2, 2, vec![1.0; 3]).is_err());
}

struct Planted {
    problem: ConeProblem,
    optimum: f64,
}

/// Epigraph problem `min cᵀθ + Σ w_j t_j` with `‖M_j θ + g_j‖ ≤ t_j`, boxes
/// and equalities, built around a chosen primal-dual optimal pair.
fn planted(rng: &mut ChaCha8Rng, k: usize, cones: usize, rows: usize, eqs: usize) -> Planted {
    let n = k + cones;
    let theta: Vec<f64> = (0..k).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let mut p = ConeProblem::new(n);
    let mut grad = vec![0.0; k];
    let mut optimum = 0.0;
    for j in 0..cones {
        let m: Vec<Vec<f64>> = (0..rows).map(|_| (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let r: Vec<f64> = (0..rows).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        let offset: Vec<f64> = (0..rows)
            .map(|i| r[i] - m[i].iter().zip(&theta).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        let w = rng.gen_range(0.5..2.0);
        for i in 0..rows {
            for (g, mij) in grad.iter_mut().zip(&m[i]) {
                *g += w * mij * r[i] / rn;
            }
        }
        let full: Vec<Vec<f64>> = m
            .iter()
            .map(|row| {
                let mut v = row.clone();
                v.resize(n, 0.0);
                v
            })
            .collect();
        p.soc.push(soc(full, offset, n, k + j));
        p.objective[k + j] = w;
        p.lower[k + j] = 0.0;
        optimum += w * rn;
    }
    let mut c: Vec<f64> = grad.iter().map(|g| -g).collect();
    for i in 0..k {
        match rng.gen_range(0..4) {
            0 => {
                p.lower[i] = theta[i];
                c[i] += rng.gen_range(0.1..1.0);
            }
            1 => {
                p.upper[i] = theta[i];
                c[i] -= rng.gen_range(0.1..1.0);
            }
            2 => {
                p.lower[i] = theta[i] - 1.0;
                p.upper[i] = theta[i] + 1.0;
            }
            _ => {}
        }
    }
    for _ in 0..eqs {
        let row: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y = rng.gen_range(-1.0..1.0);
        for (ci, ai) in c.iter_mut().zip(&row) {
            *ci -= y * ai;
        }
        let rhs = row.iter().zip(&theta).map(|(a, b)| a * b).sum();
        let mut full = row;
        full.resize(n, 0.0);
        p.add_equality(full, rhs).unwrap();
    }
    for (i, ci) in c.iter().enumerate() {
        p.objective[i] = *ci;
        optimum += ci * theta[i];
    }
    Planted { problem: p, optimum }
}

fn max_violation(p: &ConeProblem, theta: &[f64]) -> f64 {
    let mut v: f64 = 0.0;
    for i in 0..p.variable_count {
        v = v.max(p.lower[i] - theta[i]).max(theta[i] - p.upper[i]);
    }
    for (i, rhs) in p.eq_rhs.iter().enumerate() {
        let lhs: f64 = p.eq_matrix.row(i).iter().zip(theta).map(|(a, b)| a * b).sum();
        v = v.max((lhs - rhs).abs());
    }
    for c in &p.soc {
        let r = c.matrix.mul_vec(theta);
        let nrm = r.iter().zip(&c.offset).map(|(a, b)| (a + b) * (a + b)).sum::<f64>().sqrt();
        v = v.max(nrm - theta[c.bound_var]);
    }
    v
}

#[test]
fn planted_optima_are_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..40 {
        let k = rng.gen_range(2..12);
        let cones = rng.gen_range(1..8);
        let rows = rng.gen_range(1..5);
        let eqs = rng.gen_range(0..k.min(3));
        let pl = planted(&mut rng, k, cones, rows, eqs);
        let sol = solve(&pl.problem, &opts()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal, "trial {trial}");
        let tol = 10.0 * opts().tol_rel * (1.0 + pl.optimum.abs());
        assert!((sol.objective_value - pl.optimum).abs() <= tol, "trial {trial}: {} vs {}", sol.objective_value, pl.optimum);
        assert!(max_violation(&pl.problem, &sol.theta) <= 1e-6, "trial {trial}");
        assert!(sol.primal_residual <= opts().tol_rel && sol.dual_residual <= opts().tol_rel);
    }
}

#[test]
fn repeated_solves_are_bit_identical() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pl = planted(&mut rng, 8, 5, 3, 1);
    let a = solve(&pl.problem, &opts()).unwrap();
    let b = solve(&pl.problem, &opts()).unwrap();
    assert_eq!(a, b);
    let limited = SolveOptions { max_iter: 3, ..opts() };
    let c = solve(&pl.problem, &limited).unwrap();
    assert_eq!(c.status, SolveStatus::MaxIterations);
    assert_eq!(c, solve(&pl.problem, &limited).unwrap());
}
