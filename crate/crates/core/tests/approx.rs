use quasi_herglotz::approx::*;
use quasi_herglotz::cone_solver::SolveOptions;
use quasi_herglotz::presets::{self, Preset};
use quasi_herglotz::sum_rules::SumRuleConstraint;
use quasi_herglotz::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn iv(lo: f64, hi: f64) -> Interval {
    Interval::new(lo, hi).unwrap()
}

fn base(symmetric: bool, norm: Norm) -> Scenario {
    Scenario {
        name: None,
        symmetric,
        omega: vec![iv(0.9, 1.1)],
        target: Target::Constant { re: 0.0, im: 0.0 },
        weight: Weight::Unit,
        norm,
        region_pos: Region { intervals: vec![iv(0.4, 0.85)], points: vec![0.0] },
        region_neg: Region { intervals: vec![iv(1.2, 1.6)], points: vec![2.0] },
        basis: Some(BasisSpec { count: 24, order: 2 }),
        b_fixed: None,
        param_boxes: Vec::new(),
        sum_rules: Vec::new(),
        samples_per_cell: 8,
        endpoint_samples: 8,
        display_spacing: None,
    }
}

/// Replaces the target by the boundary values of a random representation
/// that satisfies the scenario's sign constraints.
fn plant(s: &mut Scenario, rng: &mut ChaCha8Rng) -> quasi_herglotz::QuasiHerglotzRep {
    let layout = s.layout().unwrap();
    let theta: Vec<f64> = layout
        .lower
        .iter()
        .zip(&layout.upper)
        .map(|(&lo, &hi)| match (lo.is_finite(), hi.is_finite()) {
            (true, true) => rng.gen_range(lo..=hi),
            (true, false) => lo + rng.gen_range(0.0..1.0),
            (false, true) => hi - rng.gen_range(0.0..1.0),
            (false, false) => rng.gen_range(-1.0..1.0),
        })
        .collect();
    let rep = layout.template.with_parameters(&theta).unwrap();
    s.target = Target::Representation { rep: rep.clone() };
    rep
}

#[test]
fn planted_representations_are_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for trial in 0..12 {
        let symmetric = trial % 2 == 0;
        let norm = [Norm::LInf, Norm::L1, Norm::L2][trial % 3];
        let mut s = base(symmetric, norm);
        if trial % 4 == 1 {
            s.weight = Weight::InverseX;
        }
        plant(&mut s, &mut rng);
        let r = solve_approximation(&s, &SolveOptions::default()).unwrap();
        assert!(r.error <= 1e-6, "trial {trial} ({norm:?}, symmetric {symmetric}): d_N = {:e}", r.error);
    }
}

#[test]
fn planted_with_sum_rule_is_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut s = base(true, Norm::LInf);
    let rep = plant(&mut s, &mut rng);
    let rhs = quasi_herglotz::sum_rules::sum_rule_integral(&rep, -2).unwrap();
    s.sum_rules = vec![SumRuleConstraint::new(-2, rhs).unwrap()];
    let r = solve_approximation(&s, &SolveOptions::default()).unwrap();
    assert!(r.error <= 1e-6, "d_N = {:e}", r.error);
    assert!(sum_rule_residuals(&s, &r.rep).unwrap()[0] <= 1e-6);
}

#[test]
fn error_matches_objective_and_reevaluation() {
    for p in [Preset::Passive, Preset::NonPassive, Preset::PointMass] {
        let s = p.scenario();
        let r = solve_approximation(&s, &SolveOptions::default()).unwrap();
        assert!((r.error - r.solution.objective_value).abs() <= 1e-6 * r.error, "{p}");
        let asm = assemble_full(&s).unwrap();
        let again = evaluate(&r.rep, &asm.samples, &asm.targets).unwrap();
        let res: Vec<f64> = again.iter().map(|x| x.residual).collect();
        assert!((discrete_norm(s.norm, &asm.samples, &res) - r.error).abs() <= 1e-9);
    }
}

#[test]
fn grid_refinement_is_stable() {
    for p in Preset::ALL {
        let s = p.scenario();
        let mut fine = s.clone();
        fine.samples_per_cell *= 2;
        let a = solve_approximation(&s, &SolveOptions::default()).unwrap().error;
        let b = solve_approximation(&fine, &SolveOptions::default()).unwrap().error;
        assert!((a - b).abs() <= 0.01 * a, "{p}: {a} vs {b}");
    }
}

#[test]
fn nested_bases_do_not_increase_error() {
    let errors: Vec<f64> = [12, 25, 51]
        .iter()
        .map(|&count| {
            let mut s = presets::passive(0.02);
            s.basis = Some(BasisSpec { count, order: 2 });
            s.omega = vec![iv(0.99, 1.01)];
            solve_approximation(&s, &SolveOptions::default()).unwrap().error
        })
        .collect();
    for w in errors.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-6), "{errors:?}");
    }
}

#[test]
fn passive_without_gain_region_respects_bound() {
    for bw in [0.02, 0.05, 0.1] {
        let s = presets::passive(bw);
        let r = solve_approximation(&s, &SolveOptions::default()).unwrap();
        let delta = quasi_herglotz::passive_bound(presets::EPS_INF, presets::EPS_TARGET, bw).unwrap();
        assert!(r.error >= delta * (1.0 - 1e-6), "B {bw}: {} < {delta}", r.error);
    }
}

#[test]
fn symmetric_outputs_reflect() {
    let r = solve_approximation(&Preset::NonPassive.scenario(), &SolveOptions::default()).unwrap();
    for x in [0.3, 0.995, 1.5] {
        let q = r.rep.eval_boundary(x).unwrap();
        let m = r.rep.eval_boundary(-x).unwrap();
        assert!((m + q.conj()).norm() <= 1e-12 * q.norm().max(1.0));
    }
}

#[test]
fn infeasible_sum_rule_is_reported() {
    let mut s = base(false, Norm::LInf);
    s.region_neg = Region::default();
    s.sum_rules = vec![SumRuleConstraint::new(0, -1.0).unwrap()];
    match solve_approximation(&s, &SolveOptions::default()) {
        Err(Error::Solver(m)) => assert!(m.contains("Infeasible"), "{m}"),
        other => panic!("expected a solver error, got {other:?}"),
    }
}

#[test]
fn assembly_errors() {
    let mut s = base(false, Norm::LInf);
    s.region_neg.points = vec![1.0];
    assert!(matches!(assemble(&s), Err(Error::Assembly(_))));

    let mut s = base(false, Norm::LInf);
    s.region_neg.intervals = vec![iv(0.8, 1.6)];
    assert!(matches!(assemble(&s), Err(Error::Assembly(_))));

    let mut s = base(false, Norm::LInf);
    s.weight = Weight::InverseX;
    s.omega = vec![iv(-0.1, 0.2)];
    assert!(assemble(&s).is_err());
}

#[test]
fn scenario_files_round_trip() {
    for p in Preset::ALL {
        let s = p.scenario();
        assert_eq!(Scenario::from_json(&s.to_json()).unwrap(), s);
    }
    let err = Scenario::from_json("{\n  \"omega\": [[0.9, 1.1]],\n  \"target\": {\"kind\": \"constant\", \"re\": 1}\n}")
        .unwrap_err();
    assert!(matches!(&err, Error::Schema(m) if m.contains("line")), "{err}");
    let err = Scenario::from_json("{\"omega\": [[0.9, 1.1]], \"target\": {\"kind\": \"constant\", \"re\": 1, \"im\": 0}, \"bogus\": 1}")
        .unwrap_err();
    assert!(matches!(&err, Error::Schema(m) if m.contains("bogus")), "{err}");
}

#[test]
fn sweeps_record_failures_and_keep_order() {
    let values = [1.05, 1.0, 1.03];
    let pts = sweep(&Preset::PointMass.scenario(), SweepAxis::UpperMass, &values, &SolveOptions::default());
    assert_eq!(pts.iter().map(|p| p.value).collect::<Vec<_>>(), values);
    assert!(pts[0].outcome.is_ok());
    assert!(pts[1].outcome.is_err());
    assert!(pts[2].outcome.is_ok());
}
