//! Worst-case bounds checked on problems with known constants.

mod common;

use nalgebra::DVector;
use rand::Rng;
use subsampled_tr::problem::unmetered_full_value;
use subsampled_tr::problems::{QuadraticOracle, SaddleProblem};
use subsampled_tr::{
    linalg, problem, run_first_order, run_second_order, BoundInputs, Branch, FiniteSumProblem,
    SolverParams,
};

fn bound_inputs(p: &dyn FiniteSumProblem, x0: &DVector<f64>, params: &SolverParams) -> BoundInputs {
    let c = p.known_constants(x0, params.delta_max).unwrap();
    BoundInputs {
        lipschitz_gradient: c.lipschitz_gradient,
        lipschitz_hessian: c.lipschitz_hessian,
        d0: c.d0,
        initial_gap: unmetered_full_value(p, x0).unwrap() - c.f_low,
        delta0: params.delta0,
        delta_max: params.delta_max,
        gamma: params.gamma,
        alpha: params.alpha,
        eps_g: params.eps_g,
        eps_h: params.eps_h,
        kappa: params.kappa,
    }
}

fn oracles() -> Vec<(QuadraticOracle, DVector<f64>)> {
    let mut rng = common::rng(41);
    let mut out = Vec::new();
    for (n, d) in [(2, 2), (5, 12), (10, 30)] {
        let centers = (0..d)
            .map(|_| common::uniform_vector(&mut rng, n, -4.0, 4.0))
            .collect();
        let x0 = common::uniform_vector(&mut rng, n, -10.0, 10.0) * rng.random_range(0.5..2.0);
        out.push((QuadraticOracle::new(centers).unwrap(), x0));
    }
    out
}

#[test]
fn first_order_run_respects_its_bounds() {
    let params = SolverParams::default();
    for (p, x0) in oracles() {
        let report = run_first_order(&p, &x0, &params).unwrap();
        assert!(report.converged());
        let b = bound_inputs(&p, &x0, &params);
        let hitting = report.hitting_index.unwrap() as f64;
        assert!(hitting <= b.iterations_first_order());
        let floor = b.radius_floor_first_order();
        let inner = b.inner_loop_first_order();
        for r in &report.records {
            assert!(
                r.delta >= floor,
                "k = {}: Δ = {} below {floor}",
                r.k,
                r.delta
            );
            assert!(r.j_k.unwrap() as f64 <= inner);
        }
    }
}

#[test]
fn second_order_run_on_a_convex_oracle_respects_its_bounds() {
    let params = SolverParams::default();
    for (p, x0) in oracles() {
        let report = run_second_order(&p, &x0, &params).unwrap();
        assert!(report.converged());
        let b = bound_inputs(&p, &x0, &params);
        assert!(report.hitting_index.unwrap() as f64 <= b.iterations_second_order());
        let floor = b.radius_floor_second_order();
        for r in &report.records {
            assert_eq!(r.branch, Some(Branch::Gradient));
            assert!(r.delta >= floor);
            assert!(r.j_k.unwrap() as f64 <= b.inner_loop_second_order());
        }
    }
}

#[test]
fn saddle_escape_reaches_second_order_stationarity() {
    let params = SolverParams {
        eps_g: 1e-4,
        eps_h: 1e-4,
        // a unit first step would land exactly on the minimizer
        delta0: 0.3,
        ..SolverParams::default()
    };
    let p = SaddleProblem::new(4, 6).unwrap();
    let mut x0 = DVector::zeros(4);
    x0[0] = 1e-6;
    let report = run_second_order(&p, &x0, &params).unwrap();
    assert!(report.converged());
    let x = &report.final_point;
    assert!(problem::unmetered_full_gradient(&p, x).unwrap().norm() <= params.eps_g);
    let lambda = linalg::symmetric_eigenvalues(&problem::unmetered_full_hessian(&p, x).unwrap())[0];
    assert!(lambda >= -params.eps_h);
    assert!(report
        .records
        .iter()
        .any(|r| r.branch == Some(Branch::Hessian)));
    let b = bound_inputs(&p, &x0, &params);
    assert!(report.hitting_index.unwrap() as f64 <= b.iterations_second_order());
    for r in &report.records {
        assert!(r.delta >= b.radius_floor_second_order());
        assert!(r.j_k.unwrap() as f64 <= b.inner_loop_second_order());
    }
}
