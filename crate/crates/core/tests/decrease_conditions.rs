//! Model-decrease guarantees of the subproblem solvers on random instances.

mod common;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use subsampled_tr::linalg;
use subsampled_tr::subproblem::DEFAULT_EIGEN_COEFFICIENT;
use subsampled_tr::{QuadraticModel, StepKind};

const INSTANCES: usize = 10_000;

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

fn positive_definite(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let q = common::orthogonal(rng, n);
    let eigenvalues: Vec<f64> = (0..n).map(|_| log_uniform(rng, 1e-3, 1e3)).collect();
    common::with_spectrum(&q, &eigenvalues)
}

/// Symmetric with at least one eigenvalue below −1e-3.
fn indefinite(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let q = common::orthogonal(rng, n);
    let mut eigenvalues: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
    eigenvalues[0] = -log_uniform(rng, 1e-3, 10.0);
    common::with_spectrum(&q, &eigenvalues)
}

fn tolerance(f0: f64) -> f64 {
    1e-12 * (1.0 + f0.abs())
}

#[test]
fn cauchy_and_dogleg_satisfy_the_first_order_condition() {
    let mut rng = common::rng(31);
    for _ in 0..INSTANCES {
        let n = rng.random_range(1..=10);
        let g = common::uniform_vector(&mut rng, n, -1.0, 1.0) * log_uniform(&mut rng, 1e-4, 1e2);
        let delta = log_uniform(&mut rng, 1e-3, 1e2);
        let f0 = rng.random_range(-10.0..10.0);

        let b = positive_definite(&mut rng, n);
        let model = QuadraticModel::new(g.clone(), b, delta, f0).unwrap();
        let cauchy = model.cauchy_point().unwrap();
        let dogleg = model.dogleg().unwrap();
        assert!(model.verify_first_order(&cauchy));
        assert!(model.verify_first_order(&dogleg));
        assert!(dogleg.norm() <= delta * (1.0 + 1e-12));
        assert!(model.model_decrease(&dogleg) >= model.model_decrease(&cauchy) - tolerance(f0));

        // the Cauchy point needs no definiteness
        let model = QuadraticModel::new(g, indefinite(&mut rng, n), delta, f0).unwrap();
        let cauchy = model.cauchy_point().unwrap();
        assert!(model.verify_first_order(&cauchy));
    }
}

#[test]
fn best_candidate_satisfies_the_second_order_condition() {
    let mut rng = common::rng(32);
    for k in 0..INSTANCES {
        let n = rng.random_range(1..=10);
        let b = indefinite(&mut rng, n);
        let g = if k % 10 == 0 {
            DVector::zeros(n)
        } else {
            common::uniform_vector(&mut rng, n, -1.0, 1.0) * log_uniform(&mut rng, 1e-4, 1e2)
        };
        let delta = log_uniform(&mut rng, 1e-3, 1e2);
        let model = QuadraticModel::new(g, b.clone(), delta, 0.0).unwrap();
        let step = model.solve_second_order().unwrap();
        assert!(
            model.verify_second_order(&step.direction, DEFAULT_EIGEN_COEFFICIENT),
            "k = {k}, n = {n}, Δ = {delta:e}, ‖g‖ = {:e}, λ = {:e}, ‖B‖ = {:e}, {:?} decrease {:e}",
            model.gradient().norm(),
            model.min_curvature(),
            linalg::spectral_norm(&b),
            step.kind,
            step.decrease
        );
        // independent check of the curvature part against a dense eigensolver
        let lambda = linalg::symmetric_eigenvalues(&b)[0];
        let curvature = 0.5 * (-lambda) * delta * delta;
        assert!(step.decrease >= curvature - 1e-12 * (1.0 + curvature));
    }
}

#[test]
fn winner_is_the_best_candidate() {
    let mut rng = common::rng(33);
    for _ in 0..500 {
        let n = rng.random_range(2..=6);
        let g = common::uniform_vector(&mut rng, n, -1.0, 1.0) * 50.0;
        let model = QuadraticModel::new(
            g,
            indefinite(&mut rng, n),
            log_uniform(&mut rng, 1e-2, 10.0),
            0.0,
        )
        .unwrap();
        let step = model.solve_second_order().unwrap();
        let value = |d: &DVector<f64>| model.value(d);
        let cauchy = value(&model.cauchy_point().unwrap());
        let eigen = value(&model.eigen_step().unwrap());
        let best = cauchy.min(eigen);
        assert_eq!(model.value(&step.direction), best);
        let expected = if eigen < cauchy {
            StepKind::Eigen
        } else {
            StepKind::Cauchy
        };
        assert_eq!(step.kind, expected);
    }
}

#[test]
fn model_decrease_is_direct_evaluation() {
    let mut rng = common::rng(34);
    for _ in 0..100 {
        let n = rng.random_range(1..=8);
        let g = common::uniform_vector(&mut rng, n, -1.0, 1.0);
        let b = indefinite(&mut rng, n);
        let d = common::uniform_vector(&mut rng, n, -1.0, 1.0);
        let f0 = 3.0;
        let model = QuadraticModel::new(g.clone(), b.clone(), 1.0, f0).unwrap();
        let m = f0 + g.dot(&d) + 0.5 * d.dot(&(&b * &d));
        assert!((model.model_decrease(&d) - (f0 - m)).abs() < 1e-12);
    }
}

/// `p(τ) = τ p_u` on `[0, 1]`, `p_u + (τ − 1)(p_b − p_u)` on `[1, 2]`.
fn dogleg_path(pu: &DVector<f64>, pb: &DVector<f64>, tau: f64) -> DVector<f64> {
    if tau <= 1.0 {
        pu * tau
    } else {
        pu + (pb - pu) * (tau - 1.0)
    }
}

#[test]
fn dogleg_matches_grid_search_on_the_path() {
    let b = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0]));
    let g = DVector::from_vec(vec![1.0, 1.0]);
    // p_u = −(gᵀg/gᵀBg)g = −0.4(1, 1), p_b = −B⁻¹g = −(1, 0.25)
    let pu = &g * -0.4;
    let pb = DVector::from_vec(vec![-1.0, -0.25]);
    for delta in [0.6, 0.8, 1.0] {
        assert!(pu.norm() < delta && delta < pb.norm());
        // bracket the boundary crossing on a 1e-5 grid, then bisect it
        let steps = 200_000;
        let crossing = (0..steps)
            .map(|k| 2.0 * k as f64 / steps as f64)
            .find(|&t| dogleg_path(&pu, &pb, t).norm() >= delta)
            .unwrap();
        let (mut lo, mut hi) = (crossing - 1e-5, crossing);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if dogleg_path(&pu, &pb, mid).norm() < delta {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = dogleg_path(&pu, &pb, 0.5 * (lo + hi));
        let model = QuadraticModel::new(g.clone(), b.clone(), delta, 0.0).unwrap();
        let d = model.dogleg().unwrap();
        assert!((d - oracle).amax() < 1e-10, "Δ = {delta}");
    }
}
