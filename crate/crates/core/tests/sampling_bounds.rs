//! Deterministic sampling-error bounds, ordering and memoization.

mod common;

use std::cell::RefCell;
use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use subsampled_tr::linalg;
use subsampled_tr::problem::{self, sample_gradient, sample_hessian};
use subsampled_tr::problems::{QuadraticOracle, SaddleProblem, TrigProblem};
use subsampled_tr::sampling::{
    order_components, required_cardinality, select_prefix, OrderingRule,
};
use subsampled_tr::{EvaluationLedger, FiniteSumProblem, SampleSet};

fn random_problem(rng: &mut impl Rng) -> Box<dyn FiniteSumProblem> {
    let d = rng.random_range(2..=20);
    match rng.random_range(0..3) {
        0 => Box::new(TrigProblem::new(d)),
        1 => {
            let n = rng.random_range(1..=6);
            let centers = (0..d)
                .map(|_| common::uniform_vector(rng, n, -2.0, 2.0))
                .collect();
            Box::new(QuadraticOracle::new(centers).unwrap())
        }
        _ => Box::new(SaddleProblem::new(rng.random_range(2..=6), d).unwrap()),
    }
}

/// `h` uniform on `[0, 1]`, with the endpoints drawn on purpose now and then.
fn random_fraction(rng: &mut impl Rng) -> f64 {
    match rng.random_range(0..10) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.random_range(0.0..=1.0),
    }
}

/// A random subset (in random order) satisfying the cardinality rule for `h`.
fn random_sample(rng: &mut impl Rng, h: f64, d: usize) -> SampleSet {
    let m = rng.random_range(required_cardinality(h, d)..=d);
    let mut all: Vec<usize> = (0..d).collect();
    all.shuffle(rng);
    all.truncate(m);
    SampleSet::new(all, h, d).unwrap()
}

#[test]
fn sampled_gradient_and_hessian_errors_are_bounded() {
    let mut rng = common::rng(21);
    for _ in 0..1000 {
        let p = random_problem(&mut rng);
        let d = p.num_components();
        let x = common::uniform_vector(&mut rng, p.dim(), -1.5, 1.5);
        let h = random_fraction(&mut rng);
        let sample = random_sample(&mut rng, h, d);
        let mut ledger = EvaluationLedger::new();
        ledger.advance_point();

        let g_full = problem::unmetered_full_gradient(p.as_ref(), &x).unwrap();
        let g_sample = sample_gradient(p.as_ref(), &sample, &x, &mut ledger).unwrap();
        let g_max = (0..d)
            .map(|i| p.component_gradient(i, &x).norm())
            .fold(0.0, f64::max);
        let err = (&g_full - &g_sample).norm();
        assert!(
            err <= 2.0 * h * g_max + 1e-12,
            "{}: gradient error {err:e} > 2·{h}·{g_max:e}",
            p.name()
        );

        let h_full = problem::unmetered_full_hessian(p.as_ref(), &x).unwrap();
        let h_sample = sample_hessian(p.as_ref(), &sample, &x, &mut ledger).unwrap();
        let h_max = (0..d)
            .map(|i| linalg::spectral_norm(&p.component_hessian(i, &x)))
            .fold(0.0, f64::max);
        let err = linalg::spectral_norm(&(&h_full - &h_sample));
        assert!(
            err <= 2.0 * h * h_max + 1e-12,
            "{}: Hessian error {err:e} > 2·{h}·{h_max:e}",
            p.name()
        );
    }
}

#[test]
fn negative_curvature_transfers_from_samples() {
    let mut rng = common::rng(22);
    for draw in 0..300 {
        let d = rng.random_range(2..=20);
        let n = rng.random_range(2..=6);
        let (p, x): (Box<dyn FiniteSumProblem>, DVector<f64>) = if draw % 2 == 0 {
            (
                Box::new(SaddleProblem::new(n, d).unwrap()),
                common::uniform_vector(&mut rng, n, -1.0, 1.0),
            )
        } else {
            let centers = (0..d)
                .map(|_| common::uniform_vector(&mut rng, n, -2.0, 2.0))
                .collect();
            (
                Box::new(QuadraticOracle::new(centers).unwrap()),
                common::uniform_vector(&mut rng, n, -2.0, 2.0),
            )
        };
        let lg = p.known_constants(&x, 0.0).unwrap().lipschitz_gradient;
        let h = random_fraction(&mut rng);
        let sample = random_sample(&mut rng, h, d);
        let mut ledger = EvaluationLedger::new();
        ledger.advance_point();
        let full =
            linalg::min_eigenvalue(&problem::unmetered_full_hessian(p.as_ref(), &x).unwrap());
        let sampled =
            linalg::min_eigenvalue(&sample_hessian(p.as_ref(), &sample, &x, &mut ledger).unwrap());
        assert!(
            -full <= -sampled + 2.0 * h * lg + 1e-10,
            "{}: λ_min {full} vs sampled {sampled}",
            p.name()
        );
    }
}

#[test]
fn sampled_gradient_matches_brute_force_mean() {
    let mut rng = common::rng(23);
    let centers: Vec<_> = (0..10)
        .map(|_| common::uniform_vector(&mut rng, 3, -1.0, 1.0))
        .collect();
    let p = QuadraticOracle::new(centers).unwrap();
    let x = common::uniform_vector(&mut rng, 3, -1.0, 1.0);
    let mut indices: Vec<usize> = (0..10).collect();
    indices.shuffle(&mut rng);
    indices.truncate(7);
    let sample = SampleSet::from_indices(indices, 10).unwrap();
    let mut ledger = EvaluationLedger::new();
    ledger.advance_point();
    let got = sample_gradient(&p, &sample, &x, &mut ledger).unwrap();
    let grads: Vec<_> = sample
        .indices()
        .iter()
        .map(|&i| &x - &p.centers()[i])
        .collect();
    assert!((got - common::brute_mean(&grads)).amax() < 1e-14);
}

#[test]
fn trig_sampled_hessian_matches_finite_differences() {
    let p = TrigProblem::new(3);
    let x = DVector::from_element(3, 1.0);
    let sample = SampleSet::from_indices(vec![0, 2], 3).unwrap();
    let mut ledger = EvaluationLedger::new();
    ledger.advance_point();
    let got = sample_hessian(&p, &sample, &x, &mut ledger).unwrap();
    let f_h = |z: &DVector<f64>| 0.5 * (p.component_value(0, z) + p.component_value(2, z));
    let grad_fd = |z: &DVector<f64>| common::fd_gradient(f_h, z, 1e-4);
    let fd: DMatrix<f64> = common::fd_jacobian(grad_fd, &x, 1e-4);
    assert!((got - fd).amax() < 1e-5);
}

#[test]
fn ordering_matches_reference_sort() {
    let p = TrigProblem::new(5);
    let x = DVector::from_element(5, 1.0);
    let mut ledger = EvaluationLedger::new();
    ledger.advance_point();
    let ordering = order_components(&p, &x, &mut ledger, 0).unwrap();
    let values: Vec<f64> = (0..5).map(|i| p.component_value(i, &x)).collect();
    let mut reference: Vec<usize> = (0..5).collect();
    reference.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap().then(a.cmp(&b)));
    assert_eq!(ordering.permutation(), reference.as_slice());
    assert_eq!(ledger.fe_count(), 1);
}

#[test]
fn prefixes_are_nested() {
    let mut rng = common::rng(24);
    let values: Vec<f64> = (0..40).map(|_| rng.random_range(-1.0..1.0)).collect();
    let ordering = subsampled_tr::sampling::ComponentOrdering::from_values(
        &values,
        0,
        OrderingRule::ValueDescending,
    );
    for _ in 0..200 {
        let a = rng.random_range(1..=40);
        let b = rng.random_range(a..=40);
        let small: HashSet<_> = select_prefix(&ordering, a, 0.5)
            .unwrap()
            .indices()
            .iter()
            .copied()
            .collect();
        let large: HashSet<_> = select_prefix(&ordering, b, 0.5)
            .unwrap()
            .indices()
            .iter()
            .copied()
            .collect();
        assert!(small.is_subset(&large));
    }
}

/// Records every distinct `(component, point)` pair whose gradient is
/// requested.
struct Tally<P> {
    inner: P,
    seen: RefCell<HashSet<(usize, Vec<u64>)>>,
}

impl<P: FiniteSumProblem> FiniteSumProblem for Tally<P> {
    fn name(&self) -> &str {
        self.inner.name()
    }
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn num_components(&self) -> usize {
        self.inner.num_components()
    }
    fn component_value(&self, i: usize, x: &DVector<f64>) -> f64 {
        self.inner.component_value(i, x)
    }
    fn component_gradient(&self, i: usize, x: &DVector<f64>) -> DVector<f64> {
        self.seen
            .borrow_mut()
            .insert((i, x.iter().map(|v| v.to_bits()).collect()));
        self.inner.component_gradient(i, x)
    }
    fn component_hessian(&self, i: usize, x: &DVector<f64>) -> DMatrix<f64> {
        self.inner.component_hessian(i, x)
    }
}

#[test]
fn gradient_count_equals_distinct_evaluations() {
    let mut rng = common::rng(25);
    let p = Tally {
        inner: TrigProblem::new(15),
        seen: RefCell::new(HashSet::new()),
    };
    let mut ledger = EvaluationLedger::new();
    for _ in 0..5 {
        ledger.advance_point();
        let x = common::uniform_vector(&mut rng, 15, -1.0, 1.0);
        for _ in 0..6 {
            let h = random_fraction(&mut rng);
            let sample = random_sample(&mut rng, h, 15);
            sample_gradient(&p, &sample, &x, &mut ledger).unwrap();
        }
    }
    assert_eq!(ledger.ge_count(), p.seen.borrow().len() as u64);
}
