//! Outer trust-region loops: full-sample baseline, first-order sub-sampled
//! and second-order sub-sampled methods.
//!
//! Every iteration first runs the stopping test on full derivatives through
//! the unmetered channel, then builds a sampled model, solves the subproblem,
//! evaluates the trial point (one FE) and updates the radius. The component
//! values computed at an accepted trial point also give the ordering for the
//! next iteration, so the ordering never costs an extra evaluation.

use log::{debug, info};
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::hessian::{self, BfgsState};
use crate::ledger::EvaluationLedger;
use crate::linalg;
use crate::problem::{self, FiniteSumProblem, ProblemError};
use crate::sampling::{
    self, Branch, ComponentOrdering, OrderingRule, SampleSchedule, SampleSet, SamplingError,
    ScheduleMode,
};
use crate::subproblem::{QuadraticModel, StepKind, SubproblemError, DEFAULT_EIGEN_COEFFICIENT};

/// Returned steps may exceed the radius by this relative amount.
pub const STEP_NORM_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Full gradients, BFGS model.
    BaselineTr,
    /// Sub-sampled gradients, BFGS model on sampled gradient differences.
    SubsampledFo,
    /// Sub-sampled gradients and Hessians, exact sampled Hessian model.
    SubsampledSo,
}

impl Algorithm {
    /// Short name used on the command line and in reports.
    pub fn label(self) -> &'static str {
        match self {
            Algorithm::BaselineTr => "tr",
            Algorithm::SubsampledFo => "str",
            Algorithm::SubsampledSo => "str2",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        match label {
            "tr" => Some(Algorithm::BaselineTr),
            "str" => Some(Algorithm::SubsampledFo),
            "str2" => Some(Algorithm::SubsampledSo),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverParams {
    pub eps_g: f64,
    /// Curvature tolerance; used by the second-order method only.
    pub eps_h: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub delta0: f64,
    pub delta_max: f64,
    /// Coefficient of `(−λ_min)Δ²` in the second-order decrease test.
    pub kappa: f64,
    /// `None` means `100·d`.
    pub max_iterations: Option<usize>,
    pub ordering: OrderingRule,
    /// Compute the full-Hessian monitor only once `‖∇f‖ ≤ ε_g`. The stopping
    /// decision is the same either way.
    pub lazy_curvature_monitor: bool,
    /// Skip inner-loop trials whose sample fraction is at least 1.
    pub skip_vacuous_trials: bool,
    pub bfgs_pairing: BfgsPairing,
}

/// Which sampled gradient at `x_{k+1}` is paired with the accepted one at
/// `x_k` to form the BFGS difference `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BfgsPairing {
    /// The sample of the current iteration. After a failed step the model is
    /// rebuilt from the last accepted matrix with the new sample, so `B_k`
    /// always satisfies the secant equation for the gradient in the model.
    #[default]
    CurrentSample,
    /// The sample of the first iteration at `x_{k+1}`; the update is applied
    /// once and kept through later failures.
    FirstSample,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            eps_g: 1e-5,
            eps_h: 1e-5,
            gamma: 1.1,
            alpha: 1e-4,
            delta0: 1.0,
            delta_max: 50.0,
            kappa: DEFAULT_EIGEN_COEFFICIENT,
            max_iterations: None,
            ordering: OrderingRule::ValueDescending,
            lazy_curvature_monitor: true,
            skip_vacuous_trials: true,
            bfgs_pairing: BfgsPairing::CurrentSample,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<(), SolveError> {
        let bad = |msg: String| Err(SolveError::InvalidParams(msg));
        if !(self.eps_g > 0.0) || !(self.eps_h > 0.0) {
            return bad(format!(
                "tolerances must be positive (eps_g = {}, eps_h = {})",
                self.eps_g, self.eps_h
            ));
        }
        if !(self.gamma > 1.0) || !self.gamma.is_finite() {
            return bad(format!("gamma = {} must exceed 1", self.gamma));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha = {} must lie in (0, 1)", self.alpha));
        }
        if !(self.delta_max > 0.0) || !self.delta_max.is_finite() {
            return bad(format!("delta_max = {} must be positive", self.delta_max));
        }
        if !(self.delta0 > 0.0 && self.delta0 <= self.delta_max) {
            return bad(format!(
                "delta0 = {} must lie in (0, delta_max]",
                self.delta0
            ));
        }
        if !(self.kappa > 0.0 && self.kappa <= 1.0) {
            return bad(format!("kappa = {} must lie in (0, 1]", self.kappa));
        }
        if self.max_iterations == Some(0) {
            return bad("max_iterations must be positive".into());
        }
        Ok(())
    }

    pub fn max_iterations_for(&self, d: usize) -> usize {
        self.max_iterations.unwrap_or(100 * d)
    }
}

/// One trust-region iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub success: bool,
    /// Radius used at this iteration.
    pub delta: f64,
    /// Accepted inner-loop index; `None` for the baseline.
    pub j_k: Option<usize>,
    pub sample_size_g: usize,
    pub sample_size_h: Option<usize>,
    /// `f(x_k)`.
    pub f_value: f64,
    /// `‖∇f(x_k)‖` from the stopping monitor.
    pub full_grad_norm: f64,
    pub rho: f64,
    pub model_decrease: f64,
    pub branch: Option<Branch>,
    /// `FE·d + 3·GE` after this iteration.
    pub cumulative_cost: u64,
    pub fraction_g: Option<f64>,
    pub fraction_h: Option<f64>,
    /// Gradient sample size at every inner-loop trial.
    pub trial_sizes_g: Vec<usize>,
    pub step_kind: StepKind,
    pub step_norm: f64,
    /// Iteration at which the ordering in use was computed.
    pub ordering_anchor: usize,
    /// `f(x_k + d_k)`.
    pub trial_value: f64,
    /// Whether `B_k` admitted a Cholesky factorization (BFGS models only).
    pub factorized: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
    DegenerateModel,
}

impl Termination {
    pub fn label(self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIterations => "max_iterations",
            Termination::DegenerateModel => "degenerate_model",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub algorithm: Algorithm,
    pub problem: String,
    pub d: usize,
    pub n: usize,
    /// First `k` passing the stopping test.
    pub hitting_index: Option<usize>,
    pub termination: Termination,
    pub fe_count: u64,
    pub ge_count: u64,
    pub he_count: u64,
    pub cost: u64,
    pub records: Vec<IterationRecord>,
    pub final_point: DVector<f64>,
    pub final_value: f64,
    pub final_grad_norm: f64,
    /// `λ_min(∇²f)` at the final point, when the monitor computed it.
    pub final_min_curvature: Option<f64>,
    pub bfgs_skipped: usize,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }

    pub fn successful_iterations(&self) -> impl Iterator<Item = &IterationRecord> {
        self.records.iter().filter(|r| r.success)
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("invariant violated at iteration {iteration}: {reason}")]
    InvariantViolation {
        iteration: usize,
        reason: String,
        report: Box<SolveReport>,
    },
}

/// `ρ = (f_old − f_new)/decrease`, or `None` when the predicted decrease is
/// not above `1e-12·(1 + |f_old|)`.
pub fn acceptance_ratio(f_old: f64, f_new: f64, decrease: f64) -> Option<f64> {
    if decrease > 1e-12 * (1.0 + f_old.abs()) {
        Some((f_old - f_new) / decrease)
    } else {
        None
    }
}

pub fn radius_update(delta: f64, success: bool, delta_max: f64) -> f64 {
    if success {
        (2.0 * delta).min(delta_max)
    } else {
        0.5 * delta
    }
}

/// Sampled model data produced by Step 1 of an iteration.
struct SampledModel {
    gradient: DVector<f64>,
    hessian: Option<DMatrix<f64>>,
    j_k: Option<usize>,
    sample_size_g: usize,
    sample_size_h: Option<usize>,
    fraction_g: Option<f64>,
    fraction_h: Option<f64>,
    trial_sizes_g: Vec<usize>,
    branch: Option<Branch>,
}

struct Run<'a, P: ?Sized> {
    problem: &'a P,
    algorithm: Algorithm,
    params: &'a SolverParams,
    d: usize,
    ledger: EvaluationLedger,
    x: DVector<f64>,
    f: f64,
    delta: f64,
    ordering: ComponentOrdering,
    /// BFGS matrix at the current iterate, before pairing with the current
    /// sample under [`BfgsPairing::CurrentSample`].
    bfgs: BfgsState,
    /// Point and sampled gradient of the last accepted iteration, awaiting
    /// the gradient at the new point for the BFGS update.
    pending: Option<(DVector<f64>, DVector<f64>)>,
    records: Vec<IterationRecord>,
    grad_norm: f64,
    min_curvature: Option<f64>,
}

impl<'a, P: FiniteSumProblem + ?Sized> Run<'a, P> {
    fn report(self, termination: Termination, hitting_index: Option<usize>) -> SolveReport {
        SolveReport {
            algorithm: self.algorithm,
            problem: self.problem.name().to_string(),
            d: self.d,
            n: self.problem.dim(),
            hitting_index,
            termination,
            fe_count: self.ledger.fe_count(),
            ge_count: self.ledger.ge_count(),
            he_count: self.ledger.he_count(),
            cost: self.ledger.cost(self.d),
            records: self.records,
            final_point: self.x,
            final_value: self.f,
            final_grad_norm: self.grad_norm,
            final_min_curvature: self.min_curvature,
            bfgs_skipped: self.bfgs.skipped(),
        }
    }

    fn violation(self, k: usize, reason: String) -> SolveError {
        SolveError::InvariantViolation {
            iteration: k,
            reason,
            report: Box::new(self.report(Termination::MaxIterations, None)),
        }
    }

    /// Full-derivative stopping test (not charged to the ledger).
    fn stationary(&mut self) -> Result<bool, ProblemError> {
        let g = problem::unmetered_full_gradient(self.problem, &self.x)?;
        self.grad_norm = g.norm();
        let small_gradient = self.grad_norm <= self.params.eps_g;
        if self.algorithm != Algorithm::SubsampledSo {
            self.min_curvature = None;
            return Ok(small_gradient);
        }
        self.min_curvature = if small_gradient || !self.params.lazy_curvature_monitor {
            let h = problem::unmetered_full_hessian(self.problem, &self.x)?;
            Some(linalg::min_eigenvalue(&h))
        } else {
            None
        };
        Ok(small_gradient && self.min_curvature.is_some_and(|l| l >= -self.params.eps_h))
    }

    fn sample_model(&mut self) -> Result<SampledModel, SamplingError> {
        let p = self.params;
        match self.algorithm {
            Algorithm::BaselineTr => {
                let sample = SampleSet::full(self.d);
                let gradient =
                    problem::sample_gradient(self.problem, &sample, &self.x, &mut self.ledger)?;
                Ok(SampledModel {
                    gradient,
                    hessian: None,
                    j_k: None,
                    sample_size_g: self.d,
                    sample_size_h: None,
                    fraction_g: None,
                    fraction_h: None,
                    trial_sizes_g: vec![self.d],
                    branch: None,
                })
            }
            Algorithm::SubsampledFo => {
                let mut schedule =
                    SampleSchedule::new(p.gamma, p.delta_max, ScheduleMode::FirstOrder)?;
                schedule.skip_vacuous = p.skip_vacuous_trials;
                let gs = sampling::inner_loop_first_order(
                    self.problem,
                    &self.x,
                    self.delta,
                    &schedule,
                    p.eps_g,
                    &self.ordering,
                    &mut self.ledger,
                )?;
                Ok(SampledModel {
                    sample_size_g: gs.sample.cardinality(),
                    fraction_g: Some(gs.sample.fraction()),
                    gradient: gs.gradient,
                    hessian: None,
                    j_k: Some(gs.j),
                    sample_size_h: None,
                    fraction_h: None,
                    trial_sizes_g: gs.trial_sizes,
                    branch: None,
                })
            }
            Algorithm::SubsampledSo => {
                let mut sg =
                    SampleSchedule::new(p.gamma, p.delta_max, ScheduleMode::SecondOrderGradient)?;
                sg.skip_vacuous = p.skip_vacuous_trials;
                let sh =
                    SampleSchedule::new(p.gamma, p.delta_max, ScheduleMode::SecondOrderHessian)?;
                let cs = sampling::inner_loop_second_order(
                    self.problem,
                    &self.x,
                    self.delta,
                    &sg,
                    &sh,
                    p.eps_g,
                    p.eps_h,
                    &self.ordering,
                    &mut self.ledger,
                )?;
                Ok(SampledModel {
                    sample_size_g: cs.gradient_sample.cardinality(),
                    sample_size_h: Some(cs.hessian_sample.cardinality()),
                    fraction_g: Some(cs.gradient_sample.fraction()),
                    fraction_h: Some(cs.hessian_sample.fraction()),
                    trial_sizes_g: cs.trial_sizes.iter().map(|t| t.0).collect(),
                    gradient: cs.gradient,
                    hessian: Some(cs.hessian),
                    j_k: Some(cs.j),
                    branch: Some(cs.branch),
                })
            }
        }
    }
}

/// Runs `algorithm` from `x0`.
pub fn solve<P: FiniteSumProblem + ?Sized>(
    problem: &P,
    x0: &DVector<f64>,
    algorithm: Algorithm,
    params: &SolverParams,
) -> Result<SolveReport, SolveError> {
    params.validate()?;
    let d = problem.num_components();
    let n = problem.dim();
    let max_iterations = params.max_iterations_for(d);

    let mut ledger = EvaluationLedger::new();
    ledger.advance_point();
    let values = problem::component_values(problem, x0, &mut ledger)?;
    let mut run = Run {
        problem,
        algorithm,
        params,
        d,
        f: problem::mean_value(&values),
        ordering: ComponentOrdering::from_values(&values, 0, params.ordering),
        ledger,
        x: x0.clone(),
        delta: params.delta0,
        bfgs: BfgsState::identity(n),
        pending: None,
        records: Vec::new(),
        grad_norm: f64::NAN,
        min_curvature: None,
    };

    let mut k = 0;
    loop {
        if run.stationary()? {
            info!(
                "{} on {} (d = {d}) converged at k = {k}, cost {}",
                algorithm.label(),
                problem.name(),
                run.ledger.cost(d)
            );
            return Ok(run.report(Termination::Converged, Some(k)));
        }
        if k >= max_iterations {
            return Ok(run.report(Termination::MaxIterations, None));
        }

        let mut sampled = match run.sample_model() {
            Ok(s) => s,
            Err(SamplingError::Problem(e)) => return Err(e.into()),
            Err(e) => return Err(run.violation(k, e.to_string())),
        };

        let mut refreshed = None;
        let hessian = match sampled.hessian.take() {
            Some(h) => h,
            None => {
                match params.bfgs_pairing {
                    BfgsPairing::CurrentSample => {
                        if let Some((x_prev, g_prev)) = run.pending.as_ref() {
                            let mut b = run.bfgs.clone();
                            b.update(
                                &(&run.x - x_prev),
                                &hessian::gradient_difference(&sampled.gradient, g_prev),
                            );
                            refreshed = Some(b);
                        }
                    }
                    BfgsPairing::FirstSample => {
                        if let Some((x_prev, g_prev)) = run.pending.take() {
                            run.bfgs.update(
                                &(&run.x - x_prev),
                                &hessian::gradient_difference(&sampled.gradient, &g_prev),
                            );
                        }
                    }
                }
                refreshed.as_ref().unwrap_or(&run.bfgs).matrix().clone()
            }
        };

        let model = match QuadraticModel::new(sampled.gradient.clone(), hessian, run.delta, run.f) {
            Ok(m) => m,
            Err(e) => return Err(run.violation(k, e.to_string())),
        };
        let step = if algorithm == Algorithm::SubsampledSo {
            model.solve_second_order()
        } else {
            model.solve_first_order()
        };
        let step = match step {
            Ok(s) => s,
            Err(SubproblemError::Degenerate) => {
                return Ok(run.report(Termination::DegenerateModel, None));
            }
            Err(e) => return Err(run.violation(k, e.to_string())),
        };
        let step_norm = step.direction.norm();
        if step_norm > run.delta * (1.0 + STEP_NORM_SLACK) {
            let reason = format!("step norm {step_norm:e} exceeds radius {:e}", run.delta);
            return Err(run.violation(k, reason));
        }
        let decrease_ok = if algorithm == Algorithm::SubsampledSo {
            model.verify_second_order(&step.direction, params.kappa)
        } else {
            model.verify_first_order(&step.direction)
        };
        if !decrease_ok {
            return Err(run.violation(
                k,
                format!("{:?} step fails the decrease condition", step.kind),
            ));
        }

        let x_trial = &run.x + &step.direction;
        let trial_values = problem::component_values(problem, &x_trial, &mut run.ledger)?;
        let f_trial = problem::mean_value(&trial_values);
        let Some(rho) = acceptance_ratio(run.f, f_trial, step.decrease) else {
            debug!("k = {k}: predicted decrease {:e} too small", step.decrease);
            return Ok(run.report(Termination::DegenerateModel, None));
        };
        let success = rho >= params.alpha;
        debug!(
            "k = {k}: delta = {:e}, |G| = {}, rho = {rho:e}, success = {success}",
            run.delta, sampled.sample_size_g
        );

        run.records.push(IterationRecord {
            k,
            success,
            delta: run.delta,
            j_k: sampled.j_k,
            sample_size_g: sampled.sample_size_g,
            sample_size_h: sampled.sample_size_h,
            f_value: run.f,
            full_grad_norm: run.grad_norm,
            rho,
            model_decrease: step.decrease,
            branch: sampled.branch,
            cumulative_cost: run.ledger.cost(d),
            fraction_g: sampled.fraction_g,
            fraction_h: sampled.fraction_h,
            trial_sizes_g: sampled.trial_sizes_g,
            step_kind: step.kind,
            step_norm,
            ordering_anchor: run.ordering.anchored_at(),
            trial_value: f_trial,
            factorized: step.factorized,
        });

        if success {
            if algorithm != Algorithm::SubsampledSo {
                if let Some(b) = refreshed {
                    run.bfgs = b;
                }
                run.pending = Some((run.x.clone(), sampled.gradient));
            }
            run.x = x_trial;
            run.f = f_trial;
            run.ledger.advance_point();
            run.ordering = ComponentOrdering::from_values(&trial_values, k + 1, params.ordering);
        }
        run.delta = radius_update(run.delta, success, params.delta_max);
        k += 1;
    }
}

/// Full-sample trust-region method with a BFGS model.
pub fn run_baseline_tr<P: FiniteSumProblem + ?Sized>(
    problem: &P,
    x0: &DVector<f64>,
    params: &SolverParams,
) -> Result<SolveReport, SolveError> {
    solve(problem, x0, Algorithm::BaselineTr, params)
}

/// First-order sub-sampled trust-region method.
pub fn run_first_order<P: FiniteSumProblem + ?Sized>(
    problem: &P,
    x0: &DVector<f64>,
    params: &SolverParams,
) -> Result<SolveReport, SolveError> {
    solve(problem, x0, Algorithm::SubsampledFo, params)
}

/// Second-order sub-sampled trust-region method.
pub fn run_second_order<P: FiniteSumProblem + ?Sized>(
    problem: &P,
    x0: &DVector<f64>,
    params: &SolverParams,
) -> Result<SolveReport, SolveError> {
    solve(problem, x0, Algorithm::SubsampledSo, params)
}
