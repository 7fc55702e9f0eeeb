//! Deterministic sample-size control.
//!
//! At trial `j` of an inner loop the sample fraction `h` shrinks
//! geometrically with `γ`, and the sample must contain at least
//! `⌈(1 − h)d⌉₊` components, where `⌈z⌉₊` is the smallest *positive* integer
//! not below `z`. Samples are prefixes of a [`ComponentOrdering`], so the
//! samples of one inner loop are nested and memoized gradients carry over
//! from trial to trial.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::ledger::EvaluationLedger;
use crate::linalg;
use crate::problem::{self, FiniteSumProblem, ProblemError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("radius {delta} outside (0, delta_max = {delta_max}]")]
    RadiusOutOfRange { delta: f64, delta_max: f64 },
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("prefix length {m} outside 1..={d}")]
    PrefixOutOfRange { m: usize, d: usize },
    #[error("inner sampling loop failed after {trials} trials, including a full sample; the stopping test was not checked")]
    InnerLoopExhausted { trials: usize },
}

/// An index subset of the components together with the fraction `h` it was
/// drawn for.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    indices: Vec<usize>,
    fraction: f64,
}

impl SampleSet {
    /// Validated sample: distinct indices below `d`, at least
    /// `required_cardinality(fraction, d)` of them.
    pub fn new(indices: Vec<usize>, fraction: f64, d: usize) -> Result<Self, ProblemError> {
        if indices.is_empty() {
            return Err(ProblemError::EmptySample);
        }
        let mut sorted = indices.clone();
        sorted.sort_unstable();
        if let Some(&i) = sorted.iter().find(|&&i| i >= d) {
            return Err(ProblemError::IndexOutOfRange { index: i, d });
        }
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(ProblemError::DuplicateIndex(w[0]));
        }
        let required = required_cardinality(fraction.clamp(0.0, 1.0), d);
        if indices.len() < required {
            return Err(ProblemError::CardinalityRule {
                size: indices.len(),
                required,
            });
        }
        Ok(Self { indices, fraction })
    }

    /// Any nonempty set of distinct indices (it satisfies the rule at `h = 1`).
    pub fn from_indices(indices: Vec<usize>, d: usize) -> Result<Self, ProblemError> {
        Self::new(indices, 1.0, d)
    }

    /// `{0, …, d−1}` at `h = 0`.
    pub fn full(d: usize) -> Self {
        Self {
            indices: (0..d).collect(),
            fraction: 0.0,
        }
    }

    pub(crate) fn unchecked(indices: Vec<usize>, fraction: f64) -> Self {
        Self { indices, fraction }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn fraction(&self) -> f64 {
        self.fraction
    }

    pub fn cardinality(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// `⌈(1 − h)d⌉₊`: the minimum sample size for fraction `h ∈ [0, 1]`.
pub fn required_cardinality(h: f64, d: usize) -> usize {
    debug_assert!((0.0..=1.0).contains(&h), "fraction {h} outside [0, 1]");
    let z = (1.0 - h) * d as f64;
    (z.ceil() as usize).clamp(1, d.max(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleMode {
    /// `h = Δ/(γ^j Δ_max)`.
    FirstOrder,
    /// `h = (Δ/Δ_max)²/γ^j`.
    SecondOrderGradient,
    /// `h = Δ/(γ^j Δ_max)`.
    SecondOrderHessian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSchedule {
    pub gamma: f64,
    pub delta_max: f64,
    pub mode: ScheduleMode,
    /// Skip trials whose fraction is at least 1. Such a trial only occurs at
    /// `Δ = Δmax, j = 0`, where the sampling-error bound says nothing and the
    /// cardinality rule degenerates to a single component.
    pub skip_vacuous: bool,
}

impl SampleSchedule {
    pub fn new(gamma: f64, delta_max: f64, mode: ScheduleMode) -> Result<Self, SamplingError> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(SamplingError::InvalidSchedule(format!(
                "gamma = {gamma} must exceed 1"
            )));
        }
        if !(delta_max > 0.0) || !delta_max.is_finite() {
            return Err(SamplingError::InvalidSchedule(format!(
                "delta_max = {delta_max} must be positive"
            )));
        }
        Ok(Self {
            gamma,
            delta_max,
            mode,
            skip_vacuous: true,
        })
    }

    /// Sample fraction at radius `delta` and trial `j`.
    pub fn fraction(&self, delta: f64, j: usize) -> Result<f64, SamplingError> {
        if !(delta > 0.0) || delta > self.delta_max {
            return Err(SamplingError::RadiusOutOfRange {
                delta,
                delta_max: self.delta_max,
            });
        }
        let decay = self.gamma.powi(j as i32);
        let ratio = delta / self.delta_max;
        Ok(match self.mode {
            ScheduleMode::FirstOrder | ScheduleMode::SecondOrderHessian => {
                delta / (decay * self.delta_max)
            }
            ScheduleMode::SecondOrderGradient => ratio * ratio / decay,
        })
    }

    /// Whether trial `j` at `delta` is skipped as vacuous.
    pub fn skips(&self, delta: f64, j: usize) -> Result<bool, SamplingError> {
        Ok(self.skip_vacuous && self.fraction(delta, j)? >= 1.0)
    }

    /// Smallest trial index whose required cardinality is the full `d`.
    pub fn full_sample_trial(&self, delta: f64, d: usize) -> Result<usize, SamplingError> {
        const LIMIT: usize = 1_000_000;
        for j in 0..LIMIT {
            if required_cardinality(self.fraction(delta, j)?, d) >= d {
                return Ok(j);
            }
        }
        Err(SamplingError::InvalidSchedule(format!(
            "gamma = {} too close to 1: no full sample within {LIMIT} trials",
            self.gamma
        )))
    }
}

/// How components are ranked before prefix selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OrderingRule {
    /// Nonincreasing component value, ties by ascending index.
    #[default]
    ValueDescending,
    /// Ascending index, ignoring values.
    IndexAscending,
}

/// A permutation of the components, computed at iteration `anchored_at`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentOrdering {
    permutation: Vec<usize>,
    anchored_at: usize,
}

impl ComponentOrdering {
    pub fn from_values(values: &[f64], anchored_at: usize, rule: OrderingRule) -> Self {
        let mut permutation: Vec<usize> = (0..values.len()).collect();
        if rule == OrderingRule::ValueDescending {
            permutation.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
        }
        Self {
            permutation,
            anchored_at,
        }
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn anchored_at(&self) -> usize {
        self.anchored_at
    }

    pub fn len(&self) -> usize {
        self.permutation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.permutation.is_empty()
    }
}

/// Ranks the components by value at `x`. The `d` component values are
/// charged as one full function evaluation.
pub fn order_components<P: FiniteSumProblem + ?Sized>(
    problem: &P,
    x: &DVector<f64>,
    ledger: &mut EvaluationLedger,
    anchored_at: usize,
) -> Result<ComponentOrdering, SamplingError> {
    let values = problem::component_values(problem, x, ledger)?;
    Ok(ComponentOrdering::from_values(
        &values,
        anchored_at,
        OrderingRule::ValueDescending,
    ))
}

/// The first `m` components of `ordering`.
pub fn select_prefix(
    ordering: &ComponentOrdering,
    m: usize,
    h: f64,
) -> Result<SampleSet, SamplingError> {
    let d = ordering.len();
    if m == 0 || m > d {
        return Err(SamplingError::PrefixOutOfRange { m, d });
    }
    Ok(SampleSet::unchecked(ordering.permutation[..m].to_vec(), h))
}

/// Outcome of the first-order inner loop.
#[derive(Debug, Clone)]
pub struct GradientSample {
    pub sample: SampleSet,
    pub gradient: DVector<f64>,
    /// Index of the accepted trial.
    pub j: usize,
    /// Sample size at every trial, accepted one last.
    pub trial_sizes: Vec<usize>,
}

/// Grows a prefix sample until `‖∇f_G(x)‖ > 4ε_g/5`.
///
/// A trial never uses fewer components than are already memoized at `x`:
/// those are free, and the cardinality rule is only a lower bound. The caller
/// must have checked `‖∇f(x)‖ > ε_g`; then the test passes at the latest when
/// the sample is full.
pub fn inner_loop_first_order<P: FiniteSumProblem + ?Sized>(
    problem: &P,
    x: &DVector<f64>,
    delta: f64,
    schedule: &SampleSchedule,
    eps_g: f64,
    ordering: &ComponentOrdering,
    ledger: &mut EvaluationLedger,
) -> Result<GradientSample, SamplingError> {
    let d = problem.num_components();
    let threshold = 4.0 * eps_g / 5.0;
    let last = schedule.full_sample_trial(delta, d)? + 2;
    let mut trial_sizes = Vec::new();
    for j in 0..=last {
        if schedule.skips(delta, j)? {
            continue;
        }
        let h = schedule.fraction(delta, j)?;
        let m = required_cardinality(h, d).max(ledger.cached_gradients());
        let sample = select_prefix(ordering, m, h)?;
        let gradient = problem::sample_gradient(problem, &sample, x, ledger)?;
        trial_sizes.push(m);
        if gradient.norm() > threshold {
            return Ok(GradientSample {
                sample,
                gradient,
                j,
                trial_sizes,
            });
        }
    }
    Err(SamplingError::InnerLoopExhausted { trials: last + 1 })
}

/// Which test ended the second-order inner loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `‖∇f_G(x)‖ > 4ε_g/5`.
    Gradient,
    /// `−λ_min(∇²f_H(x)) > 4ε_H/5`.
    Hessian,
}

/// Outcome of the second-order inner loop.
#[derive(Debug, Clone)]
pub struct CurvatureSample {
    pub gradient_sample: SampleSet,
    pub hessian_sample: SampleSet,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
    pub j: usize,
    pub branch: Branch,
    /// `(|G|, |H|)` at every trial, accepted one last.
    pub trial_sizes: Vec<(usize, usize)>,
}

/// Second-order inner loop: at trial `j` first tries the gradient test on
/// `G` (fraction from `schedule_g`); if it fails, tries the curvature test on
/// `H` (fraction from `schedule_h`). When the gradient test passes, `H` is
/// the prefix sized by `schedule_h` at the same trial.
///
/// The caller must have checked that `x` is not `(ε_g, ε_H)`-stationary.
#[allow(clippy::too_many_arguments)]
pub fn inner_loop_second_order<P: FiniteSumProblem + ?Sized>(
    problem: &P,
    x: &DVector<f64>,
    delta: f64,
    schedule_g: &SampleSchedule,
    schedule_h: &SampleSchedule,
    eps_g: f64,
    eps_h: f64,
    ordering: &ComponentOrdering,
    ledger: &mut EvaluationLedger,
) -> Result<CurvatureSample, SamplingError> {
    let d = problem.num_components();
    let grad_threshold = 4.0 * eps_g / 5.0;
    let curv_threshold = 4.0 * eps_h / 5.0;
    let last = schedule_g
        .full_sample_trial(delta, d)?
        .max(schedule_h.full_sample_trial(delta, d)?)
        + 2;
    let mut trial_sizes = Vec::new();
    for j in 0..=last {
        if schedule_g.skips(delta, j)? {
            continue;
        }
        let hg = schedule_g.fraction(delta, j)?;
        let mg = required_cardinality(hg, d).max(ledger.cached_gradients());
        let gradient_sample = select_prefix(ordering, mg, hg)?;
        let gradient = problem::sample_gradient(problem, &gradient_sample, x, ledger)?;
        let hh = schedule_h.fraction(delta, j)?;
        let mh = required_cardinality(hh, d).max(ledger.cached_hessians());
        let hessian_sample = select_prefix(ordering, mh, hh)?;
        trial_sizes.push((gradient_sample.cardinality(), hessian_sample.cardinality()));
        let hessian = problem::sample_hessian(problem, &hessian_sample, x, ledger)?;
        let branch = if gradient.norm() > grad_threshold {
            Some(Branch::Gradient)
        } else if -linalg::min_eigenvalue(&hessian) > curv_threshold {
            Some(Branch::Hessian)
        } else {
            None
        };
        if let Some(branch) = branch {
            return Ok(CurvatureSample {
                gradient_sample,
                hessian_sample,
                gradient,
                hessian,
                j,
                branch,
                trial_sizes,
            });
        }
    }
    Err(SamplingError::InnerLoopExhausted { trials: last + 1 })
}
