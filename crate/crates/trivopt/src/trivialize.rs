//! The dynamic-trivialisation engine.
//!
//! A run holds a basepoint `p` on the manifold and raw tangent coordinates
//! `v`, and optimises the pulled-back objective `f(triv(p, v))` with a
//! Euclidean update rule. A pluggable stopping rule decides when to fold
//! the accumulated coordinates into a new basepoint: on a switch the base
//! becomes `triv(p, v)`, the raw coordinates reset to zero and the
//! optimiser forgets its moment buffers.
//!
//! Keeping the rule at `Never` gives a static parametrisation around the
//! initial point; `Always` folds after every step, which reproduces
//! Riemannian gradient descent exactly.

use crate::dense::Matrix;
use crate::manifolds::{pullback_grad, triv, ManifoldError, ManifoldPoint, ManifoldSpec, TangentCoords};
use crate::optimizers::OptimizerState;

/// Decides after each accepted step whether to fold the raw coordinates
/// into a new basepoint.
#[derive(Clone, Debug, PartialEq)]
pub enum StoppingRule {
    /// Never switch: a static parametrisation around the initial point.
    Never,
    /// Switch after every step; recovers Riemannian gradient descent.
    Always,
    /// Switch once the inner step count reaches `k` accepted steps.
    EveryK(u64),
    /// Switch when the ratio of the raw gradient norm to the Riemannian
    /// gradient norm leaves `[eps_low, eps_high]`. A small ratio signals
    /// a degenerating parametrisation near the conjugate locus; a large
    /// one signals an overly stretched chart.
    GradRatio { eps_low: f64, eps_high: f64 },
}

impl StoppingRule {
    /// The two-sided gradient-ratio rule with the default band
    /// `[0.1, 10]`.
    pub fn grad_ratio_default() -> Self {
        StoppingRule::GradRatio {
            eps_low: 0.1,
            eps_high: 10.0,
        }
    }

    fn validate(&self) {
        match *self {
            StoppingRule::EveryK(k) => {
                assert!(k > 0, "EveryK needs a positive period, got {k}");
            }
            StoppingRule::GradRatio { eps_low, eps_high } => {
                assert!(
                    0.0 < eps_low && eps_low < 1.0,
                    "grad-ratio lower threshold must lie in (0, 1), got {eps_low}"
                );
                assert!(
                    eps_high > 1.0,
                    "grad-ratio upper threshold must exceed 1, got {eps_high}"
                );
            }
            StoppingRule::Never | StoppingRule::Always => {}
        }
    }

    /// Whether the rule fires after a step, given the inner step count
    /// (already incremented for the step) and the gradient ratio
    /// observed during it.
    pub fn fires(&self, inner_k: u64, ratio: f64) -> bool {
        match *self {
            StoppingRule::Never => false,
            StoppingRule::Always => true,
            StoppingRule::EveryK(k) => inner_k >= k,
            StoppingRule::GradRatio { eps_low, eps_high } => ratio < eps_low || ratio > eps_high,
        }
    }
}

/// What one accepted step observed, in evaluation order: the objective
/// value and gradient norms belong to the point before the update.
#[derive(Clone, Debug)]
pub struct StepRecord {
    /// Zero-based global index of the step.
    pub iter: u64,
    /// Objective value at the pre-update point.
    pub f_value: f64,
    /// Norm of the pulled-back gradient at the current raw coordinates.
    pub grad_norm_raw: f64,
    /// Norm of the Riemannian gradient at the current manifold point,
    /// equal to the pulled-back gradient norm at zero offset.
    pub grad_norm_riemannian: f64,
    /// Whether the stopping rule folded the coordinates into a new
    /// basepoint at the end of this step.
    pub stop_fired: bool,
    /// Index of the basepoint this step ran under.
    pub outer_i: u64,
}

/// Every [`StepRecord`] of a call to [`TrivRun::run`], in order.
#[derive(Clone, Debug, Default)]
pub struct Trace {
    pub records: Vec<StepRecord>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&StepRecord> {
        self.records.last()
    }
}

/// Data-dependent failures of a run.
#[derive(Clone, Debug, thiserror::Error)]
pub enum TrivError {
    #[error("objective diverged at iteration {iteration}: f = {f_value:.6e}")]
    Diverged { iteration: u64, f_value: f64 },
    #[error("trivialisation produced an invalid point at iteration {iteration}: {source}")]
    Geometry {
        iteration: u64,
        #[source]
        source: ManifoldError,
    },
}

/// An objective defined on manifold points: a value and an ambient
/// (Euclidean) gradient, one matrix per component.
///
/// Implementations must be reentrant; the engine may evaluate them at
/// any valid point.
pub trait Objective {
    fn value(&self, point: &ManifoldPoint) -> f64;
    fn ambient_grad(&self, point: &ManifoldPoint) -> Vec<Matrix>;
}

impl<F, G> Objective for (F, G)
where
    F: Fn(&ManifoldPoint) -> f64,
    G: Fn(&ManifoldPoint) -> Vec<Matrix>,
{
    fn value(&self, point: &ManifoldPoint) -> f64 {
        (self.0)(point)
    }

    fn ambient_grad(&self, point: &ManifoldPoint) -> Vec<Matrix> {
        (self.1)(point)
    }
}

/// Objective values above this are treated as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// The mutable state of one optimisation: basepoint, raw coordinates,
/// optimiser, stopping rule, and counters.
///
/// The raw coordinates are zero exactly when the basepoint was just set;
/// all counters are monotone within an outer round.
#[derive(Clone, Debug)]
pub struct TrivRun {
    spec: ManifoldSpec,
    base: ManifoldPoint,
    raw: TangentCoords,
    opt: OptimizerState,
    rule: StoppingRule,
    outer_i: u64,
    inner_k: u64,
    iter: u64,
    version: u64,
    cache: Option<(u64, ManifoldPoint)>,
    eval_count: u64,
}

impl TrivRun {
    /// Start a run at `base` with the given optimiser and stopping rule.
    ///
    /// # Panics
    /// Panics if the rule's parameters are out of range.
    pub fn new(base: ManifoldPoint, opt: OptimizerState, rule: StoppingRule) -> Self {
        rule.validate();
        let spec = base.spec().clone();
        let raw = TangentCoords::zeros(&spec);
        TrivRun {
            spec,
            base,
            raw,
            opt,
            rule,
            outer_i: 0,
            inner_k: 0,
            iter: 0,
            version: 0,
            cache: None,
            eval_count: 0,
        }
    }

    pub fn spec(&self) -> &ManifoldSpec {
        &self.spec
    }

    pub fn base(&self) -> &ManifoldPoint {
        &self.base
    }

    pub fn raw(&self) -> &TangentCoords {
        &self.raw
    }

    /// Index of the current basepoint (number of switches so far).
    pub fn outer_index(&self) -> u64 {
        self.outer_i
    }

    /// Accepted steps since the last basepoint switch.
    pub fn inner_index(&self) -> u64 {
        self.inner_k
    }

    /// Total accepted steps.
    pub fn iterations(&self) -> u64 {
        self.iter
    }

    /// How many trivialisation evaluations the cache has performed.
    pub fn eval_count(&self) -> u64 {
        self.eval_count
    }

    /// Overwrite the raw coordinates, invalidating the cache. Intended
    /// for diagnostics; counters are untouched.
    ///
    /// # Panics
    /// Panics if the coordinates belong to a different manifold spec.
    pub fn set_raw(&mut self, raw: TangentCoords) {
        assert_eq!(
            raw.spec(),
            &self.spec,
            "shape error: raw coordinates belong to a different manifold"
        );
        self.raw = raw;
        self.version += 1;
    }

    fn ensure_eval(&mut self) -> Result<ManifoldPoint, ManifoldError> {
        if let Some((version, ref point)) = self.cache {
            if version == self.version {
                return Ok(point.clone());
            }
        }
        let point = triv(&self.base, &self.raw)?;
        self.eval_count += 1;
        self.cache = Some((self.version, point.clone()));
        Ok(point)
    }

    /// The current manifold point `triv(base, raw)`, memoised on a
    /// version counter: repeated calls without mutation perform no new
    /// trivialisation evaluations.
    ///
    /// # Panics
    /// Panics if the current state does not evaluate to a valid point.
    pub fn cached_eval(&mut self) -> ManifoldPoint {
        self.ensure_eval()
            .expect("current state must evaluate to a valid point")
    }

    /// The ratio of the raw gradient norm at the current coordinates to
    /// the Riemannian gradient norm at the current point. Defined as 1
    /// when the Riemannian norm is below 1e-15, and exactly 1 at zero
    /// offset.
    pub fn grad_ratio<O: Objective>(&mut self, objective: &O) -> f64 {
        let point = self.cached_eval();
        let g = objective.ambient_grad(&point);
        let denom = pullback_grad(&point, &TangentCoords::zeros(&self.spec), &g).norm();
        if denom <= 1e-15 {
            1.0
        } else {
            pullback_grad(&self.base, &self.raw, &g).norm() / denom
        }
    }

    /// One step: evaluate the point, pull the ambient gradient back to
    /// raw coordinates, apply the optimiser, then consult the stopping
    /// rule. When it fires, the basepoint moves to `triv(base, raw)`,
    /// the raw coordinates reset to zero and the optimiser state is
    /// fully reset.
    pub fn step<O: Objective>(&mut self, objective: &O) -> Result<StepRecord, TrivError> {
        let iteration = self.iter;
        if !self.raw.norm().is_finite() {
            return Err(TrivError::Diverged {
                iteration,
                f_value: f64::NAN,
            });
        }
        let point = self
            .ensure_eval()
            .map_err(|source| TrivError::Geometry { iteration, source })?;
        let f_value = objective.value(&point);
        if !f_value.is_finite() || f_value > DIVERGENCE_LIMIT {
            return Err(TrivError::Diverged { iteration, f_value });
        }

        let g = objective.ambient_grad(&point);
        let raw_grad = pullback_grad(&self.base, &self.raw, &g);
        let grad_norm_raw = raw_grad.norm();
        let grad_norm_riemannian =
            pullback_grad(&point, &TangentCoords::zeros(&self.spec), &g).norm();
        let ratio = if grad_norm_riemannian <= 1e-15 {
            1.0
        } else {
            grad_norm_raw / grad_norm_riemannian
        };

        self.raw = self.opt.update(&self.raw, &raw_grad);
        self.version += 1;
        self.inner_k += 1;
        self.iter += 1;

        let outer_i = self.outer_i;
        let stop_fired = self.rule.fires(self.inner_k, ratio);
        if stop_fired {
            let new_base = triv(&self.base, &self.raw)
                .map_err(|source| TrivError::Geometry { iteration, source })?;
            self.base = new_base;
            self.raw.set_zero();
            self.opt.reset();
            self.outer_i += 1;
            self.inner_k = 0;
            self.version += 1;
        }

        Ok(StepRecord {
            iter: iteration,
            f_value,
            grad_norm_raw,
            grad_norm_riemannian,
            stop_fired,
            outer_i,
        })
    }

    /// Step until the raw gradient norm drops below `tol_grad` or
    /// `max_iter` steps were taken, recording every step.
    pub fn run<O: Objective>(
        &mut self,
        objective: &O,
        tol_grad: f64,
        max_iter: u64,
    ) -> Result<Trace, TrivError> {
        let mut records = Vec::new();
        for _ in 0..max_iter {
            let record = self.step(objective)?;
            let done = record.grad_norm_raw < tol_grad;
            records.push(record);
            if done {
                break;
            }
        }
        Ok(Trace { records })
    }
}
