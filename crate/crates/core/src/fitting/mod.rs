//! Least-squares estimation of scaling-law parameters from experiment records.
//!
//! Fits run Levenberg–Marquardt in an unconstrained space (`θ = exp(u)` for
//! positive parameters, a logistic map for `s∞`) from every start of a
//! multistart grid, keeping the lowest-SSE converged run. Starts run in
//! parallel; the winner is chosen by SSE and then by start index, so the
//! result does not depend on scheduling.

mod bootstrap;
mod lm;
mod starts;
mod synthetic;
mod transform;

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ParamSet, ScalePoint, ScalingForm};
use crate::records::{infer_axis, ExperimentRecord, MetricKind, ScaleAxis};

pub use bootstrap::{bootstrap_ci, percentile, BootstrapSummary, ParamInterval};
pub use synthetic::{generate_synthetic, log_spaced, RecordLayout, SyntheticSet};

use lm::{LeastSquares, LmSettings, Termination};
use transform::Transform;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResidualSpace {
    #[default]
    Linear,
    /// `ln(model) − ln(observed)`; needs strictly positive metrics.
    Log,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub max_iterations: usize,
    pub sse_rel_tol: f64,
    pub step_tol: f64,
    pub initial_damping: f64,
    pub damping_up: f64,
    pub damping_down: f64,
    /// Explicit start vectors in parameter order. `None` builds the default
    /// data-driven grid.
    pub multistart_grid: Option<Vec<Vec<f64>>>,
    pub residual_space: ResidualSpace,
    pub seed: u64,
    /// Scale variable for single-variable forms. `None` infers it from which
    /// record field varies.
    pub axis: Option<ScaleAxis>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            sse_rel_tol: 1e-10,
            step_tol: 1e-12,
            initial_damping: 1e-3,
            damping_up: 10.0,
            damping_down: 0.1,
            multistart_grid: None,
            residual_space: ResidualSpace::Linear,
            seed: 0,
            axis: None,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("sse_rel_tol", self.sse_rel_tol),
            ("step_tol", self.step_tol),
            ("initial_damping", self.initial_damping),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be >= 1".into()));
        }
        if !(self.damping_up > 1.0 && self.damping_down > 0.0 && self.damping_down < 1.0) {
            return Err(Error::Config(format!(
                "need damping_up > 1 > damping_down > 0, got {} / {}",
                self.damping_up, self.damping_down
            )));
        }
        if matches!(&self.multistart_grid, Some(g) if g.is_empty()) {
            return Err(Error::Config("multistart_grid must not be empty".into()));
        }
        Ok(())
    }

    fn lm_settings(&self) -> LmSettings {
        LmSettings {
            max_iterations: self.max_iterations,
            sse_rel_tol: self.sse_rel_tol,
            step_tol: self.step_tol,
            initial_damping: self.initial_damping,
            damping_up: self.damping_up,
            damping_down: self.damping_down,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitStatus {
    Converged,
    MaxIterations,
    /// Converged, but a parameter sits on a transform boundary
    /// (for example `ε∞` driven to zero).
    Degenerate,
}

impl fmt::Display for FitStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitStatus::Converged => "converged",
            FitStatus::MaxIterations => "max-iterations",
            FitStatus::Degenerate => "degenerate",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub form: ScalingForm,
    /// Scale variable for single-variable forms; `None` for combined forms.
    pub axis: Option<ScaleAxis>,
    pub params: ParamSet,
    pub r_squared: f64,
    pub sse: f64,
    /// Per-record residuals in the configured residual space, input order.
    pub residuals: Vec<f64>,
    pub residual_space: ResidualSpace,
    pub converged: FitStatus,
    pub iterations: usize,
    pub start_index: usize,
    pub bootstrap_ci: Option<BootstrapSummary>,
}

impl FitResult {
    /// Evaluation point for a record under this fit's axis convention.
    pub fn point_for(&self, record: &ExperimentRecord) -> ScalePoint {
        record_point(self.form, self.axis, record)
    }

    pub fn require_converged(&self) -> Result<()> {
        match self.converged {
            FitStatus::Converged => Ok(()),
            other => Err(Error::RefusesUnconverged(other.to_string())),
        }
    }
}

pub(crate) fn record_point(form: ScalingForm, axis: Option<ScaleAxis>, r: &ExperimentRecord) -> ScalePoint {
    if form.is_combined() {
        ScalePoint::Pair {
            data: r.data_size,
            model: r.n_params,
        }
    } else {
        ScalePoint::Single(r.scale(axis.unwrap_or(ScaleAxis::Model)))
    }
}

/// Coefficient of determination `1 − SS_res / SS_tot`.
pub fn r_squared(observed: &[f64], predicted: &[f64]) -> Result<f64> {
    if observed.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            left: observed.len(),
            right: predicted.len(),
        });
    }
    if observed.is_empty() {
        return Err(Error::TooFewRecords { needed: 1, got: 0 });
    }
    let mean = observed.iter().sum::<f64>() / observed.len() as f64;
    let ss_tot: f64 = observed.iter().map(|y| (y - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let ss_res: f64 = observed
        .iter()
        .zip(predicted)
        .map(|(y, p)| (y - p).powi(2))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// The fitting problem in unconstrained coordinates.
struct Problem {
    form: ScalingForm,
    points: Vec<ScalePoint>,
    observed: Vec<f64>,
    sqrt_weights: Vec<f64>,
    space: ResidualSpace,
    transforms: Vec<Transform>,
}

impl Problem {
    fn params_at(&self, u: &[f64]) -> Vec<f64> {
        self.transforms
            .iter()
            .zip(u)
            .map(|(t, &v)| t.to_param(v))
            .collect()
    }

    fn residual(&self, i: usize, value: f64) -> f64 {
        let diff = match self.space {
            ResidualSpace::Linear => value - self.observed[i],
            ResidualSpace::Log => value.ln() - self.observed[i].ln(),
        };
        self.sqrt_weights[i] * diff
    }
}

impl LeastSquares for Problem {
    fn n_params(&self) -> usize {
        self.form.n_params()
    }

    fn residuals(&self, u: &[f64]) -> Option<DVector<f64>> {
        let params = ParamSet::relaxed(self.form, &self.params_at(u)).ok()?;
        let mut out = DVector::zeros(self.points.len());
        for (i, &pt) in self.points.iter().enumerate() {
            let r = self.residual(i, params.eval(pt).ok()?);
            if !r.is_finite() {
                return None;
            }
            out[i] = r;
        }
        Some(out)
    }

    fn residuals_and_jacobian(&self, u: &[f64]) -> Option<(DVector<f64>, DMatrix<f64>)> {
        let params = ParamSet::relaxed(self.form, &self.params_at(u)).ok()?;
        let chain: Vec<f64> = self.transforms.iter().zip(u).map(|(t, &v)| t.derivative(v)).collect();
        let n = self.n_params();
        let mut res = DVector::zeros(self.points.len());
        let mut jac = DMatrix::zeros(self.points.len(), n);
        for (i, &pt) in self.points.iter().enumerate() {
            let (value, grad) = params.eval_with_grad(pt).ok()?;
            let r = self.residual(i, value);
            if !r.is_finite() {
                return None;
            }
            res[i] = r;
            let outer = match self.space {
                ResidualSpace::Linear => self.sqrt_weights[i],
                ResidualSpace::Log => self.sqrt_weights[i] / value,
            };
            for j in 0..n {
                let v = outer * grad[j] * chain[j];
                if !v.is_finite() {
                    return None;
                }
                jac[(i, j)] = v;
            }
        }
        Some((res, jac))
    }
}

struct StartOutcome {
    index: usize,
    run: lm::LmRun,
}

/// Fits `form` to `records` by unweighted least squares.
pub fn fit(form: ScalingForm, records: &[ExperimentRecord], config: &FitConfig) -> Result<FitResult> {
    fit_weighted(form, records, None, config)
}

/// Fits with optional per-record weights (default 1).
pub fn fit_weighted(
    form: ScalingForm,
    records: &[ExperimentRecord],
    weights: Option<&[f64]>,
    config: &FitConfig,
) -> Result<FitResult> {
    config.validate()?;
    let needed = form.n_params() + 1;
    if records.len() < needed {
        return Err(Error::TooFewRecords {
            needed,
            got: records.len(),
        });
    }
    let kind = records[0].metric_kind;
    if records.iter().any(|r| r.metric_kind != kind) {
        return Err(Error::MixedMetricKinds);
    }
    if kind != form.metric_kind() {
        return Err(Error::MetricFormMismatch { form, metric: kind });
    }
    let axis = if form.is_combined() {
        None
    } else {
        Some(match config.axis {
            Some(a) => a,
            None => infer_axis(records)?,
        })
    };
    let sqrt_weights = match weights {
        None => vec![1.0; records.len()],
        Some(w) => {
            if w.len() != records.len() {
                return Err(Error::LengthMismatch {
                    left: w.len(),
                    right: records.len(),
                });
            }
            if let Some(bad) = w.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::InvalidInput(format!("weights must be finite and >= 0, got {bad}")));
            }
            w.iter().map(|v| v.sqrt()).collect()
        }
    };
    let observed: Vec<f64> = records.iter().map(|r| r.metric_value).collect();
    if config.residual_space == ResidualSpace::Log && observed.iter().any(|&y| y <= 0.0) {
        return Err(Error::Config("log residuals need strictly positive metric values".into()));
    }
    let points: Vec<ScalePoint> = records.iter().map(|r| record_point(form, axis, r)).collect();

    let problem = Problem {
        form,
        points,
        observed,
        sqrt_weights,
        space: config.residual_space,
        transforms: Transform::for_form(form),
    };

    let starts = match &config.multistart_grid {
        Some(grid) => {
            for s in grid {
                ParamSet::from_values(form, s)
                    .map_err(|e| Error::Config(format!("multistart_grid entry {s:?}: {e}")))?;
            }
            grid.clone()
        }
        None => starts::default_starts(form, &problem.points, &problem.observed, kind, config.seed),
    };

    let settings = config.lm_settings();
    let outcomes: Vec<Option<StartOutcome>> = starts
        .par_iter()
        .enumerate()
        .map(|(index, theta)| {
            let u: Vec<f64> = problem
                .transforms
                .iter()
                .zip(theta)
                .map(|(t, &v)| t.to_unconstrained(v))
                .collect();
            lm::minimize(&problem, &u, &settings).map(|run| StartOutcome { index, run })
        })
        .collect();

    let best = select_best(outcomes.iter().flatten()).ok_or(Error::AllStartsDiverged)?;
    build_result(&problem, axis, records, best, config.residual_space)
}

fn select_best<'a>(outcomes: impl Iterator<Item = &'a StartOutcome> + Clone) -> Option<&'a StartOutcome> {
    let lowest = |converged_only: bool| {
        outcomes
            .clone()
            .filter(|o| !converged_only || o.run.termination == Termination::Converged)
            .fold(None::<&StartOutcome>, |acc, o| match acc {
                Some(b) if b.run.sse <= o.run.sse => Some(b),
                _ => Some(o),
            })
    };
    lowest(true).or_else(|| lowest(false))
}

fn build_result(
    problem: &Problem,
    axis: Option<ScaleAxis>,
    records: &[ExperimentRecord],
    best: &StartOutcome,
    space: ResidualSpace,
) -> Result<FitResult> {
    let form = problem.form;
    let theta: Vec<f64> = problem
        .params_at(&best.run.u)
        .into_iter()
        .zip(&problem.transforms)
        .map(|(v, t)| match t {
            Transform::Exp => v.max(f64::MIN_POSITIVE),
            Transform::Logistic => v.clamp(f64::MIN_POSITIVE, 1.0),
        })
        .collect();
    let params = ParamSet::from_values(form, &theta)?;

    let predicted: Vec<f64> = problem
        .points
        .iter()
        .map(|&p| params.eval(p))
        .collect::<Result<_>>()?;
    let residuals: Vec<f64> = predicted
        .iter()
        .enumerate()
        .map(|(i, &v)| problem.residual(i, v))
        .collect();
    let sse = residuals.iter().map(|r| r * r).sum();
    let observed: Vec<f64> = records.iter().map(|r| r.metric_value).collect();
    let r_squared = if residuals.iter().all(|&r| r == 0.0) {
        1.0
    } else {
        r_squared(&observed, &predicted)?
    };

    let pinned = problem
        .transforms
        .iter()
        .zip(&best.run.u)
        .any(|(t, &u)| t.at_boundary(u));
    let converged = match (best.run.termination, pinned) {
        (Termination::MaxIterations, _) => FitStatus::MaxIterations,
        (Termination::Converged, true) => FitStatus::Degenerate,
        (Termination::Converged, false) => FitStatus::Converged,
    };

    Ok(FitResult {
        form,
        axis,
        params,
        r_squared,
        sse,
        residuals,
        residual_space: space,
        converged,
        iterations: best.run.iterations,
        start_index: best.index,
        bootstrap_ci: None,
    })
}

/// Metric kind a set of records shares, if any.
pub fn common_metric_kind(records: &[ExperimentRecord]) -> Result<MetricKind> {
    let first = records
        .first()
        .ok_or(Error::TooFewRecords { needed: 1, got: 0 })?
        .metric_kind;
    if records.iter().all(|r| r.metric_kind == first) {
        Ok(first)
    } else {
        Err(Error::MixedMetricKinds)
    }
}
