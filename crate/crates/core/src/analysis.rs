//! Diagnostics built on fitted laws: extrapolation, model-scaling collapse,
//! overfitting from loss curves, and per-depth curve comparison.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting::{
    bootstrap_ci, common_metric_kind, fit, percentile, BootstrapSummary, FitConfig, FitResult,
};
use crate::models::{ParamSet, ScalePoint, ScalingForm};
use crate::records::{ExperimentRecord, MetricKind, ScaleAxis};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub target: ScalePoint,
    pub predicted: f64,
    /// Percentile interval over bootstrap parameter draws.
    pub interval: Option<(f64, f64)>,
}

/// Evaluates a converged fit at each target, with bootstrap intervals when
/// draws are supplied.
pub fn extrapolate(
    fit: &FitResult,
    targets: &[ScalePoint],
    bootstrap: Option<&BootstrapSummary>,
) -> Result<Vec<Prediction>> {
    fit.require_converged()?;
    let draws: Vec<ParamSet> = match bootstrap {
        Some(b) => b
            .draws
            .iter()
            .map(|d| ParamSet::relaxed(fit.form, d))
            .collect::<Result<_>>()?,
        None => Vec::new(),
    };
    targets
        .iter()
        .map(|&target| {
            let predicted = fit.params.eval(target)?;
            let interval = match bootstrap {
                Some(b) if !draws.is_empty() => {
                    let mut values: Vec<f64> =
                        draws.iter().map(|p| p.eval(target)).collect::<Result<_>>()?;
                    values.sort_by(f64::total_cmp);
                    let tail = 0.5 * (1.0 - b.confidence);
                    Some((percentile(&values, tail), percentile(&values, 1.0 - tail)))
                }
                _ => None,
            };
            Ok(Prediction {
                target,
                predicted,
                interval,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule", content = "value")]
pub enum CalibrationRule {
    /// Every size up to and including the empirically best-performing one.
    UpToBest,
    /// The `n` smallest model sizes.
    FirstN(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseConfig {
    pub calibration: CalibrationRule,
    /// Flag threshold as a fraction of the observed metric range.
    pub rel_tol: f64,
    pub min_consecutive: usize,
    pub fit: FitConfig,
}

impl Default for CollapseConfig {
    fn default() -> Self {
        Self {
            calibration: CalibrationRule::UpToBest,
            rel_tol: 0.02,
            min_consecutive: 2,
            fit: FitConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlaggedRecord {
    pub record: ExperimentRecord,
    pub predicted: f64,
    /// How much worse than predicted, in metric units (always positive).
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseReport {
    pub fitted: FitResult,
    pub calibration_size: usize,
    pub tolerance: f64,
    pub flagged: Vec<FlaggedRecord>,
    pub collapse_onset: Option<f64>,
}

const MIN_COLLAPSE_RECORDS: usize = 6;

/// Fits the shifted law on a calibration prefix of model sizes and flags
/// larger models that fall short of it.
pub fn detect_collapse(records: &[ExperimentRecord], config: &CollapseConfig) -> Result<CollapseReport> {
    if records.len() < MIN_COLLAPSE_RECORDS {
        return Err(Error::TooFewRecords {
            needed: MIN_COLLAPSE_RECORDS,
            got: records.len(),
        });
    }
    let kind = common_metric_kind(records)?;
    let mut sorted = records.to_vec();
    sorted.sort_by(|a, b| a.n_params.total_cmp(&b.n_params));
    if sorted.windows(2).any(|w| w[0].n_params == w[1].n_params) {
        return Err(Error::InvalidInput("collapse detection needs distinct model sizes".into()));
    }

    let calibration_size = match config.calibration {
        CalibrationRule::UpToBest => {
            let mut best = 0;
            for (i, r) in sorted.iter().enumerate() {
                if kind.better(r.metric_value, sorted[best].metric_value) {
                    best = i;
                }
            }
            best + 1
        }
        CalibrationRule::FirstN(n) => n.min(sorted.len()),
    };
    let form = ScalingForm::shifted_for(kind);
    let fit_config = FitConfig {
        axis: Some(ScaleAxis::Model),
        ..config.fit.clone()
    };
    let fitted = fit(form, &sorted[..calibration_size], &fit_config)?;

    let max = sorted.iter().map(|r| r.metric_value).fold(f64::NEG_INFINITY, f64::max);
    let min = sorted.iter().map(|r| r.metric_value).fold(f64::INFINITY, f64::min);
    let tolerance = config.rel_tol * (max - min);

    let mut flagged = Vec::new();
    let mut collapse_onset = None;
    let mut run: Option<(f64, usize)> = None;
    for r in &sorted[calibration_size..] {
        let predicted = fitted.params.eval(ScalePoint::Single(r.n_params))?;
        let deviation = match kind {
            MetricKind::Score => predicted - r.metric_value,
            MetricKind::Error => r.metric_value - predicted,
        };
        if deviation > tolerance {
            let (start, len) = run.map_or((r.n_params, 1), |(s, l)| (s, l + 1));
            run = Some((start, len));
            if len >= config.min_consecutive && collapse_onset.is_none() {
                collapse_onset = Some(start);
            }
            flagged.push(FlaggedRecord {
                record: r.clone(),
                predicted,
                deviation,
            });
        } else {
            run = None;
        }
    }

    Ok(CollapseReport {
        fitted,
        calibration_size,
        tolerance,
        flagged,
        collapse_onset,
    })
}

/// Per-epoch training and validation loss of one model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossCurve {
    pub model_id: String,
    pub n_params: f64,
    pub data_fraction: f64,
    pub epochs: Vec<f64>,
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
}

impl LossCurve {
    pub fn new(
        model_id: impl Into<String>,
        n_params: f64,
        data_fraction: f64,
        epochs: Vec<f64>,
        train_loss: Vec<f64>,
        val_loss: Vec<f64>,
    ) -> Result<Self> {
        let model_id = model_id.into();
        if train_loss.len() != epochs.len() || val_loss.len() != epochs.len() {
            return Err(Error::LengthMismatch {
                left: epochs.len(),
                right: train_loss.len().min(val_loss.len()),
            });
        }
        if epochs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(format!(
                "epochs of `{model_id}` are not strictly increasing"
            )));
        }
        if !(data_fraction > 0.0 && data_fraction <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "data_fraction must lie in (0, 1], got {data_fraction}"
            )));
        }
        Ok(Self {
            model_id,
            n_params,
            data_fraction,
            epochs,
            train_loss,
            val_loss,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverfitReport {
    pub model_id: String,
    pub n_params: f64,
    pub data_fraction: f64,
    pub overfit: bool,
    /// Position of the first minimum of the validation loss.
    pub epoch_min_val: usize,
    pub min_val_loss: f64,
    pub final_val_loss: f64,
    /// `(final − min) / min` of the validation loss.
    pub severity: f64,
    pub train_monotone: bool,
}

pub const DEFAULT_SEVERITY_THRESHOLD: f64 = 0.05;
const TRAIN_SLACK: f64 = 1e-9;

pub fn detect_overfitting(curve: &LossCurve, severity_threshold: f64) -> Result<OverfitReport> {
    if curve.epochs.len() < 3 {
        return Err(Error::TooFewEpochs {
            model_id: curve.model_id.clone(),
            epochs: curve.epochs.len(),
        });
    }
    let mut epoch_min_val = 0;
    for (i, &v) in curve.val_loss.iter().enumerate() {
        if v < curve.val_loss[epoch_min_val] {
            epoch_min_val = i;
        }
    }
    let min_val_loss = curve.val_loss[epoch_min_val];
    let final_val_loss = *curve.val_loss.last().expect("non-empty");
    let rise = final_val_loss - min_val_loss;
    let severity = if rise == 0.0 {
        0.0
    } else if min_val_loss > 0.0 {
        rise / min_val_loss
    } else {
        f64::INFINITY
    };
    let train_monotone = curve
        .train_loss
        .windows(2)
        .all(|w| w[1] <= w[0] + TRAIN_SLACK);
    Ok(OverfitReport {
        model_id: curve.model_id.clone(),
        n_params: curve.n_params,
        data_fraction: curve.data_fraction,
        overfit: severity > severity_threshold,
        epoch_min_val,
        min_val_loss,
        final_val_loss,
        severity,
        train_monotone,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupBy {
    NParams,
    DataFraction,
}

impl GroupBy {
    fn key(self, r: &OverfitReport) -> f64 {
        match self {
            GroupBy::NParams => r.n_params,
            GroupBy::DataFraction => r.data_fraction,
        }
    }

    fn name(self) -> &'static str {
        match self {
            GroupBy::NParams => "n_params",
            GroupBy::DataFraction => "data_fraction",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Monotonicity {
    Observed,
    Violated,
    Tied,
}

impl fmt::Display for Monotonicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Monotonicity::Observed => "observed",
            Monotonicity::Violated => "violated",
            Monotonicity::Tied => "tied",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverfitComparison {
    pub group_by: GroupBy,
    /// Reports sorted by the grouping key (stable for equal keys).
    pub reports: Vec<OverfitReport>,
    pub decreasing: Monotonicity,
    pub increasing: Monotonicity,
    pub summary: String,
}

const SEVERITY_TIE: f64 = 1e-12;

fn monotonicity(severities: &[f64], decreasing: bool) -> Monotonicity {
    let steps: Vec<f64> = severities
        .windows(2)
        .map(|w| if decreasing { w[0] - w[1] } else { w[1] - w[0] })
        .collect();
    if steps.iter().all(|d| d.abs() <= SEVERITY_TIE) {
        Monotonicity::Tied
    } else if steps.iter().all(|&d| d >= -SEVERITY_TIE) {
        Monotonicity::Observed
    } else {
        Monotonicity::Violated
    }
}

/// Overfitting reports ordered along one key, with whether severity falls or
/// rises along it.
pub fn compare_overfitting(
    curves: &[LossCurve],
    group_by: GroupBy,
    severity_threshold: f64,
) -> Result<OverfitComparison> {
    if curves.len() < 2 {
        return Err(Error::TooFewCurves(curves.len()));
    }
    let mut reports: Vec<OverfitReport> = curves
        .iter()
        .map(|c| detect_overfitting(c, severity_threshold))
        .collect::<Result<_>>()?;
    reports.sort_by(|a, b| group_by.key(a).total_cmp(&group_by.key(b)));
    let severities: Vec<f64> = reports.iter().map(|r| r.severity).collect();
    let decreasing = monotonicity(&severities, true);
    let increasing = monotonicity(&severities, false);
    let summary = match (decreasing, increasing) {
        (Monotonicity::Tied, _) => format!("severity tied across {}", group_by.name()),
        (d, i) => format!(
            "decreasing in {key}: {d}; increasing in {key}: {i}",
            key = group_by.name()
        ),
    };
    Ok(OverfitComparison {
        group_by,
        reports,
        decreasing,
        increasing,
        summary,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum DepthOutcome {
    Fitted {
        fit: FitResult,
        best_empirical: f64,
    },
    Failed {
        error: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthEntry {
    pub depth: u32,
    pub n_records: usize,
    pub outcome: DepthOutcome,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisjointParam {
    pub depth_a: u32,
    pub depth_b: u32,
    pub param: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distinctness {
    Distinct,
    NotDistinguishable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthComparison {
    pub form: ScalingForm,
    pub confidence: f64,
    pub depths: Vec<DepthEntry>,
    /// Depth whose fitted asymptote is best (highest `s∞` / lowest `ε∞`).
    pub best_asymptote_depth: Option<u32>,
    /// Depth holding the single best observed metric.
    pub best_empirical_depth: Option<u32>,
    pub verdict: Distinctness,
    pub disjoint: Vec<DisjointParam>,
}

/// Splits records by their `depth` field.
pub fn group_by_depth(records: &[ExperimentRecord]) -> Result<BTreeMap<u32, Vec<ExperimentRecord>>> {
    let mut out: BTreeMap<u32, Vec<ExperimentRecord>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        let depth = r
            .depth
            .ok_or_else(|| Error::InvalidInput(format!("record {} has no depth", i + 1)))?;
        out.entry(depth).or_default().push(r.clone());
    }
    Ok(out)
}

/// Fits the shifted law per depth with bootstrap intervals and compares them.
/// A depth whose fit fails is reported as failed without stopping the others.
pub fn compare_depth_curves(
    grouped: &BTreeMap<u32, Vec<ExperimentRecord>>,
    config: &FitConfig,
    n_resamples: usize,
    confidence: f64,
) -> Result<DepthComparison> {
    if grouped.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "depth comparison needs at least 2 depths, got {}",
            grouped.len()
        )));
    }
    let all: Vec<ExperimentRecord> = grouped.values().flatten().cloned().collect();
    let kind = common_metric_kind(&all)?;
    let form = ScalingForm::shifted_for(kind);
    let config = FitConfig {
        axis: Some(config.axis.unwrap_or(ScaleAxis::Model)),
        ..config.clone()
    };

    let groups: Vec<(u32, &Vec<ExperimentRecord>)> = grouped.iter().map(|(&d, r)| (d, r)).collect();
    let depths: Vec<DepthEntry> = groups
        .par_iter()
        .map(|&(depth, records)| {
            let outcome = fit(form, records, &config)
                .and_then(|mut f| {
                    f.bootstrap_ci = Some(bootstrap_ci(form, records, &config, n_resamples, confidence)?);
                    Ok(f)
                })
                .map(|fit| {
                    let best_empirical = records
                        .iter()
                        .map(|r| r.metric_value)
                        .reduce(|a, b| if kind.better(b, a) { b } else { a })
                        .expect("fit succeeded on a non-empty group");
                    DepthOutcome::Fitted { fit, best_empirical }
                })
                .unwrap_or_else(|e| DepthOutcome::Failed { error: e.to_string() });
            DepthEntry {
                depth,
                n_records: records.len(),
                outcome,
            }
        })
        .collect();

    let fitted: Vec<(u32, &FitResult, f64)> = depths
        .iter()
        .filter_map(|d| match &d.outcome {
            DepthOutcome::Fitted { fit, best_empirical } => Some((d.depth, fit, *best_empirical)),
            DepthOutcome::Failed { .. } => None,
        })
        .collect();

    let pick_best = |values: Vec<(u32, f64)>| {
        values
            .into_iter()
            .reduce(|a, b| if kind.better(b.1, a.1) { b } else { a })
            .map(|(d, _)| d)
    };
    let best_asymptote_depth = pick_best(fitted.iter().map(|(d, f, _)| (*d, f.params.asymptote())).collect());
    let best_empirical_depth = pick_best(fitted.iter().map(|(d, _, e)| (*d, *e)).collect());

    let mut disjoint = Vec::new();
    for (i, (depth_a, fit_a, _)) in fitted.iter().enumerate() {
        for (depth_b, fit_b, _) in &fitted[i + 1..] {
            let (Some(ci_a), Some(ci_b)) = (&fit_a.bootstrap_ci, &fit_b.bootstrap_ci) else {
                continue;
            };
            for (a, b) in ci_a.intervals.iter().zip(&ci_b.intervals) {
                if a.high < b.low || b.high < a.low {
                    disjoint.push(DisjointParam {
                        depth_a: *depth_a,
                        depth_b: *depth_b,
                        param: a.name.clone(),
                    });
                }
            }
        }
    }
    let verdict = if disjoint.is_empty() {
        Distinctness::NotDistinguishable
    } else {
        Distinctness::Distinct
    };

    Ok(DepthComparison {
        form,
        confidence,
        depths,
        best_asymptote_depth,
        best_empirical_depth,
        verdict,
        disjoint,
    })
}
