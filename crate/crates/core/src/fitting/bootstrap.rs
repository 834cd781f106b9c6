//! Case-resampling bootstrap with percentile intervals.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit, FitConfig, FitStatus};
use crate::error::{Error, Result};
use crate::models::ScalingForm;
use crate::records::ExperimentRecord;
use crate::rng::seeded;

/// Resamples may fail on at most this fraction before the bootstrap gives up.
const MAX_FAILURE_FRACTION: f64 = 0.2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamInterval {
    pub name: String,
    pub low: f64,
    pub high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub confidence: f64,
    pub n_resamples: usize,
    pub n_failed: usize,
    pub intervals: Vec<ParamInterval>,
    /// Parameter vectors of every successful resample, in resample order.
    pub draws: Vec<Vec<f64>>,
}

impl BootstrapSummary {
    pub fn interval(&self, name: &str) -> Option<&ParamInterval> {
        self.intervals.iter().find(|i| i.name == name)
    }
}

/// Linear-interpolation quantile of an ascending-sorted slice, `q ∈ [0, 1]`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of an empty sample");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Percentile bootstrap intervals for each parameter of `form`.
///
/// The full data set is fitted first (its errors propagate). Each resample
/// is then refitted starting from the full-data solution; a resample fails
/// when its fit errors or stops at the iteration cap.
pub fn bootstrap_ci(
    form: ScalingForm,
    records: &[ExperimentRecord],
    config: &FitConfig,
    n_resamples: usize,
    confidence: f64,
) -> Result<BootstrapSummary> {
    if n_resamples < 100 {
        return Err(Error::Config(format!("n_resamples must be >= 100, got {n_resamples}")));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::Config(format!("confidence must lie in (0, 1), got {confidence}")));
    }
    let full = fit(form, records, config)?;

    let mut resample_config = config.clone();
    resample_config.multistart_grid = Some(vec![full.params.values()]);
    resample_config.axis = full.axis;

    let mut rng = seeded(config.seed);
    let n = records.len();
    let index_sets: Vec<Vec<usize>> = (0..n_resamples)
        .map(|_| (0..n).map(|_| rng.random_range(0..n)).collect())
        .collect();

    let outcomes: Vec<Option<Vec<f64>>> = index_sets
        .par_iter()
        .map(|idx| {
            let sample: Vec<ExperimentRecord> = idx.iter().map(|&i| records[i].clone()).collect();
            match fit(form, &sample, &resample_config) {
                Ok(r) if r.converged != FitStatus::MaxIterations => Some(r.params.values()),
                _ => None,
            }
        })
        .collect();

    let draws: Vec<Vec<f64>> = outcomes.into_iter().flatten().collect();
    let n_failed = n_resamples - draws.len();
    if n_failed as f64 > MAX_FAILURE_FRACTION * n_resamples as f64 {
        return Err(Error::InsufficientBootstrapSuccess {
            failed: n_failed,
            total: n_resamples,
        });
    }

    let tail = 0.5 * (1.0 - confidence);
    let intervals = form
        .param_names()
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let mut column: Vec<f64> = draws.iter().map(|d| d[j]).collect();
            column.sort_by(f64::total_cmp);
            ParamInterval {
                name: (*name).to_string(),
                low: percentile(&column, tail),
                high: percentile(&column, 1.0 - tail),
            }
        })
        .collect();

    Ok(BootstrapSummary {
        confidence,
        n_resamples,
        n_failed,
        intervals,
        draws,
    })
}
