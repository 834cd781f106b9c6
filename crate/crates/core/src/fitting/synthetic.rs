//! Seeded synthetic experiment records drawn from a known scaling law.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ParamSet, ScalePoint};
use crate::records::{DataUnit, ExperimentRecord, MetricKind, ScaleAxis};
use crate::rng::seeded;

/// How single-variable scale points map onto record fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordLayout {
    pub axis: ScaleAxis,
    /// `n_params` for data-scaling records.
    pub fixed_n_params: f64,
    /// `data_size` for model-scaling records.
    pub fixed_data_size: f64,
    pub data_unit: DataUnit,
    pub task: String,
}

impl RecordLayout {
    /// Varying model size on the full training set (`data_size = 1`, fraction unit).
    pub fn model_scaling() -> Self {
        Self {
            axis: ScaleAxis::Model,
            fixed_n_params: 1.0,
            fixed_data_size: 1.0,
            data_unit: DataUnit::Fraction,
            task: "synthetic".into(),
        }
    }

    /// Varying data size in edges at a fixed model size.
    pub fn data_scaling(n_params: f64) -> Self {
        Self {
            axis: ScaleAxis::Data,
            fixed_n_params: n_params,
            fixed_data_size: 1.0,
            data_unit: DataUnit::Edges,
            task: "synthetic".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSet {
    pub records: Vec<ExperimentRecord>,
    /// Values pulled back into the metric's valid range (`[0, 1]` for scores, `>= 0` for errors).
    pub clamped: usize,
}

/// Evaluates `params` at each point and adds `N(0, noise_sigma²)` noise.
pub fn generate_synthetic(
    params: &ParamSet,
    points: &[ScalePoint],
    noise_sigma: f64,
    seed: u64,
    layout: &RecordLayout,
) -> Result<SyntheticSet> {
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(Error::InvalidInput(format!("noise_sigma must be >= 0, got {noise_sigma}")));
    }
    let kind = params.form().metric_kind();
    let mut rng = seeded(seed);
    let mut clamped = 0;
    let mut records = Vec::with_capacity(points.len());
    for (i, &pt) in points.iter().enumerate() {
        let clean = params.eval(pt)?;
        let z: f64 = StandardNormal.sample(&mut rng);
        let noisy = clean + noise_sigma * z;
        let upper = match kind {
            MetricKind::Score => 1.0,
            MetricKind::Error => f64::INFINITY,
        };
        let value = noisy.clamp(0.0, upper);
        if value != noisy {
            clamped += 1;
        }
        let (n_params, data_size) = match pt {
            ScalePoint::Pair { data, model } => (model, data),
            ScalePoint::Single(x) => match layout.axis {
                ScaleAxis::Model => (x, layout.fixed_data_size),
                ScaleAxis::Data => (layout.fixed_n_params, x),
            },
        };
        records.push(ExperimentRecord {
            n_params,
            data_size,
            data_unit: layout.data_unit,
            metric_kind: kind,
            metric_value: value,
            depth: None,
            task: layout.task.clone(),
            seed: Some(seed.wrapping_add(i as u64)),
        });
    }
    Ok(SyntheticSet { records, clamped })
}

/// `count` points log-spaced over `[10^lo_exp, 10^hi_exp]`.
pub fn log_spaced(lo_exp: f64, hi_exp: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![10f64.powf(lo_exp)],
        _ => (0..count)
            .map(|i| 10f64.powf(lo_exp + (hi_exp - lo_exp) * i as f64 / (count - 1) as f64))
            .collect(),
    }
}
