//! Experiment records: one trained-model measurement each.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    /// Lower is better (MSE, error rate).
    Error,
    /// Higher is better (accuracy, AP, ROC-AUC); lies in `[0, 1]`.
    Score,
}

impl MetricKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::Error => "error",
            MetricKind::Score => "score",
        }
    }

    /// True when `a` is a strictly better metric value than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            MetricKind::Error => a < b,
            MetricKind::Score => a > b,
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "error" => Ok(MetricKind::Error),
            "score" => Ok(MetricKind::Score),
            _ => Err(Error::InvalidInput(format!("unknown metric kind `{s}`"))),
        }
    }
}

/// Unit in which `data_size` is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataUnit {
    Graphs,
    Edges,
    Fraction,
}

impl DataUnit {
    pub fn as_str(self) -> &'static str {
        match self {
            DataUnit::Graphs => "graphs",
            DataUnit::Edges => "edges",
            DataUnit::Fraction => "fraction",
        }
    }
}

impl fmt::Display for DataUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DataUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "graphs" => Ok(DataUnit::Graphs),
            "edges" => Ok(DataUnit::Edges),
            "fraction" => Ok(DataUnit::Fraction),
            _ => Err(Error::InvalidInput(format!("unknown data unit `{s}`"))),
        }
    }
}

/// Which record field plays the role of the scale variable `X` in single-variable laws.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleAxis {
    /// `X = N`, the parameter count.
    Model,
    /// `X = D`, the data size.
    Data,
}

impl FromStr for ScaleAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "model" => Ok(ScaleAxis::Model),
            "data" => Ok(ScaleAxis::Data),
            _ => Err(Error::InvalidInput(format!("unknown scale axis `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub n_params: f64,
    pub data_size: f64,
    pub data_unit: DataUnit,
    pub metric_kind: MetricKind,
    pub metric_value: f64,
    pub depth: Option<u32>,
    pub task: String,
    pub seed: Option<u64>,
}

impl ExperimentRecord {
    pub fn scale(&self, axis: ScaleAxis) -> f64 {
        match axis {
            ScaleAxis::Model => self.n_params,
            ScaleAxis::Data => self.data_size,
        }
    }

    /// Checks the record invariants, naming the offending column.
    pub fn check(&self) -> std::result::Result<(), (&'static str, String)> {
        if !(self.n_params.is_finite() && self.n_params > 0.0) {
            return Err(("n_params", format!("must be > 0, got {}", self.n_params)));
        }
        if !(self.data_size.is_finite() && self.data_size > 0.0) {
            return Err(("data_size", format!("must be > 0, got {}", self.data_size)));
        }
        if self.data_unit == DataUnit::Fraction && self.data_size > 1.0 {
            return Err((
                "data_size",
                format!("fraction unit requires a value in (0, 1], got {}", self.data_size),
            ));
        }
        if !(self.metric_value.is_finite() && self.metric_value >= 0.0) {
            return Err(("metric_value", format!("must be >= 0, got {}", self.metric_value)));
        }
        if self.metric_kind == MetricKind::Score && self.metric_value > 1.0 {
            return Err((
                "metric_value",
                format!("score metrics must be <= 1, got {}", self.metric_value),
            ));
        }
        Ok(())
    }
}

/// Picks the axis along which the records vary. Records that vary along both
/// (or neither) are ambiguous.
pub fn infer_axis(records: &[ExperimentRecord]) -> Result<ScaleAxis> {
    let Some(first) = records.first() else {
        return Err(Error::TooFewRecords { needed: 1, got: 0 });
    };
    let model_varies = records.iter().any(|r| r.n_params != first.n_params);
    let data_varies = records.iter().any(|r| r.data_size != first.data_size);
    match (model_varies, data_varies) {
        (true, false) => Ok(ScaleAxis::Model),
        (false, true) => Ok(ScaleAxis::Data),
        _ => Err(Error::AmbiguousAxis),
    }
}
