use thiserror::Error;

use crate::models::ScalingForm;
use crate::records::MetricKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or input lies outside the domain of a scaling form.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("too few records: need at least {needed}, got {got}")]
    TooFewRecords { needed: usize, got: usize },

    #[error("form {form} cannot be fitted to {metric} metrics")]
    MetricFormMismatch { form: ScalingForm, metric: MetricKind },

    #[error("records mix metric kinds; a fit needs a single kind")]
    MixedMetricKinds,

    #[error("cannot infer the scale axis: records vary in both model and data size")]
    AmbiguousAxis,

    #[error("no multistart seed produced a finite sum of squares")]
    AllStartsDiverged,

    #[error("bootstrap failed on {failed} of {total} resamples (limit is 20%)")]
    InsufficientBootstrapSuccess { failed: usize, total: usize },

    #[error("observed values have zero variance")]
    ZeroVariance,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("class `{class}` has {size} graph(s); at least 2 are required")]
    ClassTooSmall { class: String, size: usize },

    #[error("class `{class}` has zero total edges")]
    AllZeroEdges { class: String },

    #[error("duplicate graph id `{0}`")]
    DuplicateGraphId(String),

    #[error("subsample ratio must lie in (0, 1], got {0}")]
    InvalidRatio(f64),

    #[error("loss curve `{model_id}` has {epochs} epoch(s); at least 3 are required")]
    TooFewEpochs { model_id: String, epochs: usize },

    #[error("need at least 2 loss curves, got {0}")]
    TooFewCurves(usize),

    #[error("fit status is {0}; refusing to use an unconverged fit")]
    RefusesUnconverged(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("missing column `{column}`")]
    MissingColumn { column: String },

    #[error("row {row}, column `{column}`: unrecognised value `{value}`")]
    BadEnum {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row}, column `{column}`: {reason}")]
    DomainViolation {
        row: usize,
        column: String,
        reason: String,
    },

    #[error("row {row}: epochs for model `{model_id}` are not strictly increasing")]
    NonIncreasingEpochs { model_id: String, row: usize },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Numeric failures are the optimizer giving up; everything else is bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::AllStartsDiverged
                | Error::InsufficientBootstrapSuccess { .. }
                | Error::ZeroVariance
                | Error::RefusesUnconverged(_)
        )
    }
}
