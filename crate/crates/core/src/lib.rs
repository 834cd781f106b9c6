//! Scaling-law laboratory for graph-learning experiments.
//!
//! - [`models`]: the five scaling-law families and their analytic gradients.
//! - [`fitting`]: Levenberg–Marquardt fits, R², bootstrap intervals, synthetic data.
//! - [`graph`]: edge-based data accounting, simple/complex splits, subsampling, FLOPs.
//! - [`analysis`]: extrapolation, collapse and overfitting diagnostics, depth comparison.
//! - [`io`] and [`cli`]: CSV schemas, report documents and the `graphscale` command line.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod fitting;
pub mod graph;
pub mod io;
pub mod models;
pub mod records;
pub mod rng;

pub use error::{Error, Result};
pub use fitting::{fit, FitConfig, FitResult, FitStatus};
pub use models::{ParamSet, ScalePoint, ScalingForm};
pub use records::{DataUnit, ExperimentRecord, MetricKind, ScaleAxis};
