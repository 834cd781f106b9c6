//! CSV schemas, report documents and plot-data emission.
//!
//! Experiment CSV: `n_params,data_size,data_unit,metric_kind,metric_value,depth,task,seed`
//! Manifest CSV:   `graph_id,class_label,num_nodes,num_edges`
//! Loss CSV:       `model_id,n_params,data_fraction,epoch,train_loss,val_loss`
//!
//! All three require a header row. Errors cite the 1-based file line.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use csv::StringRecord;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::LossCurve;
use crate::error::{Error, Result};
use crate::fitting::{FitConfig, FitResult};
use crate::graph::{GraphManifest, GraphRecord};
use crate::models::{ScalePoint, ScalingForm};
use crate::records::{DataUnit, ExperimentRecord, MetricKind};

pub const EXPERIMENT_HEADER: [&str; 8] = [
    "n_params",
    "data_size",
    "data_unit",
    "metric_kind",
    "metric_value",
    "depth",
    "task",
    "seed",
];
pub const MANIFEST_HEADER: [&str; 4] = ["graph_id", "class_label", "num_nodes", "num_edges"];
pub const LOSS_HEADER: [&str; 6] = [
    "model_id",
    "n_params",
    "data_fraction",
    "epoch",
    "train_loss",
    "val_loss",
];

/// Column positions of a schema within a file's header.
struct Columns {
    index: Vec<usize>,
}

impl Columns {
    fn resolve(headers: &StringRecord, schema: &[&str]) -> Result<Self> {
        let names: Vec<&str> = headers.iter().map(str::trim).collect();
        if let Some(extra) = names.iter().find(|n| !schema.contains(n)) {
            return Err(Error::InvalidInput(format!("unexpected column `{extra}`")));
        }
        let index = schema
            .iter()
            .map(|col| {
                names
                    .iter()
                    .position(|n| n == col)
                    .ok_or_else(|| Error::MissingColumn {
                        column: col.to_string(),
                    })
            })
            .collect::<Result<_>>()?;
        Ok(Self { index })
    }
}

/// One data row with its file line, for error reporting.
struct Row<'a> {
    record: &'a StringRecord,
    columns: &'a Columns,
    schema: &'a [&'a str],
    line: usize,
}

impl<'a> Row<'a> {
    fn raw(&self, col: usize) -> &'a str {
        self.verbatim(col).trim()
    }

    fn verbatim(&self, col: usize) -> &'a str {
        self.record.get(self.columns.index[col]).unwrap_or("")
    }

    fn violation(&self, col: usize, reason: impl Into<String>) -> Error {
        Error::DomainViolation {
            row: self.line,
            column: self.schema[col].to_string(),
            reason: reason.into(),
        }
    }

    fn number<T: FromStr>(&self, col: usize) -> Result<T> {
        let raw = self.raw(col);
        raw.parse()
            .map_err(|_| self.violation(col, format!("expected a number, got `{raw}`")))
    }

    fn optional<T: FromStr>(&self, col: usize) -> Result<Option<T>> {
        if self.raw(col).is_empty() {
            Ok(None)
        } else {
            self.number(col).map(Some)
        }
    }

    fn enumeration<T: FromStr>(&self, col: usize) -> Result<T> {
        let raw = self.raw(col);
        raw.parse().map_err(|_| Error::BadEnum {
            row: self.line,
            column: self.schema[col].to_string(),
            value: raw.to_string(),
        })
    }
}

fn for_each_row<R: Read>(
    reader: R,
    schema: &[&str],
    mut f: impl FnMut(&Row<'_>) -> Result<()>,
) -> Result<()> {
    let mut csv = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let columns = Columns::resolve(csv.headers()?, schema)?;
    let mut record = StringRecord::new();
    while csv.read_record(&mut record)? {
        let line = record.position().map_or(0, |p| p.line() as usize);
        f(&Row {
            record: &record,
            columns: &columns,
            schema,
            line,
        })?;
    }
    Ok(())
}

pub fn parse_experiments<R: Read>(reader: R) -> Result<Vec<ExperimentRecord>> {
    let mut out = Vec::new();
    for_each_row(reader, &EXPERIMENT_HEADER, |row| {
        let record = ExperimentRecord {
            n_params: row.number(0)?,
            data_size: row.number(1)?,
            data_unit: row.enumeration::<DataUnit>(2)?,
            metric_kind: row.enumeration::<MetricKind>(3)?,
            metric_value: row.number(4)?,
            depth: row.optional(5)?,
            task: row.verbatim(6).to_string(),
            seed: row.optional(7)?,
        };
        if let Err((column, reason)) = record.check() {
            let col = EXPERIMENT_HEADER.iter().position(|c| *c == column).expect("known column");
            return Err(row.violation(col, reason));
        }
        out.push(record);
        Ok(())
    })?;
    Ok(out)
}

pub fn read_experiments(path: impl AsRef<Path>) -> Result<Vec<ExperimentRecord>> {
    parse_experiments(File::open(path)?)
}

fn opt_to_string<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

/// Writes records in the experiment schema; floats use the shortest
/// representation that parses back to the same value.
pub fn write_experiments<W: Write>(writer: W, records: &[ExperimentRecord]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(EXPERIMENT_HEADER)?;
    for r in records {
        csv.write_record([
            r.n_params.to_string(),
            r.data_size.to_string(),
            r.data_unit.to_string(),
            r.metric_kind.to_string(),
            r.metric_value.to_string(),
            opt_to_string(&r.depth),
            r.task.clone(),
            opt_to_string(&r.seed),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

pub fn parse_manifest<R: Read>(reader: R, source_name: &str) -> Result<GraphManifest> {
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for_each_row(reader, &MANIFEST_HEADER, |row| {
        let graph_id = row.raw(0).to_string();
        if graph_id.is_empty() {
            return Err(row.violation(0, "graph_id must not be empty"));
        }
        if !seen.insert(graph_id.clone()) {
            return Err(row.violation(0, format!("duplicate graph_id `{graph_id}`")));
        }
        let num_nodes: u64 = row.number(2)?;
        if num_nodes < 1 {
            return Err(row.violation(2, "num_nodes must be >= 1"));
        }
        records.push(GraphRecord {
            graph_id,
            class_label: row.raw(1).to_string(),
            num_nodes,
            num_edges: row.number(3)?,
        });
        Ok(())
    })?;
    GraphManifest::new(source_name, records)
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<GraphManifest> {
    let path = path.as_ref();
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    parse_manifest(File::open(path)?, &name)
}

pub fn write_manifest<W: Write>(writer: W, manifest: &GraphManifest) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(MANIFEST_HEADER)?;
    for r in &manifest.records {
        csv.write_record([
            r.graph_id.clone(),
            r.class_label.clone(),
            r.num_nodes.to_string(),
            r.num_edges.to_string(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

/// Loss curves grouped by `model_id` in order of first appearance. Rows of
/// different models may interleave; each model's epochs must increase down
/// the file.
pub fn parse_loss_curves<R: Read>(reader: R) -> Result<Vec<LossCurve>> {
    struct Acc {
        n_params: f64,
        data_fraction: f64,
        epochs: Vec<f64>,
        train: Vec<f64>,
        val: Vec<f64>,
    }
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<String, Acc> = BTreeMap::new();
    for_each_row(reader, &LOSS_HEADER, |row| {
        let model_id = row.raw(0).to_string();
        let n_params: f64 = row.number(1)?;
        let data_fraction: f64 = row.number(2)?;
        let epoch: f64 = row.number(3)?;
        let train: f64 = row.number(4)?;
        let val: f64 = row.number(5)?;
        if !(data_fraction > 0.0 && data_fraction <= 1.0) {
            return Err(row.violation(2, format!("must lie in (0, 1], got {data_fraction}")));
        }
        for (col, v) in [(4, train), (5, val)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(row.violation(col, format!("loss must be finite and >= 0, got {v}")));
            }
        }
        let acc = groups.entry(model_id.clone()).or_insert_with(|| {
            order.push(model_id.clone());
            Acc {
                n_params,
                data_fraction,
                epochs: Vec::new(),
                train: Vec::new(),
                val: Vec::new(),
            }
        });
        if acc.n_params != n_params {
            return Err(row.violation(1, format!("n_params changes within model `{model_id}`")));
        }
        if acc.data_fraction != data_fraction {
            return Err(row.violation(2, format!("data_fraction changes within model `{model_id}`")));
        }
        if acc.epochs.last().is_some_and(|&last| epoch <= last) {
            return Err(Error::NonIncreasingEpochs {
                model_id,
                row: row.line,
            });
        }
        acc.epochs.push(epoch);
        acc.train.push(train);
        acc.val.push(val);
        Ok(())
    })?;
    order
        .into_iter()
        .map(|id| {
            let acc = groups.remove(&id).expect("grouped");
            LossCurve::new(id, acc.n_params, acc.data_fraction, acc.epochs, acc.train, acc.val)
        })
        .collect()
}

pub fn read_loss_curves(path: impl AsRef<Path>) -> Result<Vec<LossCurve>> {
    parse_loss_curves(File::open(path)?)
}

/// Reads a `FitConfig` override file (`.json`, otherwise TOML). Keys are the
/// `FitConfig` field names; missing keys keep their defaults.
pub fn read_fit_config(path: impl AsRef<Path>) -> Result<FitConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let config: FitConfig = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text)?
    } else {
        toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
    };
    config.validate()?;
    Ok(config)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub name: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn of_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Ok(Self {
            name: path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
            sha256: sha256_hex(&std::fs::read(path)?),
        })
    }
}

/// Non-reproducible fields, kept apart from everything else in a report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    pub generated_at: String,
}

impl Metadata {
    /// Current UTC time, or `SOURCE_DATE_EPOCH` when set.
    pub fn now() -> Self {
        let stamp = std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|s| s.parse::<i64>().ok())
            .and_then(|secs| chrono::DateTime::from_timestamp(secs, 0))
            .unwrap_or_else(chrono::Utc::now);
        Self {
            generated_at: stamp.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }
}

/// Envelope of every structured document the tool writes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report<T> {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub result: T,
    pub metadata: Metadata,
}

impl<T: Serialize> Report<T> {
    pub fn new(command: &str, inputs: Vec<InputDigest>, result: T) -> Self {
        Self {
            tool: "graphscale".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            inputs,
            result,
            metadata: Metadata::now(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Body of a `fit` report: the result plus the configuration that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOutput {
    pub n_records: usize,
    pub config: FitConfig,
    pub fit: FitResult,
}

pub type FitReport = Report<FitOutput>;

pub fn read_fit_report(path: impl AsRef<Path>) -> Result<FitReport> {
    Ok(serde_json::from_reader(File::open(path)?)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub at: ScalePoint,
    pub observed: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub x: f64,
    pub value: f64,
}

/// Fitted surface on a log-spaced `(D, N)` grid; `values[i][j]` is at `(data[i], model[j])`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Surface {
    pub data: Vec<f64>,
    pub model: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub form: ScalingForm,
    pub r_squared: f64,
    pub params: BTreeMap<String, f64>,
    pub points: Vec<PlotPoint>,
    pub curve: Vec<CurveSample>,
    pub surface: Option<Surface>,
}

pub const DEFAULT_CURVE_SAMPLES: usize = 200;
const SURFACE_SIDE: usize = 25;

/// `count` log-spaced samples over `[lo, hi]`, endpoints included.
fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
            .collect(),
    }
}

/// Span `[min/2, max·10]` over the positive values of `xs`.
fn plot_span(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = xs
        .filter(|&x| x > 0.0)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    if lo.is_finite() {
        (lo / 2.0, hi * 10.0)
    } else {
        (0.5, 10.0)
    }
}

/// Observed points plus the fitted curve sampled log-uniformly from half the
/// smallest input to ten times the largest. Combined forms also get a
/// surface grid; their curve runs along `D` at the median model size.
pub fn emit_plot_data(fit: &FitResult, records: &[ExperimentRecord], n_curve_samples: usize) -> Result<PlotData> {
    fit.require_converged()?;
    let points: Vec<PlotPoint> = records
        .iter()
        .map(|r| PlotPoint {
            at: fit.point_for(r),
            observed: r.metric_value,
        })
        .collect();

    let (curve, surface) = if fit.form.is_combined() {
        let (d_lo, d_hi) = plot_span(records.iter().map(|r| r.data_size));
        let (n_lo, n_hi) = plot_span(records.iter().map(|r| r.n_params));
        let mut models: Vec<f64> = records.iter().map(|r| r.n_params).collect();
        models.sort_by(f64::total_cmp);
        let model_mid = models.get(models.len() / 2).copied().unwrap_or(1.0);
        let curve = log_grid(d_lo, d_hi, n_curve_samples)
            .into_iter()
            .map(|d| {
                let value = fit.params.eval(ScalePoint::Pair { data: d, model: model_mid })?;
                Ok(CurveSample { x: d, value })
            })
            .collect::<Result<_>>()?;
        let data = log_grid(d_lo, d_hi, SURFACE_SIDE);
        let model = log_grid(n_lo, n_hi, SURFACE_SIDE);
        let values = data
            .iter()
            .map(|&d| {
                model
                    .iter()
                    .map(|&n| fit.params.eval(ScalePoint::Pair { data: d, model: n }))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        (curve, Some(Surface { data, model, values }))
    } else {
        let (lo, hi) = plot_span(points.iter().map(|p| match p.at {
            ScalePoint::Single(x) => x,
            ScalePoint::Pair { data, .. } => data,
        }));
        let curve = log_grid(lo, hi, n_curve_samples)
            .into_iter()
            .map(|x| {
                Ok(CurveSample {
                    x,
                    value: fit.params.eval(ScalePoint::Single(x))?,
                })
            })
            .collect::<Result<_>>()?;
        (curve, None)
    };

    Ok(PlotData {
        form: fit.form,
        r_squared: fit.r_squared,
        params: fit
            .params
            .named_values()
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
        points,
        curve,
        surface,
    })
}

/// `x` to `digits` significant digits, for console summaries.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.prec$e}", prec = digits.saturating_sub(1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXPERIMENTS: &str = "\
n_params,data_size,data_unit,metric_kind,metric_value,depth,task,seed
1000,0.5,fraction,score,0.61,3,ppa,1
20000,0.5,fraction,score,0.7,,ppa,
400000,0.5,fraction,score,0.74,5,,7
";

    #[test]
    fn reads_well_formed_file() {
        let recs = parse_experiments(EXPERIMENTS.as_bytes()).unwrap();
        assert_eq!(recs.len(), 3);
        assert_eq!(recs[0].depth, Some(3));
        assert_eq!(recs[1].depth, None);
        assert_eq!(recs[1].seed, None);
        assert_eq!(recs[2].task, "");
        assert_eq!(recs[0].data_unit, DataUnit::Fraction);
    }

    #[test]
    fn score_above_one_is_a_domain_violation() {
        let text = EXPERIMENTS.replace("0.7,,ppa", "1.3,,ppa");
        match parse_experiments(text.as_bytes()) {
            Err(Error::DomainViolation { row, column, .. }) => {
                assert_eq!((row, column.as_str()), (3, "metric_value"))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_enum_and_missing_column() {
        let text = EXPERIMENTS.replace("fraction,score,0.61", "fraction,accuracy,0.61");
        assert!(matches!(
            parse_experiments(text.as_bytes()),
            Err(Error::BadEnum { row: 2, ref column, ref value }) if column == "metric_kind" && value == "accuracy"
        ));
        let text = "n_params,data_size,data_unit,metric_kind,metric_value,depth,task\n1,1,edges,error,1,,\n";
        assert!(matches!(
            parse_experiments(text.as_bytes()),
            Err(Error::MissingColumn { ref column }) if column == "seed"
        ));
    }

    #[test]
    fn non_numeric_cell_cites_row_and_column() {
        let text = EXPERIMENTS.replace("20000", "lots");
        assert!(matches!(
            parse_experiments(text.as_bytes()),
            Err(Error::DomainViolation { row: 3, ref column, .. }) if column == "n_params"
        ));
    }

    #[test]
    fn manifest_parsing() {
        let ok = "graph_id,class_label,num_nodes,num_edges\ng1,a,3,2\ng2,a,4,5\n";
        let m = parse_manifest(ok.as_bytes(), "m").unwrap();
        assert_eq!(m.records.len(), 2);
        let bad = "graph_id,class_label,num_nodes,num_edges\ng1,a,3,2\ng2,a,0,5\n";
        assert!(matches!(
            parse_manifest(bad.as_bytes(), "m"),
            Err(Error::DomainViolation { row: 3, ref column, .. }) if column == "num_nodes"
        ));
        let dup = "graph_id,class_label,num_nodes,num_edges\ng1,a,3,2\ng1,a,4,5\n";
        assert!(matches!(parse_manifest(dup.as_bytes(), "m"), Err(Error::DomainViolation { row: 3, .. })));
    }

    #[test]
    fn loss_curves_group_interleaved_rows() {
        let text = "\
model_id,n_params,data_fraction,epoch,train_loss,val_loss
small,100,1,0,1.0,1.1
big,1000,1,0,0.9,1.0
small,100,1,1,0.8,0.9
big,1000,1,1,0.5,0.8
big,1000,1,2,0.3,0.9
small,100,1,2,0.7,0.85
";
        let curves = parse_loss_curves(text.as_bytes()).unwrap();
        assert_eq!(curves.len(), 2);
        assert_eq!(curves[0].model_id, "small");
        assert_eq!(curves[0].epochs, vec![0.0, 1.0, 2.0]);
        assert_eq!(curves[0].val_loss, vec![1.1, 0.9, 0.85]);
        assert_eq!(curves[1].model_id, "big");
        assert_eq!(curves[1].train_loss, vec![0.9, 0.5, 0.3]);
    }

    #[test]
    fn repeated_epoch_is_rejected() {
        let text = "\
model_id,n_params,data_fraction,epoch,train_loss,val_loss
m,100,1,0,1.0,1.1
m,100,1,1,0.8,0.9
m,100,1,1,0.7,0.8
";
        assert!(matches!(
            parse_loss_curves(text.as_bytes()),
            Err(Error::NonIncreasingEpochs { row: 4, ref model_id }) if model_id == "m"
        ));
    }

    #[test]
    fn sig_formatting() {
        assert_eq!(fmt_sig(0.99871234, 4), "0.9987");
        assert_eq!(fmt_sig(123.456, 4), "123.5");
        assert_eq!(fmt_sig(12345678.0, 4), "1.235e7");
        assert_eq!(fmt_sig(0.0, 4), "0");
    }

    #[test]
    fn log_grid_hits_endpoints() {
        let g = log_grid(0.5, 5e7, 200);
        assert_eq!(g.len(), 200);
        assert!((g[0] - 0.5).abs() < 1e-12);
        assert!((g[199] - 5e7).abs() / 5e7 < 1e-12);
    }
}
