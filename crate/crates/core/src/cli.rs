//! `graphscale` command-line front end.
//!
//! Exit codes: 0 success, 1 bad input or usage, 2 numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{
    compare_depth_curves, compare_overfitting, detect_collapse, detect_overfitting, extrapolate, group_by_depth,
    CalibrationRule, CollapseConfig, GroupBy, OverfitComparison, OverfitReport, Prediction, DEFAULT_SEVERITY_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::fitting::{bootstrap_ci, fit, generate_synthetic, log_spaced, FitConfig, FitStatus, RecordLayout, ResidualSpace};
use crate::graph::{
    flops_forward, split_equal_edges, split_equal_graphs, subsample_fraction, total_edges, EdgeConvention, FlopsMode, GraphManifest,
    MessagePassingCost,
};
use crate::io::{self, fmt_sig, FitOutput, InputDigest, Report};
use crate::models::{ParamSet, ScalePoint, ScalingForm};
use crate::records::{DataUnit, ScaleAxis};

#[derive(Parser, Debug)]
#[command(name = "graphscale", version, about = "Neural scaling-law fitting for graph models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a scaling law to an experiment CSV.
    Fit(FitArgs),
    /// Evaluate a saved fit at new scales.
    Predict(PredictArgs),
    /// Split a graph manifest into simple and complex halves.
    Split(SplitArgs),
    /// Draw a seeded subset of a manifest.
    Subsample(SubsampleArgs),
    /// Count forward-pass add-multiply operations.
    Flops(FlopsArgs),
    /// Flag model sizes that fall short of the small-model trend.
    Collapse(CollapseArgs),
    /// Detect overfitting in loss curves.
    Overfit(OverfitArgs),
    /// Compare scaling curves across model depths.
    DepthCompare(DepthArgs),
    /// Generate synthetic experiment records from known parameters.
    Synth(SynthArgs),
    /// Emit plot data (observed points and fitted curve) for a saved fit.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Fitting configuration (TOML, or JSON with a .json extension).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for every random choice; overrides the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn fit_config(&self) -> Result<FitConfig> {
        let mut config = match &self.config {
            Some(path) => io::read_fit_config(path)?,
            None => FitConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        Ok(config)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SpaceArg {
    Linear,
    Log,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[arg(long)]
    form: ScalingForm,
    /// Experiment CSV.
    #[arg(long = "in")]
    input: PathBuf,
    /// Scale axis for single-variable forms; inferred when absent.
    #[arg(long)]
    axis: Option<ScaleAxis>,
    #[arg(long, value_enum)]
    residual_space: Option<SpaceArg>,
    /// Bootstrap resamples for confidence intervals (0 = none, else >= 100).
    #[arg(long, default_value_t = 0)]
    bootstrap: usize,
    #[arg(long, default_value_t = 0.95)]
    confidence: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct PredictArgs {
    /// Report written by `fit`.
    #[arg(long)]
    fit: PathBuf,
    /// Comma-separated scales; `D:N` pairs for combined forms.
    #[arg(long, value_delimiter = ',', required = true)]
    at: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SplitArg {
    EqualGraphs,
    EqualEdges,
}

#[derive(Args, Debug)]
struct SplitArgs {
    #[arg(long, value_enum)]
    mode: SplitArg,
    #[arg(long)]
    manifest: PathBuf,
    /// Also write the two halves as manifest CSVs with this path prefix.
    #[arg(long)]
    write_halves: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct SubsampleArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Fraction of graphs to keep, in (0, 1].
    #[arg(long)]
    ratio: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FlopsArg {
    Exact,
    PaperApprox,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EdgeArg {
    Undirected,
    Directed,
}

#[derive(Args, Debug)]
struct FlopsArgs {
    #[arg(long, required_unless_present = "manifest")]
    edges: Option<u64>,
    #[arg(long, required_unless_present = "manifest")]
    nodes: Option<u64>,
    /// Sum edges and nodes over a manifest instead.
    #[arg(long, conflicts_with_all = ["edges", "nodes"])]
    manifest: Option<PathBuf>,
    #[arg(long)]
    layers: u64,
    /// Operations per message.
    #[arg(long)]
    y: u64,
    /// Operations per node update.
    #[arg(long, default_value_t = 0)]
    x: u64,
    #[arg(long, value_enum, default_value = "exact")]
    mode: FlopsArg,
    #[arg(long, value_enum, default_value = "undirected")]
    edge_convention: EdgeArg,
    /// Also write a JSON document here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CollapseArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Calibrate on the N smallest sizes instead of everything up to the best one.
    #[arg(long)]
    calibrate_first: Option<usize>,
    #[arg(long, default_value_t = 0.02)]
    rel_tol: f64,
    #[arg(long, default_value_t = 2)]
    min_consecutive: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GroupArg {
    NParams,
    DataFraction,
}

#[derive(Args, Debug)]
struct OverfitArgs {
    /// Loss-curve CSV.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEVERITY_THRESHOLD)]
    threshold: f64,
    /// Compare severity along this key (needs at least two curves).
    #[arg(long, value_enum)]
    group_by: Option<GroupArg>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DepthArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 1000)]
    resamples: usize,
    #[arg(long, default_value_t = 0.95)]
    confidence: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long)]
    form: ScalingForm,
    /// Parameters as `name=value` pairs, e.g. `a=2,b=0.35,c=5,eps_inf=0.05`.
    #[arg(long, value_delimiter = ',', required = true)]
    params: Vec<String>,
    /// Scales: a comma list, or `logspace:LO:HI:COUNT` in decades. For
    /// combined forms this is the data axis.
    #[arg(long)]
    points: String,
    /// Model sizes for combined forms (same syntax); records cover the grid.
    #[arg(long)]
    model_points: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value = "model")]
    axis: ScaleAxis,
    #[arg(long, default_value_t = 1.0)]
    fixed_n_params: f64,
    #[arg(long, default_value_t = 1.0)]
    fixed_data_size: f64,
    #[arg(long)]
    unit: Option<DataUnit>,
    #[arg(long, default_value = "synthetic")]
    task: String,
    /// Depth to stamp on every record.
    #[arg(long)]
    depth: Option<u32>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[arg(long)]
    fit: PathBuf,
    /// The experiment CSV the fit was made from.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = io::DEFAULT_CURVE_SAMPLES)]
    samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{rendered}");
                1
            } else {
                let _ = write!(stdout, "{rendered}");
                0
            };
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_numeric() {
                2
            } else {
                1
            }
        }
    }
}

fn emit(out: &Option<PathBuf>, stdout: &mut dyn Write, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_report<T: Serialize>(
    out: &Option<PathBuf>,
    stdout: &mut dyn Write,
    command: &str,
    inputs: Vec<InputDigest>,
    body: T,
) -> Result<()> {
    emit(out, stdout, &Report::new(command, inputs, body).to_json()?)
}

/// Console summaries go to stdout when the document goes to a file, and to
/// stderr otherwise so stdout stays machine-readable.
fn summary<'a>(out: &Option<PathBuf>, stdout: &'a mut dyn Write, stderr: &'a mut dyn Write) -> &'a mut dyn Write {
    if out.is_some() {
        stdout
    } else {
        stderr
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Fit(a) => cmd_fit(a, stdout, stderr),
        Command::Predict(a) => cmd_predict(a, stdout).map(|_| 0),
        Command::Split(a) => cmd_split(a, stdout, stderr).map(|_| 0),
        Command::Subsample(a) => cmd_subsample(a, stdout).map(|_| 0),
        Command::Flops(a) => cmd_flops(a, stdout).map(|_| 0),
        Command::Collapse(a) => cmd_collapse(a, stdout, stderr).map(|_| 0),
        Command::Overfit(a) => cmd_overfit(a, stdout, stderr).map(|_| 0),
        Command::DepthCompare(a) => cmd_depth(a, stdout, stderr).map(|_| 0),
        Command::Synth(a) => cmd_synth(a, stdout, stderr).map(|_| 0),
        Command::Report(a) => cmd_report(a, stdout, stderr).map(|_| 0),
    }
}

fn cmd_fit(a: FitArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let mut config = a.common.fit_config()?;
    if a.axis.is_some() {
        config.axis = a.axis;
    }
    if let Some(space) = a.residual_space {
        config.residual_space = match space {
            SpaceArg::Linear => ResidualSpace::Linear,
            SpaceArg::Log => ResidualSpace::Log,
        };
    }
    config.validate()?;
    let records = io::read_experiments(&a.input)?;
    let mut result = fit(a.form, &records, &config)?;
    if a.bootstrap > 0 {
        result.bootstrap_ci = Some(bootstrap_ci(a.form, &records, &config, a.bootstrap, a.confidence)?);
    }
    let status = result.converged;
    let w = summary(&a.common.out, stdout, stderr);
    writeln!(
        w,
        "{}: R² = {} ({}, {} iterations)",
        a.form,
        fmt_sig(result.r_squared, 4),
        status,
        result.iterations
    )?;
    for (name, value) in result.params.named_values() {
        writeln!(w, "  {name} = {}", fmt_sig(value, 4))?;
    }
    let body = FitOutput {
        n_records: records.len(),
        config,
        fit: result,
    };
    emit_report(&a.common.out, stdout, "fit", vec![InputDigest::of_file(&a.input)?], body)?;
    Ok(if status == FitStatus::MaxIterations { 2 } else { 0 })
}

fn parse_target(form: ScalingForm, raw: &str) -> Result<ScalePoint> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::InvalidInput(format!("bad scale `{s}`")))
    };
    if form.is_combined() {
        let (d, n) = raw
            .split_once(':')
            .ok_or_else(|| Error::InvalidInput(format!("combined forms need `D:N` targets, got `{raw}`")))?;
        Ok(ScalePoint::Pair {
            data: num(d)?,
            model: num(n)?,
        })
    } else {
        Ok(ScalePoint::Single(num(raw)?))
    }
}

#[derive(Serialize)]
struct PredictOutput {
    form: ScalingForm,
    predictions: Vec<Prediction>,
}

fn cmd_predict(a: PredictArgs, stdout: &mut dyn Write) -> Result<()> {
    let report = io::read_fit_report(&a.fit)?;
    let fit = report.result.fit;
    let targets = a.at.iter().map(|s| parse_target(fit.form, s)).collect::<Result<Vec<_>>>()?;
    let predictions = extrapolate(&fit, &targets, fit.bootstrap_ci.as_ref())?;
    emit_report(
        &a.out,
        stdout,
        "predict",
        vec![InputDigest::of_file(&a.fit)?],
        PredictOutput { form: fit.form, predictions },
    )
}

fn cmd_split(a: SplitArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let manifest = io::read_manifest(&a.manifest)?;
    let split = match a.mode {
        SplitArg::EqualGraphs => split_equal_graphs(&manifest)?,
        SplitArg::EqualEdges => split_equal_edges(&manifest)?,
    };
    writeln!(
        summary(&a.common.out, stdout, stderr),
        "simple: {} graphs, {} edges; complex: {} graphs, {} edges",
        split.simple_graphs,
        split.simple_edges,
        split.complex_graphs,
        split.complex_edges
    )?;
    if let Some(prefix) = &a.write_halves {
        for (suffix, half) in [("simple", &split.simple), ("complex", &split.complex)] {
            let keep: std::collections::HashSet<&str> = half.iter().map(String::as_str).collect();
            let records = manifest
                .records
                .iter()
                .filter(|r| keep.contains(r.graph_id.as_str()))
                .cloned()
                .collect();
            let half = GraphManifest::new(format!("{}.{suffix}", manifest.source_name), records)?;
            let path = PathBuf::from(format!("{}.{suffix}.csv", prefix.display()));
            io::write_manifest(std::fs::File::create(path)?, &half)?;
        }
    }
    emit_report(&a.common.out, stdout, "split", vec![InputDigest::of_file(&a.manifest)?], split)
}

fn cmd_subsample(a: SubsampleArgs, stdout: &mut dyn Write) -> Result<()> {
    let manifest = io::read_manifest(&a.manifest)?;
    let subset = subsample_fraction(&manifest, a.ratio, a.common.seed.unwrap_or(0))?;
    let mut buf = Vec::new();
    io::write_manifest(&mut buf, &subset)?;
    emit(&a.common.out, stdout, std::str::from_utf8(&buf).expect("csv is utf-8"))
}

#[derive(Serialize)]
struct FlopsOutput {
    total_edges: u64,
    total_nodes: u64,
    cost: MessagePassingCost,
    mode: FlopsMode,
    edge_convention: EdgeConvention,
    /// Decimal string: the count can exceed 2^64.
    flops: String,
}

fn cmd_flops(a: FlopsArgs, stdout: &mut dyn Write) -> Result<()> {
    let (edges, nodes, inputs) = match &a.manifest {
        Some(path) => {
            let m = io::read_manifest(path)?;
            (total_edges(&m), m.total_nodes(), vec![InputDigest::of_file(path)?])
        }
        None => (a.edges.unwrap_or(0), a.nodes.unwrap_or(0), Vec::new()),
    };
    let cost = MessagePassingCost::new(a.y, a.x, a.layers)?;
    let mode = match a.mode {
        FlopsArg::Exact => FlopsMode::Exact,
        FlopsArg::PaperApprox => FlopsMode::PaperApprox,
    };
    let convention = match a.edge_convention {
        EdgeArg::Undirected => EdgeConvention::Undirected,
        EdgeArg::Directed => EdgeConvention::Directed,
    };
    let flops = flops_forward(edges, nodes, &cost, mode, convention);
    writeln!(stdout, "{flops}")?;
    if a.out.is_some() {
        let body = FlopsOutput {
            total_edges: edges,
            total_nodes: nodes,
            cost,
            mode,
            edge_convention: convention,
            flops: flops.to_string(),
        };
        emit_report(&a.out, stdout, "flops", inputs, body)?;
    }
    Ok(())
}

fn cmd_collapse(a: CollapseArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let records = io::read_experiments(&a.input)?;
    let config = CollapseConfig {
        calibration: a.calibrate_first.map_or(CalibrationRule::UpToBest, CalibrationRule::FirstN),
        rel_tol: a.rel_tol,
        min_consecutive: a.min_consecutive,
        fit: a.common.fit_config()?,
    };
    let report = detect_collapse(&records, &config)?;
    let w = summary(&a.common.out, stdout, stderr);
    writeln!(
        w,
        "calibrated on {} sizes (R² = {}); {} flagged",
        report.calibration_size,
        fmt_sig(report.fitted.r_squared, 4),
        report.flagged.len()
    )?;
    match report.collapse_onset {
        Some(onset) => writeln!(w, "collapse onset at n_params = {}", fmt_sig(onset, 4))?,
        None => writeln!(w, "no collapse detected")?,
    }
    emit_report(&a.common.out, stdout, "collapse", vec![InputDigest::of_file(&a.input)?], report)
}

#[derive(Serialize)]
struct OverfitOutput {
    reports: Vec<OverfitReport>,
    comparison: Option<OverfitComparison>,
}

fn cmd_overfit(a: OverfitArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let curves = io::read_loss_curves(&a.input)?;
    let reports = curves
        .iter()
        .map(|c| detect_overfitting(c, a.threshold))
        .collect::<Result<Vec<_>>>()?;
    let comparison = match a.group_by {
        Some(g) => {
            let group_by = match g {
                GroupArg::NParams => GroupBy::NParams,
                GroupArg::DataFraction => GroupBy::DataFraction,
            };
            Some(compare_overfitting(&curves, group_by, a.threshold)?)
        }
        None => None,
    };
    let w = summary(&a.out, stdout, stderr);
    for r in &reports {
        writeln!(
            w,
            "{}: severity {}{}",
            r.model_id,
            fmt_sig(r.severity, 4),
            if r.overfit { " (overfit)" } else { "" }
        )?;
    }
    if let Some(c) = &comparison {
        writeln!(w, "{}", c.summary)?;
    }
    emit_report(
        &a.out,
        stdout,
        "overfit",
        vec![InputDigest::of_file(&a.input)?],
        OverfitOutput { reports, comparison },
    )
}

fn cmd_depth(a: DepthArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let records = io::read_experiments(&a.input)?;
    let grouped = group_by_depth(&records)?;
    let config = a.common.fit_config()?;
    let cmp = compare_depth_curves(&grouped, &config, a.resamples, a.confidence)?;
    let w = summary(&a.common.out, stdout, stderr);
    writeln!(w, "verdict: {:?}", cmp.verdict)?;
    if let Some(d) = cmp.best_asymptote_depth {
        writeln!(w, "best asymptote at depth {d}")?;
    }
    emit_report(&a.common.out, stdout, "depth-compare", vec![InputDigest::of_file(&a.input)?], cmp)
}

fn parse_points(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidInput(format!("bad point list `{spec}`"));
    if let Some(rest) = spec.strip_prefix("logspace:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let [lo, hi, count] = parts.as_slice() else {
            return Err(bad());
        };
        let lo: f64 = lo.parse().map_err(|_| bad())?;
        let hi: f64 = hi.parse().map_err(|_| bad())?;
        let count: usize = count.parse().map_err(|_| bad())?;
        return Ok(log_spaced(lo, hi, count));
    }
    spec.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
}

fn parse_params(form: ScalingForm, pairs: &[String]) -> Result<ParamSet> {
    let names = form.param_names();
    let mut values = vec![None; names.len()];
    for pair in pairs {
        let (name, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("expected name=value, got `{pair}`")))?;
        let idx = names
            .iter()
            .position(|n| *n == name.trim())
            .ok_or_else(|| Error::InvalidInput(format!("{form} has no parameter `{name}`")))?;
        values[idx] = Some(
            value
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("bad value for `{name}`")))?,
        );
    }
    let values = values
        .into_iter()
        .zip(names)
        .map(|(v, n)| v.ok_or_else(|| Error::InvalidInput(format!("missing parameter `{n}`"))))
        .collect::<Result<Vec<_>>>()?;
    ParamSet::from_values(form, &values)
}

fn cmd_synth(a: SynthArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let params = parse_params(a.form, &a.params)?;
    let primary = parse_points(&a.points)?;
    let points: Vec<ScalePoint> = if a.form.is_combined() {
        let models = parse_points(
            a.model_points
                .as_deref()
                .ok_or_else(|| Error::InvalidInput("combined forms need --model-points".into()))?,
        )?;
        primary
            .iter()
            .flat_map(|&d| models.iter().map(move |&n| ScalePoint::Pair { data: d, model: n }))
            .collect()
    } else {
        primary.into_iter().map(ScalePoint::Single).collect()
    };
    let layout = RecordLayout {
        axis: a.axis,
        fixed_n_params: a.fixed_n_params,
        fixed_data_size: a.fixed_data_size,
        // Model-scaling sweeps default to the full data set as a fraction.
        data_unit: a.unit.unwrap_or(if a.axis == ScaleAxis::Model && !a.form.is_combined() {
            DataUnit::Fraction
        } else {
            DataUnit::Edges
        }),
        task: a.task,
    };
    let mut set = generate_synthetic(&params, &points, a.noise, a.common.seed.unwrap_or(0), &layout)?;
    for r in &mut set.records {
        r.depth = a.depth;
    }
    if set.clamped > 0 {
        writeln!(stderr, "warning: {} values clamped to the metric's range", set.clamped)?;
    }
    let mut buf = Vec::new();
    io::write_experiments(&mut buf, &set.records)?;
    emit(&a.common.out, stdout, std::str::from_utf8(&buf).expect("csv is utf-8"))
}

fn cmd_report(a: ReportArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let report = io::read_fit_report(&a.fit)?;
    let records = io::read_experiments(&a.input)?;
    let plot = io::emit_plot_data(&report.result.fit, &records, a.samples)?;
    writeln!(
        summary(&a.out, stdout, stderr),
        "{}: R² = {}, {} points, {} curve samples",
        plot.form,
        fmt_sig(plot.r_squared, 4),
        plot.points.len(),
        plot.curve.len()
    )?;
    let inputs = vec![InputDigest::of_file(&a.fit)?, InputDigest::of_file(&a.input)?];
    emit_report(&a.out, stdout, "report", inputs, plot)
}

/// Entry point for the binary.
pub fn main_with_env() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

