mod common;

use std::collections::BTreeMap;

use common::{clean_curve, depress, params, synth};
use graph_scaling::analysis::{
    compare_depth_curves, compare_overfitting, detect_collapse, detect_overfitting, extrapolate, CollapseConfig,
    Distinctness, GroupBy, LossCurve, Monotonicity, DEFAULT_SEVERITY_THRESHOLD,
};
use graph_scaling::fitting::log_spaced;
use graph_scaling::{fit, ExperimentRecord, FitConfig, ScalePoint, ScalingForm};
use proptest::prelude::*;

#[test]
fn clean_curves_are_never_flagged() {
    for seed in 0..100 {
        let report = detect_collapse(&clean_curve(seed), &CollapseConfig::default()).unwrap();
        assert!(report.flagged.is_empty(), "seed {seed}: {:?}", report.flagged);
        assert_eq!(report.collapse_onset, None);
    }
}

#[test]
fn injected_collapse_is_flagged_exactly() {
    for seed in 0..100 {
        let mut records = clean_curve(seed);
        depress(&mut records, 3, 0.1);
        let report = detect_collapse(&records, &CollapseConfig::default()).unwrap();
        let flagged: Vec<f64> = report.flagged.iter().map(|f| f.record.n_params).collect();
        let want: Vec<f64> = records[9..].iter().map(|r| r.n_params).collect();
        assert_eq!(flagged, want, "seed {seed}");
        assert_eq!(report.collapse_onset, Some(records[9].n_params));
        let largest_calibration = records[report.calibration_size - 1].n_params;
        assert!(report.flagged.iter().all(|f| f.record.n_params >= largest_calibration));
    }
}

#[test]
fn single_depressed_point_has_no_onset() {
    let mut records = clean_curve(7);
    depress(&mut records, 1, 0.1);
    let report = detect_collapse(&records, &CollapseConfig::default()).unwrap();
    assert_eq!(report.flagged.len(), 1);
    assert_eq!(report.collapse_onset, None);
}

#[test]
fn improvements_are_not_flagged() {
    let mut records = clean_curve(3);
    depress(&mut records, 3, -0.1);
    let report = detect_collapse(&records, &CollapseConfig::default()).unwrap();
    assert!(report.flagged.is_empty());
}

#[test]
fn extrapolation_examples() {
    let truth = params(ScalingForm::ShiftedScore, &[1.0, 0.4, 20.0, 0.85]);
    let xs = log_spaced(0.0, 4.0, 20);
    let pts: Vec<ScalePoint> = xs.iter().map(|&x| ScalePoint::Single(x)).collect();
    let records = synth(&truth, &pts, 0.0, 0);
    let f = fit(ScalingForm::ShiftedScore, &records, &FitConfig::default()).unwrap();

    let at_training = extrapolate(&f, &pts, None).unwrap();
    for (p, r) in at_training.iter().zip(&records) {
        assert!((p.predicted - r.metric_value).abs() <= 1e-6);
    }
    let far = extrapolate(&f, &[ScalePoint::Single(1e12)], None).unwrap();
    assert!((far[0].predicted - f.params.asymptote()).abs() <= 1e-3);

    let target = ScalePoint::Single(1e6);
    let predicted = extrapolate(&f, &[target], None).unwrap()[0].predicted;
    let want = truth.eval(target).unwrap();
    assert!(((predicted - want) / want).abs() <= 0.02, "{predicted} vs {want}");
}

#[test]
fn extrapolation_of_a_noisy_truncated_fit() {
    // Trained on X <= 1e4 only, with noise.
    let truth = params(ScalingForm::ShiftedScore, &[2.0, 0.5, 5.0, 0.9]);
    let pts: Vec<ScalePoint> = log_spaced(-1.0, 4.0, 64).into_iter().map(ScalePoint::Single).collect();
    let records = synth(&truth, &pts, 0.005, 5);
    let f = fit(ScalingForm::ShiftedScore, &records, &FitConfig::default()).unwrap();
    let target = ScalePoint::Single(1e6);
    let predicted = extrapolate(&f, &[target], None).unwrap()[0].predicted;
    let want = truth.eval(target).unwrap();
    assert!(((predicted - want) / want).abs() <= 0.02, "{predicted} vs {want}");
}

fn curve(id: &str, n_params: f64, fraction: f64, val: &[f64]) -> LossCurve {
    let epochs = (0..val.len()).map(|e| e as f64).collect();
    let train = (0..val.len()).map(|e| 1.0 / (1.0 + e as f64)).collect();
    LossCurve::new(id, n_params, fraction, epochs, train, val.to_vec()).unwrap()
}

/// Validation curve that bottoms out at 0.5 and then rises to `0.5·(1 + severity)`.
fn with_severity(severity: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..10).map(|e| 0.5 + 0.5 * (1.0 - e as f64 / 9.0)).collect();
    let rise = (1..=5).map(|k| 0.5 * (1.0 + severity * k as f64 / 5.0));
    v.extend(rise);
    v
}

#[test]
fn overfit_examples() {
    let r = detect_overfitting(&curve("m", 1e5, 1.0, &[1.0, 0.8, 0.7, 0.75, 0.9]), DEFAULT_SEVERITY_THRESHOLD).unwrap();
    assert_eq!(r.epoch_min_val, 2);
    assert!((r.severity - 0.2857).abs() <= 1e-4);
    assert!(r.overfit);
    let mono = detect_overfitting(&curve("m", 1e5, 1.0, &[1.0, 0.9, 0.8, 0.7]), DEFAULT_SEVERITY_THRESHOLD).unwrap();
    assert_eq!((mono.severity, mono.overfit), (0.0, false));
    let flat = detect_overfitting(&curve("m", 1e5, 1.0, &[0.6; 5]), DEFAULT_SEVERITY_THRESHOLD).unwrap();
    assert_eq!((flat.severity, flat.overfit), (0.0, false));
}

#[test]
fn comparison_orders_injected_severities() {
    let curves = vec![
        curve("full", 1e5, 1.0, &with_severity(0.0)),
        curve("tenth", 1e5, 0.1, &with_severity(0.3)),
        curve("half", 1e5, 0.5, &with_severity(0.1)),
    ];
    let cmp = compare_overfitting(&curves, GroupBy::DataFraction, DEFAULT_SEVERITY_THRESHOLD).unwrap();
    let order: Vec<&str> = cmp.reports.iter().map(|r| r.model_id.as_str()).collect();
    assert_eq!(order, ["tenth", "half", "full"]);
    assert!((cmp.reports[0].severity - 0.3).abs() < 1e-12);
    assert_eq!(cmp.decreasing, Monotonicity::Observed);
    assert!(cmp.summary.contains("decreasing in data_fraction: observed"), "{}", cmp.summary);

    let growing = vec![
        curve("small", 1e4, 1.0, &with_severity(0.0)),
        curve("large", 1e6, 1.0, &with_severity(0.4)),
    ];
    let cmp = compare_overfitting(&growing, GroupBy::NParams, DEFAULT_SEVERITY_THRESHOLD).unwrap();
    assert!(cmp.reports[1].severity > cmp.reports[0].severity);
    assert_eq!(cmp.increasing, Monotonicity::Observed);

    let same = vec![curve("a", 1e4, 1.0, &with_severity(0.2)), curve("b", 1e5, 1.0, &with_severity(0.2))];
    let cmp = compare_overfitting(&same, GroupBy::NParams, DEFAULT_SEVERITY_THRESHOLD).unwrap();
    assert_eq!(cmp.decreasing, Monotonicity::Tied);
    assert_eq!(cmp.increasing, Monotonicity::Tied);
}

proptest! {
    #[test]
    fn severity_ignores_epoch_labels(
        val in prop::collection::vec(0.1f64..2.0, 3..30),
        scale in 0.01f64..100.0,
        offset in -100.0f64..100.0,
    ) {
        let n = val.len();
        let base = curve("m", 1.0, 1.0, &val);
        let epochs = (0..n).map(|e| offset + scale * e as f64).collect();
        let rescaled = LossCurve::new("m", 1.0, 1.0, epochs, base.train_loss.clone(), val.clone()).unwrap();
        let a = detect_overfitting(&base, DEFAULT_SEVERITY_THRESHOLD).unwrap();
        let b = detect_overfitting(&rescaled, DEFAULT_SEVERITY_THRESHOLD).unwrap();
        prop_assert_eq!(a.severity, b.severity);
        prop_assert_eq!(a.epoch_min_val, b.epoch_min_val);
        prop_assert!(a.severity >= 0.0);
        prop_assert_eq!(a.overfit, a.severity > DEFAULT_SEVERITY_THRESHOLD);
    }

    #[test]
    fn appended_epochs_only_change_the_final_term(
        val in prop::collection::vec(0.1f64..2.0, 3..30),
        tail in prop::collection::vec(0.0f64..1.0, 1..5),
    ) {
        let base = detect_overfitting(&curve("m", 1.0, 1.0, &val), DEFAULT_SEVERITY_THRESHOLD).unwrap();
        // Appended values above the current minimum keep the minimum in place.
        let mut longer = val.clone();
        longer.extend(tail.iter().map(|t| base.min_val_loss + t));
        let r = detect_overfitting(&curve("m", 1.0, 1.0, &longer), DEFAULT_SEVERITY_THRESHOLD).unwrap();
        prop_assert_eq!(r.epoch_min_val, base.epoch_min_val);
        prop_assert_eq!(r.min_val_loss, base.min_val_loss);
        let expected = (longer.last().unwrap() - base.min_val_loss) / base.min_val_loss;
        prop_assert!((r.severity - expected).abs() <= 1e-12 * expected.max(1.0));
    }
}

fn depth_records(s_inf: f64, depth: u32, seed: u64) -> Vec<ExperimentRecord> {
    let truth = params(ScalingForm::ShiftedScore, &[2.0, 0.5, 5.0, s_inf]);
    let pts: Vec<ScalePoint> = log_spaced(-1.0, 4.0, 24).into_iter().map(ScalePoint::Single).collect();
    let mut records = synth(&truth, &pts, 0.002, seed);
    for r in &mut records {
        r.depth = Some(depth);
    }
    records
}

#[test]
fn identical_depths_are_not_distinguishable() {
    let mut grouped = BTreeMap::new();
    grouped.insert(2, depth_records(0.8, 2, 1));
    grouped.insert(4, depth_records(0.8, 4, 2));
    let cmp = compare_depth_curves(&grouped, &FitConfig::default(), 200, 0.95).unwrap();
    assert_eq!(cmp.verdict, Distinctness::NotDistinguishable, "{:?}", cmp.disjoint);
}

#[test]
fn separated_asymptotes_are_distinct() {
    let mut grouped = BTreeMap::new();
    grouped.insert(2, depth_records(0.70, 2, 1));
    grouped.insert(6, depth_records(0.80, 6, 2));
    let cmp = compare_depth_curves(&grouped, &FitConfig::default(), 200, 0.95).unwrap();
    assert_eq!(cmp.verdict, Distinctness::Distinct);
    assert_eq!(cmp.best_asymptote_depth, Some(6));
}

#[test]
fn best_depth_among_three() {
    let build = |order: &[(u32, f64)]| {
        let mut grouped = BTreeMap::new();
        for &(d, s) in order {
            grouped.insert(d, depth_records(s, d, d as u64));
        }
        grouped
    };
    let a = build(&[(2, 0.78), (4, 0.84), (6, 0.81)]);
    let b = build(&[(6, 0.81), (2, 0.78), (4, 0.84)]);
    let cmp = compare_depth_curves(&a, &FitConfig::default(), 200, 0.95).unwrap();
    assert_eq!(cmp.best_asymptote_depth, Some(4));
    assert_eq!(cmp, compare_depth_curves(&b, &FitConfig::default(), 200, 0.95).unwrap());
}

#[test]
fn failed_depth_does_not_abort_the_rest() {
    let mut grouped = BTreeMap::new();
    grouped.insert(2, depth_records(0.8, 2, 1));
    grouped.insert(4, depth_records(0.84, 4, 2));
    grouped.insert(8, depth_records(0.8, 8, 3)[..3].to_vec());
    let cmp = compare_depth_curves(&grouped, &FitConfig::default(), 200, 0.95).unwrap();
    assert!(matches!(
        cmp.depths.iter().find(|d| d.depth == 8).unwrap().outcome,
        graph_scaling::analysis::DepthOutcome::Failed { .. }
    ));
    assert_eq!(cmp.best_asymptote_depth, Some(4));
}
