mod common;

use common::{max_rel_err, recovery_design, synth};
use graph_scaling::fitting::{bootstrap_ci, r_squared};
use graph_scaling::{fit, FitConfig, FitStatus, ParamSet, ScalingForm};
use proptest::prelude::*;

#[test]
fn noiseless_round_trip_all_forms() {
    for form in ScalingForm::ALL {
        let (truth, points) = recovery_design(form);
        assert!(points.len() >= 4 * form.n_params());
        let records = synth(&truth, &points, 0.0, 0);
        let f = fit(form, &records, &FitConfig::default()).unwrap();
        assert_eq!(f.converged, FitStatus::Converged, "{form}");
        assert!(max_rel_err(&f.params, &truth) <= 1e-3, "{form}: {:?}", f.params);
        assert!(f.r_squared >= 1.0 - 1e-8, "{form}: {}", f.r_squared);
    }
}

#[test]
fn noisy_recovery_all_forms() {
    for form in ScalingForm::ALL {
        let (truth, points) = recovery_design(form);
        for seed in 0..5 {
            let records = synth(&truth, &points, 0.005, seed);
            let f = fit(form, &records, &FitConfig::default()).unwrap();
            assert!(max_rel_err(&f.params, &truth) <= 0.1, "{form} seed {seed}: {:?}", f.params);
            assert!(f.r_squared >= 0.995, "{form} seed {seed}: {}", f.r_squared);
        }
    }
}

#[test]
fn fitted_params_satisfy_domain_on_arbitrary_data() {
    // Data from no particular law; whatever the optimiser does, the reported
    // parameters must still be a valid ParamSet.
    use graph_scaling::fitting::{generate_synthetic, log_spaced, RecordLayout};
    use graph_scaling::ScalePoint;
    for seed in 0..20 {
        let truth = ParamSet::from_values(ScalingForm::ShiftedScore, &[0.3, 0.4, 2.0, 0.6]).unwrap();
        let pts: Vec<ScalePoint> = log_spaced(0.0, 5.0, 12).into_iter().map(ScalePoint::Single).collect();
        let records = generate_synthetic(&truth, &pts, 0.2, seed, &RecordLayout::model_scaling()).unwrap().records;
        for form in [ScalingForm::ShiftedScore] {
            if let Ok(f) = fit(form, &records, &FitConfig::default()) {
                assert!(ParamSet::from_values(form, &f.params.values()).is_ok(), "{:?}", f.params);
                assert!(f.r_squared <= 1.0);
            }
        }
        let errs: Vec<_> = records
            .iter()
            .map(|r| {
                let mut e = r.clone();
                e.metric_kind = graph_scaling::MetricKind::Error;
                e
            })
            .collect();
        for form in [ScalingForm::BasicError, ScalingForm::ShiftedError] {
            if let Ok(f) = fit(form, &errs, &FitConfig::default()) {
                assert!(
                    f.converged == FitStatus::Degenerate || ParamSet::from_values(form, &f.params.values()).is_ok(),
                    "{:?}",
                    f.params
                );
                assert!(f.params.asymptote() >= 0.0);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn r_squared_ignores_pair_order(
        pairs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..40),
        rotate in 0usize..40,
    ) {
        let (obs, pred): (Vec<f64>, Vec<f64>) = pairs.iter().cloned().unzip();
        prop_assume!(obs.iter().any(|&o| (o - obs[0]).abs() > 1e-6));
        let mut shuffled = pairs.clone();
        shuffled.rotate_left(rotate % pairs.len());
        shuffled.reverse();
        let (obs2, pred2): (Vec<f64>, Vec<f64>) = shuffled.into_iter().unzip();
        let a = r_squared(&obs, &pred).unwrap();
        let b = r_squared(&obs2, &pred2).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        prop_assert!(a <= 1.0);
    }
}

#[test]
fn bootstrap_interval_coverage() {
    let (truth, points) = recovery_design(ScalingForm::BasicError);
    let points: Vec<_> = points.into_iter().step_by(3).collect();
    let trials = 100;
    let mut covered = vec![0; truth.values().len()];
    for trial in 0..trials {
        let records = synth(&truth, &points, 0.005, 1000 + trial);
        let config = FitConfig {
            seed: trial,
            ..FitConfig::default()
        };
        let ci = bootstrap_ci(ScalingForm::BasicError, &records, &config, 200, 0.95).unwrap();
        for (k, (iv, want)) in ci.intervals.iter().zip(truth.values()).enumerate() {
            if iv.low <= want && want <= iv.high {
                covered[k] += 1;
            }
        }
    }
    for (k, &c) in covered.iter().enumerate() {
        assert!(c >= 90, "parameter {k}: covered {c}/{trials}");
    }
}
