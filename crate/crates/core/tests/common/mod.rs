#![allow(dead_code)]

use graph_scaling::fitting::{generate_synthetic, log_spaced, RecordLayout};
use graph_scaling::graph::{GraphManifest, GraphRecord};
use graph_scaling::{ExperimentRecord, ParamSet, ScalePoint, ScalingForm};
use graph_scaling::rng::seeded;
use rand::Rng;

pub fn params(form: ScalingForm, v: &[f64]) -> ParamSet {
    ParamSet::from_values(form, v).unwrap()
}

/// Well-conditioned generator parameters and inputs per form: every
/// parameter, shifts included, is identifiable at σ = 0.005.
pub fn recovery_design(form: ScalingForm) -> (ParamSet, Vec<ScalePoint>) {
    let singles = |lo, hi, n| log_spaced(lo, hi, n).into_iter().map(ScalePoint::Single).collect();
    match form {
        ScalingForm::BasicError => (params(form, &[2.0, 0.5, 0.05]), singles(0.0, 4.0, 48)),
        ScalingForm::ShiftedError => (params(form, &[3.0, 0.6, 4.0, 0.05]), singles(-1.0, 4.0, 96)),
        ScalingForm::ShiftedScore => (params(form, &[2.0, 0.5, 5.0, 0.9]), singles(-1.0, 4.0, 64)),
        ScalingForm::CombinedError => (params(form, &[1.0, 0.5, 0.8, 0.6, 0.05]), surface_grid(0.0, 3.0, 10)),
        // Scores stay within [0.05, 0.95] over the grid, so nothing is clamped.
        ScalingForm::CombinedScore => (params(form, &[0.5, 0.8, 1.0, 0.4, 1.0, 1.0, 0.95]), surface_grid(-2.0, 3.0, 24)),
    }
}

/// `side × side` log-spaced `(D, N)` grid over `10^lo ..= 10^hi` on both axes.
pub fn surface_grid(lo: f64, hi: f64, side: usize) -> Vec<ScalePoint> {
    let axis = log_spaced(lo, hi, side);
    axis.iter()
        .flat_map(|&d| axis.iter().map(move |&m| ScalePoint::Pair { data: d, model: m }))
        .collect()
}

pub fn layout_for(form: ScalingForm) -> RecordLayout {
    if form.is_combined() {
        RecordLayout::data_scaling(1.0)
    } else {
        RecordLayout::model_scaling()
    }
}

pub fn synth(truth: &ParamSet, points: &[ScalePoint], sigma: f64, seed: u64) -> Vec<ExperimentRecord> {
    generate_synthetic(truth, points, sigma, seed, &layout_for(truth.form()))
        .unwrap()
        .records
}

pub fn max_rel_err(got: &ParamSet, want: &ParamSet) -> f64 {
    got.values()
        .iter()
        .zip(want.values())
        .map(|(g, w)| ((g - w) / w).abs())
        .fold(0.0, f64::max)
}

/// Minimal-|difference| prefix cut by trying every cut point that leaves
/// both halves non-empty; ties to the smaller cut.
pub fn brute_cut(sorted_edges: &[u64]) -> usize {
    let total: u64 = sorted_edges.iter().sum();
    (1..sorted_edges.len())
        .min_by_key(|&m| {
            let first: u64 = sorted_edges[..m].iter().sum();
            (first.abs_diff(total - first), m)
        })
        .unwrap()
}

/// A random simple undirected graph on `n` nodes as an edge list.
pub fn random_graph(rng: &mut impl Rng, n: usize) -> Vec<(usize, usize)> {
    let p: f64 = rng.random_range(0.0..0.6);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                edges.push((i, j));
            }
        }
    }
    edges
}

/// Simulates `layers` rounds of message passing: every node runs its update
/// (`x` ops) and receives one `y`-op message along each incident edge.
pub fn brute_flops(n: usize, edges: &[(usize, usize)], x: u64, y: u64, layers: u64) -> u128 {
    let mut inbox: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(u, v) in edges {
        inbox[u].push(v);
        inbox[v].push(u);
    }
    let mut ops: u128 = 0;
    for _ in 0..layers {
        for neighbours in &inbox {
            for _ in neighbours {
                ops += y as u128;
            }
            ops += x as u128;
        }
    }
    ops
}

/// Manifest with 1–4 classes of 2–20 graphs each; edge counts drawn from a
/// small range so ties are common. Every class has at least one edge.
pub fn random_manifest(rng: &mut impl Rng, min_edges: u64) -> GraphManifest {
    let classes = rng.random_range(1..=4);
    let mut records = Vec::new();
    for c in 0..classes {
        let size = rng.random_range(2..=20);
        let first = records.len();
        let max_edges = rng.random_range(min_edges.max(1)..=60);
        for _ in 0..size {
            let id = records.len();
            records.push(GraphRecord {
                graph_id: format!("g{id}"),
                class_label: format!("class{c}"),
                num_nodes: rng.random_range(1..=50),
                num_edges: rng.random_range(min_edges..=max_edges),
            });
        }
        if records[first..].iter().all(|r: &GraphRecord| r.num_edges == 0) {
            records[first].num_edges = 1;
        }
    }
    GraphManifest::new("random", records).unwrap()
}

/// Central differences with `h = 1e-6·max(1, |θ|)`.
pub fn finite_difference(p: &ParamSet, point: ScalePoint) -> Vec<f64> {
    let form = p.form();
    let theta = p.values();
    (0..theta.len())
        .map(|k| {
            let h = 1e-6 * theta[k].abs().max(1.0);
            let mut up = theta.clone();
            let mut down = theta.clone();
            up[k] += h;
            down[k] -= h;
            let f = |v: &[f64]| ParamSet::relaxed(form, v).unwrap().eval(point).unwrap();
            (f(&up) - f(&down)) / (2.0 * h)
        })
        .collect()
}

/// Relative agreement, with an absolute floor scaled to the function value for
/// entries whose derivative is essentially zero.
pub fn gradient_matches(analytic: &[f64], numeric: &[f64], value_scale: f64) -> bool {
    analytic.iter().zip(numeric).all(|(a, n)| {
        let denom = a.abs().max(n.abs());
        (a - n).abs() <= 1e-5 * denom || (a - n).abs() <= 1e-9 * value_scale.max(1.0)
    })
}

/// A clean shifted-score model-scaling curve over 12 sizes with random
/// generator parameters, all scores strictly inside (0, 1).
pub fn clean_curve(seed: u64) -> Vec<ExperimentRecord> {
    let mut rng = seeded(seed);
    let truth = params(
        ScalingForm::ShiftedScore,
        &[
            rng.random_range(0.5..2.0),
            rng.random_range(0.3..0.6),
            rng.random_range(10.0..200.0),
            rng.random_range(0.7..0.95),
        ],
    );
    let xs: Vec<ScalePoint> = log_spaced(3.0, 7.0, 12).into_iter().map(ScalePoint::Single).collect();
    let records = synth(&truth, &xs, 0.0, seed);
    assert!(records.iter().all(|r| r.metric_value > 0.0 && r.metric_value < 1.0));
    records
}

pub fn depress(records: &mut [ExperimentRecord], last: usize, fraction_of_range: f64) {
    let (lo, hi) = records
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.metric_value), hi.max(r.metric_value)));
    let n = records.len();
    for r in &mut records[n - last..] {
        r.metric_value -= fraction_of_range * (hi - lo);
    }
}
