//! Default multistart grid built from the observed data.

use rand::seq::SliceRandom;

use crate::models::{ScalePoint, ScalingForm};
use crate::records::MetricKind;
use crate::rng::seeded;

const DECAY_GRID: [f64; 4] = [0.1, 0.3, 0.5, 1.0];
const AMPLITUDE_FACTORS: [f64; 3] = [1.0, 2.0, 0.5];
const MAX_COMBINED_STARTS: usize = 64;

/// Seed offset so Latin sampling does not share a stream with bootstrap resampling.
const LATIN_STREAM: u64 = 0x5eed_1a71_0000_0001;

struct Summary {
    range: f64,
    best: f64,
}

fn summarize(observed: &[f64], kind: MetricKind) -> Summary {
    let max = observed.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = observed.iter().copied().fold(f64::INFINITY, f64::min);
    let mut range = max - min;
    if !(range > 0.0) {
        range = (max.abs() * 0.1).max(1e-3);
    }
    let best = match kind {
        MetricKind::Error => min,
        MetricKind::Score => max,
    };
    Summary { range, best }
}

fn asymptote_candidates(s: &Summary, kind: MetricKind) -> Vec<f64> {
    match kind {
        MetricKind::Error => [s.best - 0.1 * s.range, s.best]
            .into_iter()
            .map(|v| v.max(1e-3 * s.range))
            .collect(),
        MetricKind::Score => [s.best + 0.1 * s.range, s.best]
            .into_iter()
            .map(|v| v.clamp(1e-6, 1.0 - 1e-9))
            .collect(),
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn shift_candidates(xs: &[f64]) -> Vec<f64> {
    let med = median(xs.to_vec());
    let mut out: Vec<f64> = vec![1.0];
    for c in [med / 10.0, med] {
        if c > 0.0 && c.is_finite() && !out.iter().any(|&o| (o - c).abs() <= 1e-12 * c.max(o)) {
            out.push(c);
        }
    }
    out
}

fn min_positive(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().filter(|&x| x > 0.0).fold(f64::INFINITY, f64::min);
    if m.is_finite() {
        m
    } else {
        1.0
    }
}

/// Amplitude start for one `a·(X+c)^(−b)` term: the term spans `range` at the
/// smallest input.
fn amplitude(factor: f64, range: f64, x_min: f64, b: f64, c: f64) -> f64 {
    factor * range * (x_min + c).powf(b)
}

struct TermGrid {
    x_min: f64,
    shifts: Vec<f64>,
}

impl TermGrid {
    fn new(xs: &[f64], shifted: bool) -> Self {
        if shifted {
            TermGrid {
                x_min: xs.iter().copied().fold(f64::INFINITY, f64::min).max(0.0),
                shifts: shift_candidates(xs),
            }
        } else {
            TermGrid {
                x_min: min_positive(xs),
                shifts: vec![0.0],
            }
        }
    }

    /// Axis lengths: decay, amplitude factor, shift.
    fn axes(&self) -> [usize; 3] {
        [DECAY_GRID.len(), AMPLITUDE_FACTORS.len(), self.shifts.len()]
    }

    fn values(&self, idx: &[usize], range: f64, shifted: bool, out: &mut Vec<f64>) {
        let b = DECAY_GRID[idx[0]];
        let c = self.shifts[idx[2]];
        out.push(amplitude(AMPLITUDE_FACTORS[idx[1]], range, self.x_min, b, c));
        out.push(b);
        if shifted {
            out.push(c);
        }
    }
}

pub(super) fn default_starts(
    form: ScalingForm,
    points: &[ScalePoint],
    observed: &[f64],
    kind: MetricKind,
    seed: u64,
) -> Vec<Vec<f64>> {
    let summary = summarize(observed, kind);
    let asymptotes = asymptote_candidates(&summary, kind);
    let shifted = matches!(
        form,
        ScalingForm::ShiftedError | ScalingForm::ShiftedScore | ScalingForm::CombinedScore
    );
    if !form.is_combined() {
        let xs: Vec<f64> = points
            .iter()
            .map(|p| match *p {
                ScalePoint::Single(x) => x,
                ScalePoint::Pair { data, .. } => data,
            })
            .collect();
        let term = TermGrid::new(&xs, shifted);
        let mut lengths = term.axes().to_vec();
        lengths.push(asymptotes.len());
        return latin_indices(&lengths, usize::MAX, seed)
            .into_iter()
            .map(|idx| {
                let mut v = Vec::with_capacity(form.n_params());
                term.values(&idx[..3], summary.range, shifted, &mut v);
                v.push(asymptotes[idx[3]]);
                v
            })
            .collect();
    }

    let (ds, ns): (Vec<f64>, Vec<f64>) = points
        .iter()
        .map(|p| match *p {
            ScalePoint::Pair { data, model } => (data, model),
            ScalePoint::Single(x) => (x, x),
        })
        .unzip();
    let data_term = TermGrid::new(&ds, shifted);
    let model_term = TermGrid::new(&ns, shifted);
    let half = 0.5 * summary.range;
    let mut lengths = data_term.axes().to_vec();
    lengths.extend(model_term.axes());
    lengths.push(asymptotes.len());
    latin_indices(&lengths, MAX_COMBINED_STARTS, seed)
        .into_iter()
        .map(|idx| {
            let mut v = Vec::with_capacity(form.n_params());
            data_term.values(&idx[..3], half, shifted, &mut v);
            model_term.values(&idx[3..6], half, shifted, &mut v);
            v.push(asymptotes[idx[6]]);
            v
        })
        .collect()
}

/// Index rows over a Cartesian product of axes with the given lengths. When
/// the product exceeds `limit`, `limit` rows are Latin-sampled: each axis
/// cycles through its candidates in a seeded shuffled order, so every
/// candidate of every axis appears about equally often.
fn latin_indices(lengths: &[usize], limit: usize, seed: u64) -> Vec<Vec<usize>> {
    let total = lengths.iter().try_fold(1usize, |acc, &l| acc.checked_mul(l));
    match total {
        Some(total) if total <= limit => (0..total)
            .map(|mut k| {
                lengths
                    .iter()
                    .map(|&l| {
                        let i = k % l;
                        k /= l;
                        i
                    })
                    .collect()
            })
            .collect(),
        _ => {
            let mut rng = seeded(seed ^ LATIN_STREAM);
            let columns: Vec<Vec<usize>> = lengths
                .iter()
                .map(|&l| {
                    let mut col: Vec<usize> = (0..limit).map(|k| k % l).collect();
                    col.shuffle(&mut rng);
                    col
                })
                .collect();
            (0..limit).map(|k| columns.iter().map(|c| c[k]).collect()).collect()
        }
    }
}
