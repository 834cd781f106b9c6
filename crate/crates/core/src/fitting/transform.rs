//! Maps between constrained parameters and the unconstrained space LM works in.

use crate::models::ScalingForm;

/// Past these magnitudes of `u` the transform is considered pinned at a boundary.
const EXP_LOW: f64 = -23.0;
const EXP_HIGH: f64 = 60.0;
const LOGIT_LIMIT: f64 = 23.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Transform {
    /// `θ = exp(u)`, for amplitudes, exponents, shifts and `ε∞`.
    Exp,
    /// `θ = 1 / (1 + exp(−u))`, for `s∞ ∈ (0, 1]`.
    Logistic,
}

impl Transform {
    pub(crate) fn for_form(form: ScalingForm) -> Vec<Transform> {
        let mut t = vec![Transform::Exp; form.n_params()];
        if form.metric_kind() == crate::records::MetricKind::Score {
            t[form.asymptote_index()] = Transform::Logistic;
        }
        t
    }

    pub(crate) fn to_param(self, u: f64) -> f64 {
        match self {
            Transform::Exp => u.exp(),
            Transform::Logistic => 1.0 / (1.0 + (-u).exp()),
        }
    }

    /// `dθ/du` at `u`.
    pub(crate) fn derivative(self, u: f64) -> f64 {
        match self {
            Transform::Exp => u.exp(),
            Transform::Logistic => {
                let s = self.to_param(u);
                s * (1.0 - s)
            }
        }
    }

    /// Inverse map; values on or past the boundary are nudged inside it.
    pub(crate) fn to_unconstrained(self, theta: f64) -> f64 {
        match self {
            Transform::Exp => theta.max(EXP_LOW.exp()).ln(),
            Transform::Logistic => {
                let s = theta.clamp(1e-10, 1.0 - 1e-10);
                (s / (1.0 - s)).ln()
            }
        }
    }

    pub(crate) fn at_boundary(self, u: f64) -> bool {
        match self {
            Transform::Exp => !(EXP_LOW..=EXP_HIGH).contains(&u),
            Transform::Logistic => u.abs() > LOGIT_LIMIT,
        }
    }
}
