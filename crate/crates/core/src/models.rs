//! Closed-form scaling-law families and their analytic parameter gradients.
//!
//! Five families are supported, each with a fixed, named parameter list:
//!
//! | form            | value                                              | parameters                      |
//! |-----------------|----------------------------------------------------|---------------------------------|
//! | `basic-error`   | `a·X^(−b) + ε∞`                                    | `a, b, eps_inf`                 |
//! | `shifted-error` | `a·(X+c)^(−b) + ε∞`                                | `a, b, c, eps_inf`              |
//! | `shifted-score` | `s∞ − a·(X+c)^(−b)`                                | `a, b, c, s_inf`                |
//! | `combined-error`| `a₁·D^(−b₁) + a₂·N^(−b₂) + ε∞`                     | `a1, b1, a2, b2, eps_inf`       |
//! | `combined-score`| `s∞ − a₁·(D+c₁)^(−b₁) − a₂·(N+c₂)^(−b₂)`           | `a1, b1, c1, a2, b2, c2, s_inf` |
//!
//! Every exponent is stored as a positive decay rate and applied as `(·)^(−b)`,
//! evaluated as `exp(−b·ln(·))` so results do not depend on the platform `powf`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::records::MetricKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalingForm {
    BasicError,
    ShiftedError,
    ShiftedScore,
    CombinedError,
    CombinedScore,
}

impl ScalingForm {
    pub const ALL: [ScalingForm; 5] = [
        ScalingForm::BasicError,
        ScalingForm::ShiftedError,
        ScalingForm::ShiftedScore,
        ScalingForm::CombinedError,
        ScalingForm::CombinedScore,
    ];

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            ScalingForm::BasicError => &["a", "b", "eps_inf"],
            ScalingForm::ShiftedError => &["a", "b", "c", "eps_inf"],
            ScalingForm::ShiftedScore => &["a", "b", "c", "s_inf"],
            ScalingForm::CombinedError => &["a1", "b1", "a2", "b2", "eps_inf"],
            ScalingForm::CombinedScore => &["a1", "b1", "c1", "a2", "b2", "c2", "s_inf"],
        }
    }

    pub fn n_params(self) -> usize {
        self.param_names().len()
    }

    /// Combined forms take a `(D, N)` pair; the others a single scale variable.
    pub fn is_combined(self) -> bool {
        matches!(self, ScalingForm::CombinedError | ScalingForm::CombinedScore)
    }

    pub fn metric_kind(self) -> MetricKind {
        match self {
            ScalingForm::BasicError | ScalingForm::ShiftedError | ScalingForm::CombinedError => {
                MetricKind::Error
            }
            ScalingForm::ShiftedScore | ScalingForm::CombinedScore => MetricKind::Score,
        }
    }

    /// The shifted single-variable law used for per-axis diagnostics of a metric kind.
    pub fn shifted_for(kind: MetricKind) -> ScalingForm {
        match kind {
            MetricKind::Error => ScalingForm::ShiftedError,
            MetricKind::Score => ScalingForm::ShiftedScore,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScalingForm::BasicError => "basic-error",
            ScalingForm::ShiftedError => "shifted-error",
            ScalingForm::ShiftedScore => "shifted-score",
            ScalingForm::CombinedError => "combined-error",
            ScalingForm::CombinedScore => "combined-score",
        }
    }

    /// Index of the asymptote parameter (`eps_inf` or `s_inf`), always the last one.
    pub fn asymptote_index(self) -> usize {
        self.n_params() - 1
    }
}

impl fmt::Display for ScalingForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScalingForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScalingForm::ALL
            .into_iter()
            .find(|form| form.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown scaling form `{s}`")))
    }
}

/// A point at which a form is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalePoint {
    Single(f64),
    Pair { data: f64, model: f64 },
}

impl ScalePoint {
    fn single(self, form: ScalingForm) -> Result<f64> {
        match self {
            ScalePoint::Single(x) => Ok(x),
            ScalePoint::Pair { .. } => Err(Error::Domain(format!(
                "{form} takes a single scale variable, got a (D, N) pair"
            ))),
        }
    }

    fn pair(self, form: ScalingForm) -> Result<(f64, f64)> {
        match self {
            ScalePoint::Pair { data, model } => Ok((data, model)),
            ScalePoint::Single(_) => Err(Error::Domain(format!(
                "{form} takes a (D, N) pair, got a single scale variable"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasicErrorParams {
    pub a: f64,
    pub b: f64,
    pub eps_inf: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftedErrorParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub eps_inf: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftedScoreParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub s_inf: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombinedErrorParams {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
    pub eps_inf: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombinedScoreParams {
    pub a1: f64,
    pub b1: f64,
    pub c1: f64,
    pub a2: f64,
    pub b2: f64,
    pub c2: f64,
    pub s_inf: f64,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite and > 0, got {v}")))
    }
}

fn check_non_negative(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite and >= 0, got {v}")))
    }
}

fn check_score_asymptote(v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("s_inf must lie in (0, 1], got {v}")))
    }
}

impl BasicErrorParams {
    pub fn new(a: f64, b: f64, eps_inf: f64) -> Result<Self> {
        check_positive("a", a)?;
        check_positive("b", b)?;
        check_non_negative("eps_inf", eps_inf)?;
        Ok(Self { a, b, eps_inf })
    }
}

impl ShiftedErrorParams {
    pub fn new(a: f64, b: f64, c: f64, eps_inf: f64) -> Result<Self> {
        check_positive("a", a)?;
        check_positive("b", b)?;
        check_positive("c", c)?;
        check_non_negative("eps_inf", eps_inf)?;
        Ok(Self { a, b, c, eps_inf })
    }
}

impl ShiftedScoreParams {
    pub fn new(a: f64, b: f64, c: f64, s_inf: f64) -> Result<Self> {
        check_positive("a", a)?;
        check_positive("b", b)?;
        check_positive("c", c)?;
        check_score_asymptote(s_inf)?;
        Ok(Self { a, b, c, s_inf })
    }
}

impl CombinedErrorParams {
    pub fn new(a1: f64, b1: f64, a2: f64, b2: f64, eps_inf: f64) -> Result<Self> {
        check_positive("a1", a1)?;
        check_positive("b1", b1)?;
        check_positive("a2", a2)?;
        check_positive("b2", b2)?;
        check_non_negative("eps_inf", eps_inf)?;
        Ok(Self {
            a1,
            b1,
            a2,
            b2,
            eps_inf,
        })
    }
}

impl CombinedScoreParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(a1: f64, b1: f64, c1: f64, a2: f64, b2: f64, c2: f64, s_inf: f64) -> Result<Self> {
        for (name, v) in [("a1", a1), ("b1", b1), ("c1", c1), ("a2", a2), ("b2", b2), ("c2", c2)] {
            check_positive(name, v)?;
        }
        check_score_asymptote(s_inf)?;
        Ok(Self {
            a1,
            b1,
            c1,
            a2,
            b2,
            c2,
            s_inf,
        })
    }
}

/// Named parameter vector for one scaling form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum ParamSet {
    BasicError(BasicErrorParams),
    ShiftedError(ShiftedErrorParams),
    ShiftedScore(ShiftedScoreParams),
    CombinedError(CombinedErrorParams),
    CombinedScore(CombinedScoreParams),
}

impl ParamSet {
    /// Builds a validated parameter set from values in `form.param_names()` order.
    pub fn from_values(form: ScalingForm, v: &[f64]) -> Result<Self> {
        check_arity(form, v)?;
        Ok(match form {
            ScalingForm::BasicError => ParamSet::BasicError(BasicErrorParams::new(v[0], v[1], v[2])?),
            ScalingForm::ShiftedError => {
                ParamSet::ShiftedError(ShiftedErrorParams::new(v[0], v[1], v[2], v[3])?)
            }
            ScalingForm::ShiftedScore => {
                ParamSet::ShiftedScore(ShiftedScoreParams::new(v[0], v[1], v[2], v[3])?)
            }
            ScalingForm::CombinedError => ParamSet::CombinedError(CombinedErrorParams::new(
                v[0], v[1], v[2], v[3], v[4],
            )?),
            ScalingForm::CombinedScore => ParamSet::CombinedScore(CombinedScoreParams::new(
                v[0], v[1], v[2], v[3], v[4], v[5], v[6],
            )?),
        })
    }

    /// Skips the domain checks so degenerate sets (`a = 0`, `b = 0`) can be
    /// evaluated. Only finiteness is enforced. Not for fitting.
    pub fn relaxed(form: ScalingForm, v: &[f64]) -> Result<Self> {
        check_arity(form, v)?;
        if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("parameter values must be finite, got {bad}")));
        }
        Ok(match form {
            ScalingForm::BasicError => ParamSet::BasicError(BasicErrorParams {
                a: v[0],
                b: v[1],
                eps_inf: v[2],
            }),
            ScalingForm::ShiftedError => ParamSet::ShiftedError(ShiftedErrorParams {
                a: v[0],
                b: v[1],
                c: v[2],
                eps_inf: v[3],
            }),
            ScalingForm::ShiftedScore => ParamSet::ShiftedScore(ShiftedScoreParams {
                a: v[0],
                b: v[1],
                c: v[2],
                s_inf: v[3],
            }),
            ScalingForm::CombinedError => ParamSet::CombinedError(CombinedErrorParams {
                a1: v[0],
                b1: v[1],
                a2: v[2],
                b2: v[3],
                eps_inf: v[4],
            }),
            ScalingForm::CombinedScore => ParamSet::CombinedScore(CombinedScoreParams {
                a1: v[0],
                b1: v[1],
                c1: v[2],
                a2: v[3],
                b2: v[4],
                c2: v[5],
                s_inf: v[6],
            }),
        })
    }

    pub fn form(&self) -> ScalingForm {
        match self {
            ParamSet::BasicError(_) => ScalingForm::BasicError,
            ParamSet::ShiftedError(_) => ScalingForm::ShiftedError,
            ParamSet::ShiftedScore(_) => ScalingForm::ShiftedScore,
            ParamSet::CombinedError(_) => ScalingForm::CombinedError,
            ParamSet::CombinedScore(_) => ScalingForm::CombinedScore,
        }
    }

    /// Parameter values in `form().param_names()` order.
    pub fn values(&self) -> Vec<f64> {
        match *self {
            ParamSet::BasicError(p) => vec![p.a, p.b, p.eps_inf],
            ParamSet::ShiftedError(p) => vec![p.a, p.b, p.c, p.eps_inf],
            ParamSet::ShiftedScore(p) => vec![p.a, p.b, p.c, p.s_inf],
            ParamSet::CombinedError(p) => vec![p.a1, p.b1, p.a2, p.b2, p.eps_inf],
            ParamSet::CombinedScore(p) => vec![p.a1, p.b1, p.c1, p.a2, p.b2, p.c2, p.s_inf],
        }
    }

    pub fn named_values(&self) -> Vec<(&'static str, f64)> {
        self.form().param_names().iter().copied().zip(self.values()).collect()
    }

    /// The fitted asymptote: `eps_inf` for error forms, `s_inf` for score forms.
    pub fn asymptote(&self) -> f64 {
        self.values()[self.form().asymptote_index()]
    }

    pub fn eval(&self, point: ScalePoint) -> Result<f64> {
        let form = self.form();
        match self {
            ParamSet::BasicError(p) => eval_basic_error(point.single(form)?, p),
            ParamSet::ShiftedError(p) => eval_shifted_error(point.single(form)?, p),
            ParamSet::ShiftedScore(p) => eval_shifted_score(point.single(form)?, p),
            ParamSet::CombinedError(p) => {
                let (d, n) = point.pair(form)?;
                eval_combined_error(d, n, p)
            }
            ParamSet::CombinedScore(p) => {
                let (d, n) = point.pair(form)?;
                eval_combined_score(d, n, p)
            }
        }
    }

    /// Value and gradient with respect to each parameter, in `param_names()` order.
    pub fn eval_with_grad(&self, point: ScalePoint) -> Result<(f64, Vec<f64>)> {
        let form = self.form();
        match *self {
            ParamSet::BasicError(p) => {
                let x = point.single(form)?;
                check_strictly_positive_input("X", x)?;
                let (t, dt_db) = decay_term(p.a, p.b, x);
                Ok((t + p.eps_inf, vec![t_over_a(p.b, x), dt_db, 1.0]))
            }
            ParamSet::ShiftedError(p) => {
                let x = point.single(form)?;
                let base = shifted_base("X", x, p.c)?;
                let (t, dt_db) = decay_term(p.a, p.b, base);
                let dt_dc = -p.b * t / base;
                Ok((t + p.eps_inf, vec![t_over_a(p.b, base), dt_db, dt_dc, 1.0]))
            }
            ParamSet::ShiftedScore(p) => {
                let x = point.single(form)?;
                let base = shifted_base("X", x, p.c)?;
                let (t, dt_db) = decay_term(p.a, p.b, base);
                let dt_dc = -p.b * t / base;
                Ok((p.s_inf - t, vec![-t_over_a(p.b, base), -dt_db, -dt_dc, 1.0]))
            }
            ParamSet::CombinedError(p) => {
                let (d, n) = point.pair(form)?;
                check_strictly_positive_input("D", d)?;
                check_strictly_positive_input("N", n)?;
                let (t1, dt1_db) = decay_term(p.a1, p.b1, d);
                let (t2, dt2_db) = decay_term(p.a2, p.b2, n);
                Ok((
                    t1 + t2 + p.eps_inf,
                    vec![t_over_a(p.b1, d), dt1_db, t_over_a(p.b2, n), dt2_db, 1.0],
                ))
            }
            ParamSet::CombinedScore(p) => {
                let (d, n) = point.pair(form)?;
                let base1 = shifted_base("D", d, p.c1)?;
                let base2 = shifted_base("N", n, p.c2)?;
                let (t1, dt1_db) = decay_term(p.a1, p.b1, base1);
                let (t2, dt2_db) = decay_term(p.a2, p.b2, base2);
                Ok((
                    p.s_inf - t1 - t2,
                    vec![
                        -t_over_a(p.b1, base1),
                        -dt1_db,
                        p.b1 * t1 / base1,
                        -t_over_a(p.b2, base2),
                        -dt2_db,
                        p.b2 * t2 / base2,
                        1.0,
                    ],
                ))
            }
        }
    }

    /// Analytic gradient of the model value with respect to each parameter.
    pub fn grad_params(&self, point: ScalePoint) -> Result<Vec<f64>> {
        self.eval_with_grad(point).map(|(_, g)| g)
    }
}

/// Free-function form of [`ParamSet::grad_params`] that checks the form matches.
pub fn grad_params(form: ScalingForm, point: ScalePoint, params: &ParamSet) -> Result<Vec<f64>> {
    if params.form() != form {
        return Err(Error::Domain(format!(
            "parameters are for {}, not {form}",
            params.form()
        )));
    }
    params.grad_params(point)
}

fn check_arity(form: ScalingForm, v: &[f64]) -> Result<()> {
    if v.len() == form.n_params() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{form} takes {} parameters, got {}",
            form.n_params(),
            v.len()
        )))
    }
}

/// `base^(−b)` via `exp(−b·ln base)`.
#[inline]
pub fn neg_pow(base: f64, b: f64) -> f64 {
    (-b * base.ln()).exp()
}

#[inline]
fn t_over_a(b: f64, base: f64) -> f64 {
    neg_pow(base, b)
}

/// `(a·base^(−b), ∂/∂b)`.
#[inline]
fn decay_term(a: f64, b: f64, base: f64) -> (f64, f64) {
    let t = a * neg_pow(base, b);
    (t, -t * base.ln())
}

fn check_strictly_positive_input(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite and > 0, got {x}")))
    }
}

fn shifted_base(name: &str, x: f64, c: f64) -> Result<f64> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::Domain(format!("{name} must be finite and >= 0, got {x}")));
    }
    let base = x + c;
    if base > 0.0 {
        Ok(base)
    } else {
        Err(Error::Domain(format!("{name} + c must be > 0, got {base}")))
    }
}

/// `a·X^(−b) + ε∞`; undefined at `X = 0`.
pub fn eval_basic_error(x: f64, p: &BasicErrorParams) -> Result<f64> {
    check_strictly_positive_input("X", x)?;
    Ok(p.a * neg_pow(x, p.b) + p.eps_inf)
}

/// `a·(X+c)^(−b) + ε∞`; finite at `X = 0`.
pub fn eval_shifted_error(x: f64, p: &ShiftedErrorParams) -> Result<f64> {
    let base = shifted_base("X", x, p.c)?;
    Ok(p.a * neg_pow(base, p.b) + p.eps_inf)
}

/// `s∞ − a·(X+c)^(−b)`.
pub fn eval_shifted_score(x: f64, p: &ShiftedScoreParams) -> Result<f64> {
    let base = shifted_base("X", x, p.c)?;
    Ok(p.s_inf - p.a * neg_pow(base, p.b))
}

/// `a₁·D^(−b₁) + a₂·N^(−b₂) + ε∞`.
pub fn eval_combined_error(d: f64, n: f64, p: &CombinedErrorParams) -> Result<f64> {
    check_strictly_positive_input("D", d)?;
    check_strictly_positive_input("N", n)?;
    Ok(p.a1 * neg_pow(d, p.b1) + p.a2 * neg_pow(n, p.b2) + p.eps_inf)
}

/// `s∞ − a₁·(D+c₁)^(−b₁) − a₂·(N+c₂)^(−b₂)`.
pub fn eval_combined_score(d: f64, n: f64, p: &CombinedScoreParams) -> Result<f64> {
    let base1 = shifted_base("D", d, p.c1)?;
    let base2 = shifted_base("N", n, p.c2)?;
    Ok(p.s_inf - p.a1 * neg_pow(base1, p.b1) - p.a2 * neg_pow(base2, p.b2))
}
