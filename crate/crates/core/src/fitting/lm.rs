//! Levenberg–Marquardt with Marquardt diagonal scaling.

use nalgebra::{DMatrix, DVector};

/// Hard box on the unconstrained coordinates so `exp(u)` stays finite and non-zero.
const U_LIMIT: f64 = 700.0;
const MAX_DAMPING: f64 = 1e32;

pub(crate) trait LeastSquares {
    fn n_params(&self) -> usize;
    /// Residual vector, or `None` when the model is not finite at `u`.
    fn residuals(&self, u: &[f64]) -> Option<DVector<f64>>;
    fn residuals_and_jacobian(&self, u: &[f64]) -> Option<(DVector<f64>, DMatrix<f64>)>;
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct LmSettings {
    pub max_iterations: usize,
    pub sse_rel_tol: f64,
    pub step_tol: f64,
    pub initial_damping: f64,
    pub damping_up: f64,
    pub damping_down: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Termination {
    Converged,
    MaxIterations,
}

#[derive(Clone, Debug)]
pub(crate) struct LmRun {
    pub u: Vec<f64>,
    pub sse: f64,
    pub iterations: usize,
    pub termination: Termination,
    /// SSE after every accepted step, starting with the initial value.
    #[cfg_attr(not(test), allow(dead_code))]
    pub sse_trace: Vec<f64>,
}

pub(crate) fn minimize<P: LeastSquares>(problem: &P, start: &[f64], cfg: &LmSettings) -> Option<LmRun> {
    let n = problem.n_params();
    let mut u: Vec<f64> = start.iter().map(|v| v.clamp(-U_LIMIT, U_LIMIT)).collect();
    let (mut r, mut jac) = problem.residuals_and_jacobian(&u)?;
    let mut sse = r.norm_squared();
    if !sse.is_finite() {
        return None;
    }
    let mut trace = vec![sse];
    let mut damping = cfg.initial_damping;
    let mut iterations = 0;

    while iterations < cfg.max_iterations {
        iterations += 1;
        if sse == 0.0 {
            return Some(finish(u, sse, iterations, Termination::Converged, trace));
        }
        let jtj = jac.tr_mul(&jac);
        let grad = jac.tr_mul(&r);
        let diag_floor = jtj.diagonal().max() * 1e-15 + f64::MIN_POSITIVE;

        loop {
            let mut lhs = jtj.clone();
            for i in 0..n {
                lhs[(i, i)] += damping * jtj[(i, i)].max(diag_floor);
            }
            let Some(chol) = lhs.cholesky() else {
                damping *= cfg.damping_up;
                if damping > MAX_DAMPING {
                    return Some(finish(u, sse, iterations, Termination::Converged, trace));
                }
                continue;
            };
            let step = chol.solve(&(-&grad));
            let u_norm: f64 = u.iter().map(|v| v * v).sum::<f64>().sqrt();
            if step.norm() < cfg.step_tol * (u_norm + cfg.step_tol) {
                return Some(finish(u, sse, iterations, Termination::Converged, trace));
            }
            let candidate: Vec<f64> = u
                .iter()
                .zip(step.iter())
                .map(|(a, d)| (a + d).clamp(-U_LIMIT, U_LIMIT))
                .collect();
            let accepted = problem
                .residuals(&candidate)
                .map(|res| (res.norm_squared(), res))
                .filter(|(s, _)| s.is_finite() && *s <= sse);
            match accepted {
                Some((new_sse, _)) => {
                    let rel_change = (sse - new_sse) / sse;
                    u = candidate;
                    (r, jac) = problem.residuals_and_jacobian(&u)?;
                    sse = r.norm_squared();
                    debug_assert!(sse <= new_sse * (1.0 + 1e-12) || new_sse == 0.0);
                    trace.push(sse);
                    damping = (damping * cfg.damping_down).max(1e-300);
                    if rel_change < cfg.sse_rel_tol {
                        return Some(finish(u, sse, iterations, Termination::Converged, trace));
                    }
                    break;
                }
                None => {
                    damping *= cfg.damping_up;
                    if damping > MAX_DAMPING {
                        return Some(finish(u, sse, iterations, Termination::Converged, trace));
                    }
                }
            }
        }
    }
    Some(finish(u, sse, iterations, Termination::MaxIterations, trace))
}

fn finish(u: Vec<f64>, sse: f64, iterations: usize, termination: Termination, sse_trace: Vec<f64>) -> LmRun {
    LmRun {
        u,
        sse,
        iterations,
        termination,
        sse_trace,
    }
}
