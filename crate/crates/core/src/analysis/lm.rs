// Copyright 2026 The galton-dnp Authors
// SPDX-License-Identifier: Apache-2.0

//! Damped Gauss-Newton (Levenberg-Marquardt) least squares.

use nalgebra::{DMatrix, DVector};

/// A least-squares problem: residuals `r(params)` and their Jacobian.
pub(crate) trait Residuals {
    fn n_params(&self) -> usize;
    fn n_residuals(&self) -> usize;
    /// Fill `r` with residuals and `jac` (n_residuals x n_params) with
    /// `d r_i / d p_j`.
    fn eval(&self, params: &[f64], r: &mut DVector<f64>, jac: &mut DMatrix<f64>);
    /// Map parameters back into their domain after a step (e.g. keep widths
    /// positive). Default: identity.
    fn project(&self, _params: &mut [f64]) {}
}

#[derive(Debug, Clone)]
pub(crate) struct LmOutcome {
    pub params: Vec<f64>,
    /// Half the sum of squared residuals.
    pub cost: f64,
    pub gradient_norm: f64,
    pub converged: bool,
    pub jtj: DMatrix<f64>,
}

pub(crate) const GRADIENT_TOLERANCE: f64 = 1e-8;
const MAX_ITERATIONS: usize = 2000;

pub(crate) fn minimize(problem: &dyn Residuals, start: &[f64]) -> LmOutcome {
    let (n, m) = (problem.n_params(), problem.n_residuals());
    let mut params = start.to_vec();
    problem.project(&mut params);
    let mut r = DVector::zeros(m);
    let mut jac = DMatrix::zeros(m, n);
    problem.eval(&params, &mut r, &mut jac);
    let mut cost = 0.5 * r.norm_squared();
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut stalled = false;

    let mut trial_r = DVector::zeros(m);
    let mut trial_jac = DMatrix::zeros(m, n);
    while iterations < MAX_ITERATIONS {
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * &r;
        if grad.amax() < GRADIENT_TOLERANCE || !cost.is_finite() {
            break;
        }
        iterations += 1;
        let mut improved = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
            }
            let Some(chol) = a.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let step = chol.solve(&(-&grad));
            let mut trial: Vec<f64> = params.iter().zip(step.iter()).map(|(p, s)| p + s).collect();
            problem.project(&mut trial);
            problem.eval(&trial, &mut trial_r, &mut trial_jac);
            let trial_cost = 0.5 * trial_r.norm_squared();
            if trial_cost.is_finite() && trial_cost <= cost {
                let rel_step = step.norm() / (1e-12 + DVector::from_column_slice(&params).norm());
                let rel_gain = (cost - trial_cost) / cost.max(f64::MIN_POSITIVE);
                params = trial;
                std::mem::swap(&mut r, &mut trial_r);
                std::mem::swap(&mut jac, &mut trial_jac);
                stalled = rel_step < 1e-15 || (rel_gain < 1e-15 && rel_step < 1e-10);
                cost = trial_cost;
                lambda = (lambda / 3.0).max(1e-12);
                improved = true;
                break;
            }
            lambda *= 4.0;
        }
        if !improved || stalled {
            break;
        }
    }
    let jtj = jac.transpose() * &jac;
    let gradient_norm = (jac.transpose() * &r).amax();
    // A point where no damped step lowers the cost is a minimum to working
    // precision even when the absolute gradient criterion is scale-limited.
    let converged = cost.is_finite()
        && (gradient_norm < GRADIENT_TOLERANCE
            || (stalled && gradient_norm < 1e4 * GRADIENT_TOLERANCE * (1.0 + (2.0 * cost).sqrt())));
    LmOutcome {
        params,
        cost,
        gradient_norm,
        converged,
        jtj,
    }
}

/// Run from several starts and keep the lowest cost.
pub(crate) fn multi_start(problem: &dyn Residuals, starts: &[Vec<f64>]) -> LmOutcome {
    starts
        .iter()
        .map(|s| minimize(problem, s))
        .min_by(|a, b| {
            // prefer converged solutions, then lower cost
            b.converged
                .cmp(&a.converged)
                .then(a.cost.total_cmp(&b.cost))
        })
        .expect("at least one start")
}

/// One-sigma parameter errors from `(J^T J)^-1`, scaled by the reduced
/// residual variance unless the residuals were already weighted by known
/// uncertainties. `None` when the covariance is undefined.
pub(crate) fn parameter_errors(
    outcome: &LmOutcome,
    n_residuals: usize,
    weighted: bool,
) -> Option<Vec<f64>> {
    let n = outcome.params.len();
    let inv = outcome.jtj.clone().try_inverse()?;
    let scale = if weighted {
        1.0
    } else {
        if n_residuals <= n {
            return None;
        }
        2.0 * outcome.cost / (n_residuals - n) as f64
    };
    let errs: Vec<f64> = (0..n)
        .map(|i| (inv[(i, i)] * scale).max(0.0).sqrt())
        .collect();
    errs.iter().all(|e| e.is_finite()).then_some(errs)
}
