//! Damped Gauss-Newton (Levenberg-Marquardt) for small dense problems.

use nalgebra::{DMatrix, DVector};

/// Weighted least-squares problem `sum_i r_i(x)^2`.
pub trait LeastSquaresProblem {
    /// Weighted residuals `(model - data) / sigma`.
    fn residuals(&self, x: &[f64]) -> Vec<f64>;
    /// Jacobian of [`residuals`](Self::residuals), one row per point.
    fn jacobian(&self, x: &[f64]) -> DMatrix<f64>;
    /// Weighted model predictions, used to measure steps relative to the curve.
    fn weighted_model(&self, x: &[f64]) -> Vec<f64>;
}

#[derive(Debug, Clone, Copy)]
pub struct LmConfig {
    pub max_iterations: usize,
    /// Relative step and relative cost change must both fall below this.
    pub tolerance: f64,
    pub initial_lambda: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            tolerance: 1e-10,
            initial_lambda: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmReport {
    pub params: Vec<f64>,
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

const LAMBDA_MAX: f64 = 1e16;
/// Squared residual-to-model norm ratio treated as an exact fit.
const EXACT_FIT: f64 = 1e-24;

pub fn minimize<P: LeastSquaresProblem>(problem: &P, x0: &[f64], config: &LmConfig) -> LmReport {
    let mut x = x0.to_vec();
    let mut r = problem.residuals(&x);
    let mut cost = norm_sq(&r);
    let mut lambda = config.initial_lambda;

    if !cost.is_finite() {
        return LmReport {
            params: x,
            cost,
            iterations: 0,
            converged: false,
        };
    }

    for iteration in 1..=config.max_iterations {
        let scale = norm_sq(&problem.weighted_model(&x)).sqrt();
        if cost <= EXACT_FIT * scale * scale {
            return LmReport {
                params: x,
                cost,
                iterations: iteration - 1,
                converged: true,
            };
        }

        let jac = problem.jacobian(&x);
        let rv = DVector::from_column_slice(&r);
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * &rv;
        let max_diag = jtj.diagonal().max().max(f64::MIN_POSITIVE);

        let mut accepted = None;
        while lambda <= LAMBDA_MAX {
            let mut damped = jtj.clone();
            for i in 0..damped.nrows() {
                damped[(i, i)] += lambda * jtj[(i, i)].max(1e-12 * max_diag);
            }
            let Some(chol) = damped.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let step = chol.solve(&(-&grad));
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let trial_r = problem.residuals(&trial);
            let trial_cost = norm_sq(&trial_r);
            if trial_cost.is_finite() && trial_cost <= cost {
                accepted = Some((step, trial, trial_r, trial_cost));
                break;
            }
            lambda *= 10.0;
        }

        let Some((step, trial, trial_r, trial_cost)) = accepted else {
            // no damped step lowers the cost: stationary to working precision
            return LmReport {
                params: x,
                cost,
                iterations: iteration,
                converged: true,
            };
        };

        let rel_step = (&jac * &step).norm() / scale.max(f64::MIN_POSITIVE);
        let rel_cost = (cost - trial_cost) / cost.max(f64::MIN_POSITIVE);
        x = trial;
        r = trial_r;
        cost = trial_cost;
        lambda = (lambda * 0.1).max(1e-12);

        if rel_step < config.tolerance && rel_cost < config.tolerance {
            return LmReport {
                params: x,
                cost,
                iterations: iteration,
                converged: true,
            };
        }
    }

    LmReport {
        params: x,
        cost,
        iterations: config.max_iterations,
        converged: false,
    }
}
