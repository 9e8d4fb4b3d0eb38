//! Fits for the two scan families: linear power broadening and saturating
//! anti-Stokes counts.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use super::lm::{minimize, LeastSquaresProblem, LmConfig};
use super::series::ScanSeries;
use crate::error::{ensure_finite, QfcError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub parameters: BTreeMap<String, f64>,
    pub std_errors: BTreeMap<String, f64>,
    /// Sum of squared weighted residuals.
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.parameters.get(name).copied()
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.std_errors.get(name).copied()
    }
}

/// Parameter covariance from a weighted Jacobian. Without per-point sigma
/// the covariance is scaled by the residual variance.
fn covariance(jac: &DMatrix<f64>, cost: f64, has_sigma: bool) -> Option<DMatrix<f64>> {
    let (n, p) = jac.shape();
    let inv = (jac.transpose() * jac).try_inverse()?;
    if has_sigma {
        return Some(inv);
    }
    if n <= p {
        return Some(DMatrix::from_element(p, p, f64::INFINITY));
    }
    Some(inv * (cost / (n - p) as f64))
}

fn std_errors_from(cov: &DMatrix<f64>) -> Vec<f64> {
    (0..cov.nrows()).map(|i| cov[(i, i)].max(0.0).sqrt()).collect()
}

/// Weighted straight-line fit `value = slope * x + intercept`.
pub fn fit_linear(data: &ScanSeries) -> Result<FitResult> {
    data.validate()?;
    if data.len() < 2 {
        return Err(QfcError::SingularFit(format!(
            "{} point(s) cannot define a line",
            data.len()
        )));
    }
    let inv_sigma = data.inverse_sigma();
    let w: Vec<f64> = inv_sigma.iter().map(|s| s * s).collect();
    let s: f64 = w.iter().sum();
    let xbar = data.abscissa.iter().zip(&w).map(|(x, wi)| wi * x).sum::<f64>() / s;
    let ybar = data.values.iter().zip(&w).map(|(y, wi)| wi * y).sum::<f64>() / s;
    // centred sums avoid cancellation in the normal equations
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for ((x, y), wi) in data.abscissa.iter().zip(&data.values).zip(&w) {
        sxx += wi * (x - xbar) * (x - xbar);
        sxy += wi * (x - xbar) * (y - ybar);
    }
    let spread = data.abscissa.last().unwrap() - data.abscissa.first().unwrap();
    if !(sxx > 1e-12 * s * spread * spread) {
        return Err(QfcError::SingularFit("abscissa has no spread".into()));
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;

    let cost: f64 = data
        .abscissa
        .iter()
        .zip(&data.values)
        .zip(&inv_sigma)
        .map(|((x, y), is)| ((slope * x + intercept - y) * is).powi(2))
        .sum();
    let jac = DMatrix::from_fn(data.len(), 2, |i, j| {
        if j == 0 {
            data.abscissa[i] * inv_sigma[i]
        } else {
            inv_sigma[i]
        }
    });
    let cov = covariance(&jac, cost, data.sigma.is_some())
        .ok_or_else(|| QfcError::SingularFit("normal matrix not invertible".into()))?;
    let se = std_errors_from(&cov);
    Ok(FitResult {
        parameters: BTreeMap::from([("slope".into(), slope), ("intercept".into(), intercept)]),
        std_errors: BTreeMap::from([("slope".into(), se[0]), ("intercept".into(), se[1])]),
        residual_norm: cost,
        converged: true,
        iterations: 1,
    })
}

/// Saturating noise law `N(P) = g alpha_noise P / (2 (1 + alpha_tilde P))`
/// solved in log-parameters so both coefficients stay positive.
struct SaturatingNoise<'a> {
    data: &'a ScanSeries,
    inv_sigma: Vec<f64>,
    gamma_r: f64,
}

impl SaturatingNoise<'_> {
    fn model(&self, alpha_noise: f64, alpha_tilde: f64, p: f64) -> f64 {
        self.gamma_r * alpha_noise * p / (2.0 * (1.0 + alpha_tilde * p))
    }

    /// Weighted Jacobian with respect to the natural parameters.
    fn natural_jacobian(&self, alpha_noise: f64, alpha_tilde: f64) -> DMatrix<f64> {
        DMatrix::from_fn(self.data.len(), 2, |i, j| {
            let p = self.data.abscissa[i];
            let sat = 1.0 + alpha_tilde * p;
            let d = if j == 0 {
                self.gamma_r * p / (2.0 * sat)
            } else {
                -self.gamma_r * alpha_noise * p * p / (2.0 * sat * sat)
            };
            d * self.inv_sigma[i]
        })
    }
}

impl LeastSquaresProblem for SaturatingNoise<'_> {
    fn residuals(&self, x: &[f64]) -> Vec<f64> {
        let (a, t) = (x[0].exp(), x[1].exp());
        self.data
            .abscissa
            .iter()
            .zip(&self.data.values)
            .zip(&self.inv_sigma)
            .map(|((p, y), is)| (self.model(a, t, *p) - y) * is)
            .collect()
    }

    fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let (a, t) = (x[0].exp(), x[1].exp());
        let mut jac = self.natural_jacobian(a, t);
        // chain rule for log-parameters
        jac.column_mut(0).scale_mut(a);
        jac.column_mut(1).scale_mut(t);
        jac
    }

    fn weighted_model(&self, x: &[f64]) -> Vec<f64> {
        let (a, t) = (x[0].exp(), x[1].exp());
        self.data
            .abscissa
            .iter()
            .zip(&self.inv_sigma)
            .map(|(p, is)| self.model(a, t, *p) * is)
            .collect()
    }
}

/// Deterministic start: slope of the lowest 20 % of powers gives
/// `alpha_noise`, the shortfall against that line at the top power gives
/// `alpha_tilde`.
fn saturating_initial_guess(data: &ScanSeries, gamma_r: f64) -> Result<(f64, f64)> {
    let n = data.len();
    let low = ((0.2 * n as f64).ceil() as usize).max(2).min(n);
    let (mut num, mut den) = (0.0, 0.0);
    for (p, y) in data.abscissa.iter().zip(&data.values).take(low) {
        num += p * y;
        den += p * p;
    }
    let slope = num / den;
    if !(slope.is_finite() && slope > 0.0) {
        return Err(QfcError::Domain(
            "low-power counts do not rise with power".into(),
        ));
    }
    let p_max = *data.abscissa.last().unwrap();
    let y_max = *data.values.last().unwrap();
    let ratio = y_max / (slope * p_max);
    let alpha_tilde = if ratio > 0.0 && ratio < 1.0 {
        (1.0 / ratio - 1.0) / p_max
    } else {
        0.0
    };
    Ok((2.0 * slope / gamma_r, alpha_tilde.max(1e-3 / p_max)))
}

/// Fits `alpha_noise` and `alpha_tilde` to anti-Stokes counts versus pump
/// power at fixed extraction ratio.
pub fn fit_saturating_noise(data: &ScanSeries, gamma_r_ratio: f64) -> Result<FitResult> {
    data.validate()?;
    ensure_finite("gamma_r_ratio", gamma_r_ratio)?;
    if !(gamma_r_ratio > 0.0 && gamma_r_ratio <= 1.0) {
        return Err(QfcError::invalid(format!(
            "extraction ratio {gamma_r_ratio} outside (0, 1]"
        )));
    }
    if data.len() < 5 {
        return Err(QfcError::invalid(format!(
            "{} points; at least 5 required",
            data.len()
        )));
    }
    let p_min = data.abscissa[0];
    let p_max = *data.abscissa.last().unwrap();
    if p_min < 0.0 {
        return Err(QfcError::invalid("negative pump power"));
    }
    if p_min > 0.0 && p_max / p_min < 5.0 {
        return Err(QfcError::invalid(format!(
            "powers span only a factor {:.2}; at least 5 required",
            p_max / p_min
        )));
    }

    let (a0, t0) = saturating_initial_guess(data, gamma_r_ratio)?;
    let problem = SaturatingNoise {
        data,
        inv_sigma: data.inverse_sigma(),
        gamma_r: gamma_r_ratio,
    };
    let report = minimize(&problem, &[a0.ln(), t0.ln()], &LmConfig::default());
    let (alpha_noise, alpha_tilde) = (report.params[0].exp(), report.params[1].exp());
    if !report.converged || !alpha_noise.is_finite() || !alpha_tilde.is_finite() {
        return Err(QfcError::NumericFailure {
            message: format!(
                "saturating fit stopped at alpha_noise={alpha_noise:e}, alpha_tilde={alpha_tilde:e}, cost={:e}",
                report.cost
            ),
            iterations: report.iterations,
        });
    }

    let jac = problem.natural_jacobian(alpha_noise, alpha_tilde);
    let se = covariance(&jac, report.cost, data.sigma.is_some())
        .map(|c| std_errors_from(&c))
        .unwrap_or_else(|| vec![f64::INFINITY; 2]);
    Ok(FitResult {
        parameters: BTreeMap::from([
            ("alpha_noise".into(), alpha_noise),
            ("alpha_tilde".into(), alpha_tilde),
        ]),
        std_errors: BTreeMap::from([
            ("alpha_noise".into(), se[0]),
            ("alpha_tilde".into(), se[1]),
        ]),
        residual_norm: report.cost,
        converged: true,
        iterations: report.iterations,
    })
}

/// Solves a 2x2 system; used by callers that want the interpolating line
/// through two points without building a series.
pub fn line_through(p0: (f64, f64), p1: (f64, f64)) -> Result<(f64, f64)> {
    let m = Matrix2::new(p0.0, 1.0, p1.0, 1.0);
    let sol = m
        .lu()
        .solve(&Vector2::new(p0.1, p1.1))
        .ok_or_else(|| QfcError::SingularFit("coincident abscissae".into()))?;
    Ok((sol[0], sol[1]))
}
