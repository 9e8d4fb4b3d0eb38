//! Linewidth of a single resonance from a sampled spectrum.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::lm::{minimize, LeastSquaresProblem, LmConfig};
use super::series::ScanSeries;
use super::Estimate;
use crate::error::{QfcError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FwhmMethod {
    LorentzianFit,
    HalfCrossing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FwhmEstimate {
    /// Full width at half maximum in the abscissa unit.
    pub fwhm: Estimate,
    pub center: f64,
    pub method: FwhmMethod,
}

const MIN_POINTS_ABOVE_HALF: usize = 8;

// A / (1 + ((x - x0) / h)^2) + b with h = exp(x[2])
struct Lorentzian<'a> {
    x: &'a [f64],
    y: &'a [f64],
    inv_sigma: Vec<f64>,
}

fn lorentzian(p: &[f64], x: f64) -> f64 {
    let u = (x - p[1]) / p[2].exp();
    p[0] / (1.0 + u * u) + p[3]
}

impl LeastSquaresProblem for Lorentzian<'_> {
    fn residuals(&self, p: &[f64]) -> Vec<f64> {
        self.x
            .iter()
            .zip(self.y)
            .zip(&self.inv_sigma)
            .map(|((x, y), is)| (lorentzian(p, *x) - y) * is)
            .collect()
    }

    fn jacobian(&self, p: &[f64]) -> DMatrix<f64> {
        let h = p[2].exp();
        DMatrix::from_fn(self.x.len(), 4, |i, j| {
            let u = (self.x[i] - p[1]) / h;
            let q = 1.0 / (1.0 + u * u);
            let d = match j {
                0 => q,
                1 => 2.0 * p[0] * u * q * q / h,
                2 => 2.0 * p[0] * u * u * q * q,
                _ => 1.0,
            };
            d * self.inv_sigma[i]
        })
    }

    fn weighted_model(&self, p: &[f64]) -> Vec<f64> {
        self.x
            .iter()
            .zip(&self.inv_sigma)
            .map(|(x, is)| lorentzian(p, *x) * is)
            .collect()
    }
}

/// Width between the outermost linear-interpolated crossings of
/// `baseline + (max - baseline) / 2`.
pub fn half_max_width(x: &[f64], y: &[f64], baseline: f64) -> Result<f64> {
    let (imax, ymax) = argmax(y)?;
    let half = baseline + 0.5 * (ymax - baseline);
    let cross = |i: usize, j: usize| x[i] + (half - y[i]) * (x[j] - x[i]) / (y[j] - y[i]);
    let left = (1..=imax)
        .rev()
        .find(|&i| y[i - 1] < half)
        .map(|i| cross(i - 1, i));
    let right = (imax..y.len() - 1)
        .find(|&i| y[i + 1] < half)
        .map(|i| cross(i, i + 1));
    match (left, right) {
        (Some(l), Some(r)) => Ok(r - l),
        _ => Err(QfcError::Shape("peak does not fall below half maximum on both sides".into())),
    }
}

fn argmax(y: &[f64]) -> Result<(usize, f64)> {
    y.iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| QfcError::Shape("empty series".into()))
}

/// Lorentzian least-squares FWHM, falling back to half-maximum crossings
/// when the fit does not converge to a sensible width.
pub fn extract_fwhm(data: &ScanSeries) -> Result<FwhmEstimate> {
    data.validate()?;
    let (x, y) = (&data.abscissa[..], &data.values[..]);
    let (imax, ymax) = argmax(y)?;
    let ymin = y.iter().copied().fold(f64::INFINITY, f64::min);
    let height = ymax - ymin;
    if !(height > 1e-12 * ymax.abs().max(ymin.abs()).max(f64::MIN_POSITIVE)) {
        return Err(QfcError::Shape("series is flat".into()));
    }
    let half = ymin + 0.5 * height;
    let above: Vec<usize> = (0..y.len()).filter(|&i| y[i] > half).collect();
    if above.len() < MIN_POINTS_ABOVE_HALF {
        return Err(QfcError::Shape(format!(
            "{} points above half maximum; at least {MIN_POINTS_ABOVE_HALF} required",
            above.len()
        )));
    }
    if above.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(QfcError::Shape("more than one region above half maximum".into()));
    }

    let span = x[x.len() - 1] - x[0];
    let crossing = half_max_width(x, y, ymin);
    let h0 = match crossing {
        Ok(w) => 0.5 * w,
        Err(_) => 0.5 * (x[above[above.len() - 1]] - x[above[0]]).max(span / x.len() as f64),
    };
    let problem = Lorentzian {
        x,
        y,
        inv_sigma: data.inverse_sigma(),
    };
    let p0 = [height, x[imax], h0.ln(), ymin];
    let report = minimize(&problem, &p0, &LmConfig::default());
    let h = report.params[2].exp();
    let center = report.params[1];
    let fit_ok = report.converged
        && report.params.iter().all(|v| v.is_finite())
        && report.params[0] > 0.0
        && h > 0.0
        && 2.0 * h < 10.0 * span
        && center >= x[0]
        && center <= x[x.len() - 1];

    if fit_ok {
        let jac = problem.jacobian(&report.params);
        let n = x.len();
        let cov = (jac.transpose() * &jac).try_inverse().map(|inv| {
            if data.sigma.is_some() {
                inv
            } else if n > 4 {
                inv * (report.cost / (n - 4) as f64)
            } else {
                inv * f64::INFINITY
            }
        });
        let se_ln_h = cov.map(|c| c[(2, 2)].max(0.0).sqrt()).unwrap_or(f64::INFINITY);
        return Ok(FwhmEstimate {
            fwhm: Estimate::new(2.0 * h, 2.0 * h * se_ln_h),
            center,
            method: FwhmMethod::LorentzianFit,
        });
    }

    let width = crossing?;
    // one sample spacing at each crossing
    let step = span / (x.len() - 1) as f64;
    Ok(FwhmEstimate {
        fwhm: Estimate::new(width, step),
        center: x[imax],
        method: FwhmMethod::HalfCrossing,
    })
}
