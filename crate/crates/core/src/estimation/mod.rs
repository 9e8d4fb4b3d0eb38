//! Parameter estimation from scan data.

mod fit;
mod fsr;
mod fwhm;
pub mod lm;
mod series;

pub use fit::{fit_linear, fit_saturating_noise, line_through, FitResult};
pub use fsr::{detrend_linear, extract_fsr, periodogram, FsrEstimate};
pub use fwhm::{extract_fwhm, half_max_width, FwhmEstimate, FwhmMethod};
pub use series::{AbscissaUnit, ScanSeries};

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Result};

/// A value with its one-sigma (or resolution) uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub uncertainty: f64,
}

impl Estimate {
    pub fn new(value: f64, uncertainty: f64) -> Self {
        Self { value, uncertainty }
    }

    pub fn contains(&self, truth: f64, k: f64) -> bool {
        (self.value - truth).abs() <= k * self.uncertainty
    }
}

/// Cavity enhancement inferred from a measured coupling, with the cold
/// finesse over pi alongside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Enhancement {
    pub factor: f64,
    pub finesse_over_pi: f64,
}

/// `4 alpha_tilde / B_ref * (L_ref / L)^2`: the measured cavity coupling
/// over a reference single-pass coefficient rescaled to length `L`.
pub fn enhancement_factor(alpha_tilde: f64, b_ref: f64, l_ref_mm: f64, l_mm: f64) -> Result<f64> {
    ensure_positive("alpha_tilde", alpha_tilde)?;
    ensure_positive("b_ref", b_ref)?;
    ensure_positive("l_ref_mm", l_ref_mm)?;
    ensure_positive("l_mm", l_mm)?;
    let ratio = l_ref_mm / l_mm;
    Ok(4.0 * alpha_tilde / b_ref * ratio * ratio)
}

pub fn enhancement_with_finesse(
    alpha_tilde: f64,
    b_ref: f64,
    l_ref_mm: f64,
    l_mm: f64,
    finesse: f64,
) -> Result<Enhancement> {
    Ok(Enhancement {
        factor: enhancement_factor(alpha_tilde, b_ref, l_ref_mm, l_mm)?,
        finesse_over_pi: ensure_positive("finesse", finesse)? / std::f64::consts::PI,
    })
}
