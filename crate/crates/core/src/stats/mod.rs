//! Second-order correlation through conversion and noise admixture.

mod broadband;
mod montecarlo;

pub use broadband::{broadband_conversion_efficiency, PhotonSpectrum};
pub use montecarlo::{
    g2_from_histogram, noise_rate_for_zeta, simulate_coincidences, CoincidenceHistogram, G2Record,
    SourceModel, DEFAULT_RESOLUTION_NS, DEFAULT_SEED, DEFAULT_WINDOW_NS, MIN_RELIABLE_BINS,
};

use crate::error::{ensure_finite, ensure_non_negative, QfcError, Result};

fn ensure_g2_in(g2_in: f64) -> Result<f64> {
    ensure_finite("g2_in", g2_in)?;
    if g2_in < 1.0 {
        return Err(QfcError::invalid(format!("g2_in must be >= 1, got {g2_in}")));
    }
    Ok(g2_in)
}

/// Cross-correlation after admixing uncorrelated noise at signal-to-noise
/// ratio `zeta`. An infinite `zeta` returns `g2_in`.
pub fn g2_out(g2_in: f64, zeta: f64) -> Result<f64> {
    ensure_g2_in(g2_in)?;
    if zeta.is_nan() || zeta < 0.0 {
        return Err(QfcError::invalid(format!("zeta must be >= 0, got {zeta}")));
    }
    if zeta.is_infinite() {
        return Ok(g2_in);
    }
    Ok((g2_in * zeta + 1.0) / (zeta + 1.0))
}

/// Signal-to-noise ratio implied by a degraded correlation; inverse of [`g2_out`].
pub fn zeta_from_g2(g2_in: f64, g2_out: f64) -> Result<f64> {
    ensure_g2_in(g2_in)?;
    ensure_finite("g2_out", g2_out)?;
    if !(g2_out > 1.0 && g2_out < g2_in) {
        return Err(QfcError::Domain(format!(
            "g2_out = {g2_out} must lie strictly between 1 and g2_in = {g2_in}"
        )));
    }
    Ok((g2_out - 1.0) / (g2_in - g2_out))
}

/// Correlation expected without the cavity, whose absence divides the
/// signal-to-noise ratio by `enhancement`.
pub fn predict_nocavity_g2(g2_in: f64, zeta: f64, enhancement: f64) -> Result<f64> {
    ensure_finite("enhancement", enhancement)?;
    if enhancement < 1.0 {
        return Err(QfcError::invalid(format!("enhancement must be >= 1, got {enhancement}")));
    }
    ensure_non_negative("zeta", zeta)?;
    g2_out(g2_in, zeta / enhancement)
}

/// Smallest `zeta` keeping `g2_out` above the classical bound of 2.
pub fn classical_threshold_zeta(g2_in: f64) -> Result<f64> {
    ensure_g2_in(g2_in)?;
    if g2_in <= 2.0 {
        return Err(QfcError::Domain(format!("g2_in = {g2_in} is already classical")));
    }
    Ok(1.0 / (g2_in - 2.0))
}
