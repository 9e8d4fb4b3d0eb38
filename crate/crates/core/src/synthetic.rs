//! Seeded synthetic scans with the shapes the fits and extractors expect.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::error::{ensure_positive, QfcError, Result};
use crate::estimation::{AbscissaUnit, ScanSeries};
use crate::noise::{filtered_comb_scan, NoiseParams};
use crate::spectral::{bandwidth_nm_to_ghz, CavityParams, SPEED_OF_LIGHT};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Linewidth versus pump power, `slope * P + intercept`.
pub fn linewidth_scan(slope: f64, intercept: f64, powers_mw: &[f64]) -> Result<ScanSeries> {
    let values = powers_mw.iter().map(|p| slope * p + intercept).collect();
    ScanSeries::new(AbscissaUnit::Milliwatt, powers_mw.to_vec(), values, None)
}

/// Anti-Stokes counts versus pump power, `g a P / (2 (1 + t P))`.
pub fn noise_scan(
    alpha_noise: f64,
    alpha_tilde: f64,
    gamma_r_ratio: f64,
    powers_mw: &[f64],
) -> Result<ScanSeries> {
    let values = powers_mw
        .iter()
        .map(|p| gamma_r_ratio * alpha_noise * p / (2.0 * (1.0 + alpha_tilde * p)))
        .collect();
    ScanSeries::new(AbscissaUnit::Milliwatt, powers_mw.to_vec(), values, None)
}

/// Filtered anti-Stokes comb seen by a `filter_nm` wide bandpass stepped
/// across `span_nm` around `center_nm`, with a resonance at the centre.
pub fn comb_scan(
    cav: &CavityParams,
    noise: &NoiseParams,
    power_mw: f64,
    center_nm: f64,
    span_nm: f64,
    step_nm: f64,
    filter_nm: f64,
) -> Result<ScanSeries> {
    ensure_positive("span_nm", span_nm)?;
    ensure_positive("step_nm", step_nm)?;
    let n = (span_nm / step_nm).round() as usize + 1;
    let wavelengths: Vec<f64> = (0..n)
        .map(|i| center_nm - 0.5 * span_nm + i as f64 * step_nm)
        .collect();
    let f0 = SPEED_OF_LIGHT / center_nm;
    let offsets: Vec<f64> = wavelengths.iter().map(|l| SPEED_OF_LIGHT / l - f0).collect();
    let bpf = bandwidth_nm_to_ghz(filter_nm, center_nm)?;
    let values = filtered_comb_scan(cav, noise, power_mw, &offsets, bpf)?;
    ScanSeries::new(AbscissaUnit::Nanometer, wavelengths, values, None)
}

/// Adds zero-mean Gaussian noise with standard deviation `relative * |value|`
/// and records that sigma on the series.
pub fn with_relative_gaussian_noise(
    series: &ScanSeries,
    relative: f64,
    rng: &mut ChaCha8Rng,
) -> Result<ScanSeries> {
    ensure_positive("relative", relative)?;
    let mut values = Vec::with_capacity(series.len());
    let mut sigma = Vec::with_capacity(series.len());
    for v in &series.values {
        let s = (relative * v.abs()).max(f64::MIN_POSITIVE);
        let normal = Normal::new(0.0, s).map_err(|e| QfcError::invalid(e.to_string()))?;
        values.push(v + normal.sample(rng));
        sigma.push(s);
    }
    ScanSeries::new(series.unit, series.abscissa.clone(), values, Some(sigma))
}

/// Rescales the series to `mean_counts` on average and replaces each value by
/// a Poisson draw, attaching counting uncertainties.
pub fn poisson_counts(series: &ScanSeries, mean_counts: f64, rng: &mut ChaCha8Rng) -> Result<ScanSeries> {
    ensure_positive("mean_counts", mean_counts)?;
    let mean = series.values.iter().sum::<f64>() / series.len().max(1) as f64;
    if !(mean > 0.0) || series.values.iter().any(|v| *v < 0.0) {
        return Err(QfcError::invalid("Poisson counts need non-negative rates with positive mean"));
    }
    let scale = mean_counts / mean;
    let values = series
        .values
        .iter()
        .map(|v| {
            let lambda = v * scale;
            if lambda > 0.0 {
                Poisson::new(lambda)
                    .map(|d| d.sample(rng))
                    .map_err(|e| QfcError::invalid(e.to_string()))
            } else {
                Ok(0.0)
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ScanSeries::new(series.unit, series.abscissa.clone(), values, None)?.with_poisson_sigma())
}
