//! Anti-Stokes noise inside and outside the resonator.
//!
//! The intracavity anti-Stokes field is treated as sum-frequency conversion of
//! a broadband phonon bath into the converted mode. Each cavity resonance
//! carries a Lorentzian tooth whose width grows with pump power, which caps
//! the emitted noise at `g alpha_noise P / 2` and saturates it at high power.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::comb::PeriodicLorentzian;
use crate::error::{
    ensure_finite, ensure_non_negative, ensure_positive, ensure_unit_interval, QfcError, Result,
};
use crate::quad::{integrate, linspace};
use crate::spectral::{finesse, CavityParams};

/// Truncation of infinite-range integrals, in tooth half-widths.
const TRUNCATION_HALF_WIDTHS: f64 = 50.0;
const MIN_SAMPLES_PER_FSR: f64 = 16.0;

/// Phenomenological anti-Stokes coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    /// No-cavity generation rate within one FSR-wide band (counts/s/mW).
    pub alpha_noise_cps_per_mw: f64,
    /// Cavity SFG coupling (counts/s/mW/GHz).
    pub beta_tilde: f64,
    pub gamma_r_ratio: f64,
    /// Conversion coupling shared with the signal model (1/mW).
    pub alpha_tilde_per_mw: f64,
}

impl NoiseParams {
    /// Derives `beta_tilde` from the cavity finesse and FSR.
    pub fn from_cavity(cav: &CavityParams, alpha_noise: f64, alpha_tilde_per_mw: f64) -> Result<Self> {
        let f = finesse(cav)?;
        let params = Self {
            alpha_noise_cps_per_mw: alpha_noise,
            beta_tilde: beta_tilde_from(f, alpha_noise, cav.fsr_ghz())?,
            gamma_r_ratio: cav.gamma_r_ratio,
            alpha_tilde_per_mw,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_non_negative("alpha_noise", self.alpha_noise_cps_per_mw)?;
        ensure_non_negative("beta_tilde", self.beta_tilde)?;
        ensure_unit_interval("gamma_r_ratio", self.gamma_r_ratio)?;
        ensure_non_negative("alpha_tilde", self.alpha_tilde_per_mw)?;
        Ok(())
    }

    fn saturation(&self, power_mw: f64) -> f64 {
        1.0 + self.alpha_tilde_per_mw * power_mw
    }
}

/// Anti-Stokes output density at one detuning from a resonance.
///
/// Units follow `beta_tilde`: counts/s per GHz when it was built with the
/// FSR in GHz.
pub fn as_spectral_density(
    noise: &NoiseParams,
    power_mw: f64,
    detuning_mhz: f64,
    gamma_all_mhz: f64,
) -> Result<f64> {
    noise.validate()?;
    ensure_non_negative("power_mw", power_mw)?;
    ensure_finite("detuning_mhz", detuning_mhz)?;
    ensure_positive("gamma_all_mhz", gamma_all_mhz)?;
    let d = detuning_mhz / gamma_all_mhz;
    let half = 0.5 * noise.saturation(power_mw);
    Ok(noise.gamma_r_ratio * noise.beta_tilde * power_mw / (half * half + d * d))
}

/// Closed-form integral of [`as_spectral_density`] over all detunings,
/// `2 pi g gamma_all beta P / (1 + alpha_tilde P)`.
pub fn as_total_closed_form(noise: &NoiseParams, power_mw: f64, gamma_all_ghz: f64) -> Result<f64> {
    noise.validate()?;
    ensure_non_negative("power_mw", power_mw)?;
    ensure_positive("gamma_all_ghz", gamma_all_ghz)?;
    Ok(2.0 * PI * noise.gamma_r_ratio * gamma_all_ghz * noise.beta_tilde * power_mw
        / noise.saturation(power_mw))
}

/// Numerical integral of the single-resonance density over detuning (GHz).
///
/// Adaptive quadrature over +/-50 half-widths; the remaining Lorentzian
/// tails are added analytically.
pub fn as_total_numeric(noise: &NoiseParams, power_mw: f64, gamma_all_ghz: f64) -> Result<f64> {
    noise.validate()?;
    ensure_non_negative("power_mw", power_mw)?;
    ensure_positive("gamma_all_ghz", gamma_all_ghz)?;
    let gamma_mhz = gamma_all_ghz * 1e3;
    let peak = as_spectral_density(noise, power_mw, 0.0, gamma_mhz)?;
    if peak == 0.0 {
        return Ok(0.0);
    }
    let hwhm = 0.5 * noise.saturation(power_mw) * gamma_all_ghz;
    let cut = TRUNCATION_HALF_WIDTHS * hwhm;
    let density = |x_ghz: f64| {
        let d = x_ghz / gamma_all_ghz;
        let half = 0.5 * noise.saturation(power_mw);
        noise.gamma_r_ratio * noise.beta_tilde * power_mw / (half * half + d * d)
    };
    let core = integrate(density, -cut, cut, 1e-10 * peak * hwhm)?;
    // peak * hwhm^2 / (hwhm^2 + x^2) beyond |x| = cut, both sides
    let tails = 2.0 * peak * hwhm * (0.5 * PI - (cut / hwhm).atan());
    Ok(core + tails)
}

/// Anti-Stokes counts per FSR leaving the resonator,
/// `g alpha_noise P / (2 (1 + alpha_tilde P))`.
pub fn noise_cavity_per_fsr(noise: &NoiseParams, power_mw: f64) -> Result<f64> {
    noise.validate()?;
    ensure_non_negative("power_mw", power_mw)?;
    Ok(noise.gamma_r_ratio * noise.alpha_noise_cps_per_mw * power_mw
        / (2.0 * noise.saturation(power_mw)))
}

/// Anti-Stokes counts without a cavity in a band `bpf_ghz <= fsr_ghz`.
pub fn noise_nocavity(alpha_noise: f64, power_mw: f64, bpf_ghz: f64, fsr_ghz: f64) -> Result<f64> {
    ensure_non_negative("alpha_noise", alpha_noise)?;
    ensure_non_negative("power_mw", power_mw)?;
    ensure_positive("bpf_ghz", bpf_ghz)?;
    ensure_positive("fsr_ghz", fsr_ghz)?;
    if bpf_ghz > fsr_ghz {
        return Err(QfcError::invalid(format!(
            "filter band {bpf_ghz} GHz exceeds the FSR {fsr_ghz} GHz"
        )));
    }
    Ok(alpha_noise * power_mw * bpf_ghz / fsr_ghz)
}

/// Cavity noise per FSR relative to `g` times the no-cavity noise in an
/// FSR-wide band. Tends to 1/2 at low power.
pub fn half_noise_check(noise: &NoiseParams, power_mw: f64) -> Result<f64> {
    if noise.gamma_r_ratio == 0.0 || noise.alpha_noise_cps_per_mw == 0.0 {
        return Err(QfcError::UndefinedRatio(
            "no-cavity reference noise is zero".into(),
        ));
    }
    if power_mw == 0.0 {
        // limit of the ratio as P -> 0
        return Ok(0.5);
    }
    let cav = noise_cavity_per_fsr(noise, power_mw)?;
    let free = noise_nocavity(noise.alpha_noise_cps_per_mw, power_mw, 1.0, 1.0)?;
    Ok(cav / (noise.gamma_r_ratio * free))
}

/// `beta_tilde = F alpha_noise / (4 pi fsr)`.
pub fn beta_tilde_from(f_cold: f64, alpha_noise: f64, fsr_ghz: f64) -> Result<f64> {
    ensure_positive("f_cold", f_cold)?;
    ensure_non_negative("alpha_noise", alpha_noise)?;
    ensure_positive("fsr_ghz", fsr_ghz)?;
    Ok(f_cold * alpha_noise / (4.0 * PI * fsr_ghz))
}

/// Sampled anti-Stokes comb.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombSpectrum {
    pub frequencies_ghz: Vec<f64>,
    /// counts/s/GHz
    pub density: Vec<f64>,
    pub fsr_ghz: f64,
    pub fwhm_ghz: f64,
}

fn tooth_comb(cav: &CavityParams, noise: &NoiseParams, power_mw: f64) -> Result<(PeriodicLorentzian, f64)> {
    cav.validate()?;
    noise.validate()?;
    ensure_non_negative("power_mw", power_mw)?;
    let fwhm = cav.gamma_all_ghz() * noise.saturation(power_mw);
    let comb = PeriodicLorentzian::new(cav.fsr_ghz(), 0.5 * fwhm)?;
    let per_fsr = as_total_closed_form(noise, power_mw, cav.gamma_all_ghz())?;
    Ok((comb, per_fsr))
}

/// Anti-Stokes spectrum over `[-span/2, span/2]` GHz with a resonance at zero.
///
/// Every resonance contributes one [`as_spectral_density`] tooth; the sum over
/// all teeth is evaluated in closed form.
pub fn comb_spectrum(
    cav: &CavityParams,
    noise: &NoiseParams,
    power_mw: f64,
    span_ghz: f64,
    samples: usize,
) -> Result<CombSpectrum> {
    ensure_positive("span_ghz", span_ghz)?;
    let (comb, per_fsr) = tooth_comb(cav, noise, power_mw)?;
    let per_fsr_samples = (samples.saturating_sub(1)) as f64 * cav.fsr_ghz() / span_ghz;
    if per_fsr_samples < MIN_SAMPLES_PER_FSR {
        return Err(QfcError::invalid(format!(
            "{per_fsr_samples:.1} samples per FSR; at least {MIN_SAMPLES_PER_FSR} required"
        )));
    }
    let frequencies_ghz = linspace(-0.5 * span_ghz, 0.5 * span_ghz, samples);
    let density = frequencies_ghz
        .iter()
        .map(|&f| per_fsr * comb.density(f))
        .collect();
    Ok(CombSpectrum {
        frequencies_ghz,
        density,
        fsr_ghz: cav.fsr_ghz(),
        fwhm_ghz: 2.0 * comb.hwhm(),
    })
}

/// Count rate through a bandpass window of width `bpf_ghz` centred at each
/// of `centers_ghz`, i.e. the anti-Stokes comb as seen by a scanned filter.
pub fn filtered_comb_scan(
    cav: &CavityParams,
    noise: &NoiseParams,
    power_mw: f64,
    centers_ghz: &[f64],
    bpf_ghz: f64,
) -> Result<Vec<f64>> {
    ensure_positive("bpf_ghz", bpf_ghz)?;
    let (comb, per_fsr) = tooth_comb(cav, noise, power_mw)?;
    centers_ghz
        .iter()
        .map(|&c| Ok(per_fsr * comb.mass_between(c - 0.5 * bpf_ghz, c + 0.5 * bpf_ghz)?))
        .collect()
}

/// Noise reduction from placing the detection band at a comb anti-resonance.
///
/// Compares the counts in a `bpf_ghz` window for a flat spectrum against the
/// same window centred between two teeth of FWHM `fsr / F`, with both spectra
/// holding the same total per FSR.
pub fn spdc_antiresonant_suppression(finesse: f64, fsr_ghz: f64, bpf_ghz: f64) -> Result<f64> {
    ensure_positive("fsr_ghz", fsr_ghz)?;
    ensure_positive("bpf_ghz", bpf_ghz)?;
    ensure_finite("finesse", finesse)?;
    if finesse < 1.0 {
        return Err(QfcError::invalid(format!("finesse {finesse} below 1")));
    }
    if bpf_ghz > fsr_ghz {
        return Err(QfcError::invalid(format!(
            "window {bpf_ghz} GHz wider than the FSR {fsr_ghz} GHz"
        )));
    }
    let comb = PeriodicLorentzian::from_finesse(fsr_ghz, finesse)?;
    let mid = 0.5 * fsr_ghz;
    let comb_mass = comb.mass_between(mid - 0.5 * bpf_ghz, mid + 0.5 * bpf_ghz)?;
    let flat_mass = bpf_ghz / fsr_ghz;
    Ok(flat_mass / comb_mass)
}

/// Noise coefficient referred to the crystal output,
/// `alpha_noise / (L bpf T_circ g_opt)` in cps/(mm GHz mW).
pub fn normalized_noise_coefficient(
    alpha_noise: f64,
    length_mm: f64,
    bpf_ghz: f64,
    t_circ: f64,
    gamma_r_ratio_opt: f64,
) -> Result<f64> {
    ensure_positive("alpha_noise", alpha_noise)?;
    ensure_positive("length_mm", length_mm)?;
    ensure_positive("bpf_ghz", bpf_ghz)?;
    ensure_positive("t_circ", t_circ)?;
    ensure_positive("gamma_r_ratio_opt", gamma_r_ratio_opt)?;
    Ok(alpha_noise / (length_mm * bpf_ghz * t_circ * gamma_r_ratio_opt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(gamma_r: f64) -> NoiseParams {
        let cav = CavityParams::new(5200.0, 70.4, gamma_r).unwrap();
        NoiseParams::from_cavity(&cav, 230.0, 1.0 / 144.0).unwrap()
    }

    #[test]
    fn density_limits() {
        let n = NoiseParams {
            alpha_noise_cps_per_mw: 230.0,
            beta_tilde: 3.0,
            gamma_r_ratio: 0.7,
            alpha_tilde_per_mw: 0.0,
        };
        let peak = as_spectral_density(&n, 10.0, 0.0, 70.4).unwrap();
        assert_relative_eq!(peak, 4.0 * 0.7 * 3.0 * 10.0, max_relative = 1e-15);

        let n = params(0.7);
        let p = 100.0;
        let half = 0.5 * (1.0 + p / 144.0);
        let peak = as_spectral_density(&n, p, 0.0, 70.4).unwrap();
        assert_relative_eq!(
            peak,
            4.0 * 0.7 * n.beta_tilde * p / (1.0 + p / 144.0).powi(2),
            max_relative = 1e-14
        );
        for sign in [-1.0, 1.0] {
            let v = as_spectral_density(&n, p, sign * half * 70.4, 70.4).unwrap();
            assert_relative_eq!(v, 0.5 * peak, max_relative = 1e-14);
        }
    }

    #[test]
    fn numeric_total_matches_closed_form() {
        let n = params(0.7);
        for p in [0.5, 10.0, 144.0, 1000.0] {
            let q = as_total_numeric(&n, p, 0.0704).unwrap();
            let c = as_total_closed_form(&n, p, 0.0704).unwrap();
            assert_relative_eq!(q, c, max_relative = 1e-8);
            // with consistent beta_tilde the total is the saturating law
            assert_relative_eq!(c, noise_cavity_per_fsr(&n, p).unwrap(), max_relative = 1e-12);
        }
        assert_eq!(as_total_numeric(&n, 0.0, 0.0704).unwrap(), 0.0);
    }

    #[test]
    fn cavity_noise_examples() {
        let n = params(0.7);
        let slope = noise_cavity_per_fsr(&n, 1e-9).unwrap() / 1e-9;
        assert_relative_eq!(slope, 80.5, max_relative = 1e-9);
        assert_relative_eq!(noise_cavity_per_fsr(&n, 144.0).unwrap(), 5796.0, max_relative = 1e-12);
        let closed = params(0.0);
        for p in [0.0, 1.0, 100.0] {
            assert_eq!(noise_cavity_per_fsr(&closed, p).unwrap(), 0.0);
        }
    }

    #[test]
    fn nocavity_examples() {
        assert_relative_eq!(noise_nocavity(230.0, 10.0, 5.2, 5.2).unwrap(), 2300.0);
        let v = noise_nocavity(230.0, 100.0, 3.79, 5.2).unwrap();
        assert_relative_eq!(v, 23_000.0 * 3.79 / 5.2, max_relative = 1e-14);
        assert!((v - 16_765.0).abs() < 2.0, "{v}");
        assert_eq!(noise_nocavity(230.0, 0.0, 3.79, 5.2).unwrap(), 0.0);
        assert!(matches!(
            noise_nocavity(230.0, 1.0, 6.0, 5.2),
            Err(QfcError::InvalidArgument(_))
        ));
    }

    #[test]
    fn half_noise_examples() {
        let mut n = params(0.7);
        n.alpha_tilde_per_mw = 1.0;
        assert_eq!(half_noise_check(&n, 0.0).unwrap(), 0.5);
        assert_relative_eq!(half_noise_check(&n, 0.01).unwrap(), 0.5 / 1.01, max_relative = 1e-14);
        assert!((half_noise_check(&n, 0.01).unwrap() - 0.495).abs() < 1e-3);
        assert_relative_eq!(half_noise_check(&n, 1.0).unwrap(), 0.25, max_relative = 1e-14);
    }

    #[test]
    fn beta_tilde_examples() {
        let b = beta_tilde_from(74.0, 230.0, 5.2).unwrap();
        assert!((b - 260.4).abs() < 0.1, "{b}");
        assert_relative_eq!(beta_tilde_from(4.0 * PI, 1.0, 1.0).unwrap(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn comb_rejects_undersampling() {
        let cav = CavityParams::new(5200.0, 70.4, 0.7).unwrap();
        let n = params(0.7);
        // 2 nm scan at 0.01 nm steps is about 4 samples per FSR
        assert!(comb_spectrum(&cav, &n, 100.0, 253.0, 201).is_err());
        assert!(comb_spectrum(&cav, &n, 100.0, 52.0, 161).is_ok());
    }

    #[test]
    fn cold_tooth_width() {
        let cav = CavityParams::new(5200.0, 70.4, 0.7).unwrap();
        let n = params(0.7);
        let s = comb_spectrum(&cav, &n, 0.0, 10.4, 2001).unwrap();
        assert_relative_eq!(s.fwhm_ghz, 0.0704, max_relative = 1e-14);
        let s = comb_spectrum(&cav, &n, 144.0, 10.4, 2001).unwrap();
        assert_relative_eq!(s.fwhm_ghz, 0.1408, max_relative = 1e-14);
    }

    #[test]
    fn suppression_rejects_bad_inputs() {
        assert!(spdc_antiresonant_suppression(45.0, 5.0, 5.5).is_err());
        assert!(spdc_antiresonant_suppression(0.5, 5.0, 3.0).is_err());
        assert_relative_eq!(spdc_antiresonant_suppression(45.0, 5.0, 5.0).unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn normalized_coefficient_examples() {
        let v = normalized_noise_coefficient(230.0, 13.26, 3.79, 0.08, 1.0).unwrap();
        assert!((v - 57.2).abs() < 0.05, "{v}");
        let v = normalized_noise_coefficient(970.0, 45.0, 12.6, 0.09, 1.0).unwrap();
        assert!((v - 19.0).abs() < 0.05, "{v}");
        let v = normalized_noise_coefficient(85.0, 13.26, 3.88, 0.08, 0.7).unwrap();
        assert!((v - 29.5).abs() < 0.05, "{v}");
    }
}
