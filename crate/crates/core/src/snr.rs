//! Signal-to-noise comparison between cavity-enhanced and single-pass conversion.
//!
//! SNR is conversion efficiency divided by the anti-Stokes rate in the
//! detection band. For the resonator both terms scale with the extraction
//! ratio, which therefore cancels.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_non_negative, ensure_positive, QfcError, Result};
use crate::noise::spdc_antiresonant_suppression;
use crate::quad::linspace;
use crate::spectral::{alpha_tilde_from_finesse, bandwidth_nm_to_ghz};

/// `B / alpha_noise` for normalized curves: unit single-pass efficiency at unit power.
pub const NORMALIZED_B: f64 = PI * PI / 4.0;

const DOMINANCE_GRID_POINTS: usize = 512;
const DOMINANCE_MIN_EFFICIENCY: f64 = 1e-4;
const BISECTION_MAX_ITERATIONS: usize = 60;
const TENFOLD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Confinement {
    None,
    ConvertedMode,
    SignalMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandChoice {
    FsrWide,
    FwhmWide,
}

/// One cell of the configuration comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrConfig {
    pub confinement: Confinement,
    pub f_c: f64,
    pub f_s: f64,
    pub band: BandChoice,
    pub b_over_alpha_noise: f64,
}

impl SnrConfig {
    pub fn new(confinement: Confinement, f_c: f64, f_s: f64, band: BandChoice) -> Result<Self> {
        let cfg = Self {
            confinement,
            f_c,
            f_s,
            band,
            b_over_alpha_noise: NORMALIZED_B,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("b_over_alpha_noise", self.b_over_alpha_noise)?;
        let needs_fc = self.confinement == Confinement::ConvertedMode || self.band == BandChoice::FwhmWide;
        if needs_fc && !(self.f_c >= 1.0) {
            return Err(QfcError::invalid(format!("F_c = {} must be >= 1", self.f_c)));
        }
        if self.confinement == Confinement::SignalMode && !(self.f_s >= 1.0) {
            return Err(QfcError::invalid(format!("F_s = {} must be >= 1", self.f_s)));
        }
        Ok(())
    }

    /// SNR relative to the unconfined converter with an FSR-wide band.
    pub fn normalized_snr(&self) -> Result<f64> {
        self.validate()?;
        let (f_c, f_s) = (self.f_c, self.f_s);
        Ok(match (self.band, self.confinement) {
            (BandChoice::FsrWide, Confinement::None) => 1.0,
            (BandChoice::FsrWide, Confinement::ConvertedMode) => 2.0 * f_c / PI,
            (BandChoice::FsrWide, Confinement::SignalMode) => f_s / PI,
            (BandChoice::FwhmWide, Confinement::None) => f_c,
            (BandChoice::FwhmWide, Confinement::ConvertedMode) => 2.0 * f_c / PI,
            (BandChoice::FwhmWide, Confinement::SignalMode) => f_c * f_s / PI,
        })
    }
}

/// Cavity SNR `8 alpha_tilde / (alpha_noise (1 + alpha_tilde P)^2)`.
pub fn snr_cav(power_mw: f64, alpha_tilde: f64, alpha_noise: f64) -> Result<f64> {
    ensure_non_negative("power_mw", power_mw)?;
    ensure_positive("alpha_tilde", alpha_tilde)?;
    ensure_positive("alpha_noise", alpha_noise)?;
    let sat = 1.0 + alpha_tilde * power_mw;
    Ok(8.0 * alpha_tilde / (alpha_noise * sat * sat))
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Single-pass SNR `B sinc^2(sqrt(B P)) / (alpha_noise band_ratio)`.
pub fn snr_nocav(power_mw: f64, b: f64, alpha_noise: f64, band_ratio: f64) -> Result<f64> {
    ensure_non_negative("power_mw", power_mw)?;
    ensure_positive("b", b)?;
    ensure_positive("alpha_noise", alpha_noise)?;
    ensure_finite("band_ratio", band_ratio)?;
    if !(band_ratio > 0.0 && band_ratio <= 1.0) {
        return Err(QfcError::invalid(format!("band ratio {band_ratio} outside (0, 1]")));
    }
    let s = sinc((b * power_mw).sqrt());
    Ok(b * s * s / (alpha_noise * band_ratio))
}

/// SNR as a function of conversion efficiency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrCurve {
    pub efficiencies: Vec<f64>,
    pub snr_values: Vec<f64>,
    pub label: String,
}

/// Normalized cavity and single-pass SNR curves (B = pi^2/4, alpha_noise = 1,
/// FSR-wide band, lossless extraction).
///
/// The cavity curve follows the under-coupled branch `P in [0, 1/alpha_tilde]`
/// and the single-pass curve `B P in [0, (pi/2)^2]`.
pub fn normalized_snr_curves(f_cold: f64, grid_size: usize) -> Result<(SnrCurve, SnrCurve)> {
    ensure_positive("f_cold", f_cold)?;
    if grid_size < 32 {
        return Err(QfcError::invalid(format!("grid size {grid_size} below 32")));
    }
    let b = NORMALIZED_B;
    let alpha_tilde = alpha_tilde_from_finesse(f_cold, b)?;

    let mut cavity = SnrCurve {
        efficiencies: Vec::with_capacity(grid_size),
        snr_values: Vec::with_capacity(grid_size),
        label: format!("cavity F_cold={f_cold}"),
    };
    for p in linspace(0.0, 1.0 / alpha_tilde, grid_size) {
        let c = alpha_tilde * p;
        cavity.efficiencies.push(4.0 * c / ((1.0 + c) * (1.0 + c)));
        cavity.snr_values.push(snr_cav(p, alpha_tilde, 1.0)?);
    }
    // the last point sits on impedance matching
    if let Some(last) = cavity.efficiencies.last_mut() {
        *last = 1.0;
    }

    let mut free = SnrCurve {
        efficiencies: Vec::with_capacity(grid_size),
        snr_values: Vec::with_capacity(grid_size),
        label: "no cavity".to_string(),
    };
    for root in linspace(0.0, 0.5 * PI, grid_size) {
        let p = root * root / b;
        free.efficiencies.push(root.sin().powi(2));
        free.snr_values.push(snr_nocav(p, b, 1.0, 1.0)?);
    }
    if let Some(last) = free.efficiencies.last_mut() {
        *last = 1.0;
    }
    Ok((cavity, free))
}

/// Normalized cavity SNR at efficiency `eta` on the under-coupled branch.
pub fn normalized_cavity_snr_at(f_cold: f64, eta: f64) -> Result<f64> {
    ensure_positive("f_cold", f_cold)?;
    check_efficiency(eta)?;
    let alpha_tilde = alpha_tilde_from_finesse(f_cold, NORMALIZED_B)?;
    // eta (1 + C)^2 = 4 C, smaller root
    let coupling = if eta == 0.0 {
        0.0
    } else {
        ((2.0 - eta) - 2.0 * (1.0 - eta).sqrt()) / eta
    };
    snr_cav(coupling / alpha_tilde, alpha_tilde, 1.0)
}

/// Normalized single-pass SNR at efficiency `eta`.
pub fn normalized_nocavity_snr_at(eta: f64) -> Result<f64> {
    check_efficiency(eta)?;
    let root = eta.sqrt().asin();
    snr_nocav(root * root / NORMALIZED_B, NORMALIZED_B, 1.0, 1.0)
}

fn check_efficiency(eta: f64) -> Result<()> {
    ensure_finite("eta", eta)?;
    if !(0.0..=1.0).contains(&eta) {
        return Err(QfcError::invalid(format!("efficiency {eta} outside [0, 1]")));
    }
    Ok(())
}

/// Log-spaced efficiency grid used for dominance checks.
pub fn dominance_grid() -> Vec<f64> {
    let lo = DOMINANCE_MIN_EFFICIENCY.ln();
    linspace(lo, 0.0, DOMINANCE_GRID_POINTS)
        .into_iter()
        .map(f64::exp)
        .map(|e| e.min(1.0))
        .collect()
}

/// First grid efficiency where the cavity curve falls below the single-pass
/// curve, or `None` when the cavity dominates everywhere.
pub fn dominance_violation(f_cold: f64) -> Result<Option<f64>> {
    for eta in dominance_grid() {
        if normalized_cavity_snr_at(f_cold, eta)? < normalized_nocavity_snr_at(eta)? {
            return Ok(Some(eta));
        }
    }
    Ok(None)
}

/// Smallest cold finesse for which the cavity SNR is at least the single-pass
/// SNR at every efficiency, by bisection.
pub fn min_finesse_for_dominance(tolerance: f64) -> Result<f64> {
    ensure_positive("tolerance", tolerance)?;
    let (mut lo, mut hi) = (1.0, 100.0);
    if dominance_violation(lo)?.is_none() || dominance_violation(hi)?.is_some() {
        return Err(QfcError::NumericFailure {
            message: "dominance threshold not bracketed by [1, 100]".into(),
            iterations: 0,
        });
    }
    for _ in 0..BISECTION_MAX_ITERATIONS {
        if hi - lo < tolerance {
            return Ok(0.5 * (lo + hi));
        }
        let mid = 0.5 * (lo + hi);
        if dominance_violation(mid)?.is_none() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if hi - lo < tolerance {
        return Ok(0.5 * (lo + hi));
    }
    Err(QfcError::NumericFailure {
        message: format!("bracket width {:e} above tolerance {tolerance:e}", hi - lo),
        iterations: BISECTION_MAX_ITERATIONS,
    })
}

/// Normalized SNR factors for each confinement and detection band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrTable {
    /// [no cavity, converted mode, signal mode] with an FSR-wide band.
    pub fsr_row: [f64; 3],
    /// Same columns with a band as narrow as the cavity linewidth.
    pub fwhm_row: [f64; 3],
}

pub fn snr_config_table(f_c: f64, f_s: f64) -> Result<SnrTable> {
    let row = |band| -> Result<[f64; 3]> {
        let mut out = [0.0; 3];
        for (slot, confinement) in out.iter_mut().zip([
            Confinement::None,
            Confinement::ConvertedMode,
            Confinement::SignalMode,
        ]) {
            *slot = SnrConfig::new(confinement, f_c, f_s, band)?.normalized_snr()?;
        }
        Ok(out)
    };
    Ok(SnrTable {
        fsr_row: row(BandChoice::FsrWide)?,
        fwhm_row: row(BandChoice::FwhmWide)?,
    })
}

/// Low-power cavity/single-pass SNR ratio for an FSR-wide band, `2F/pi`.
pub fn low_power_snr_gain(f_cold: f64) -> Result<f64> {
    let b = NORMALIZED_B;
    let alpha_tilde = alpha_tilde_from_finesse(f_cold, b)?;
    Ok(snr_cav(0.0, alpha_tilde, 1.0)? / snr_nocav(0.0, b, 1.0, 1.0)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NvDesignReport {
    pub finesse: f64,
    pub fsr_ghz: f64,
    pub bpf_ghz: f64,
    pub suppression: f64,
    pub over_tenfold: bool,
}

/// Anti-resonant noise suppression for a cavity on the long-wavelength SPDC
/// partner, with the detection band given in nm at `center_nm`.
pub fn nv_design_report(
    finesse: f64,
    fsr_ghz: f64,
    bpf_nm: f64,
    center_nm: f64,
) -> Result<NvDesignReport> {
    let bpf_ghz = bandwidth_nm_to_ghz(bpf_nm, center_nm)?;
    let suppression = spdc_antiresonant_suppression(finesse, fsr_ghz, bpf_ghz)?;
    Ok(NvDesignReport {
        finesse,
        fsr_ghz,
        bpf_ghz,
        suppression,
        over_tenfold: suppression > TENFOLD,
    })
}
