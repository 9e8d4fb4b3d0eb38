//! Closed-form response of a waveguide resonator that confines only the
//! converted mode: transmission/conversion amplitudes, efficiencies, power
//! broadening, finesse and wavelength bookkeeping.
//!
//! Linewidths and detunings are ordinary-frequency FWHM values in MHz. Only
//! ratios such as `detuning / gamma_all` enter the amplitudes, so the angular
//! vs. ordinary frequency convention cancels.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{
    ensure_finite, ensure_non_negative, ensure_positive, ensure_unit_interval, QfcError, Result,
};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Relative tolerance between a stated FSR and the one implied by geometry.
const FSR_GEOMETRY_TOLERANCE: f64 = 5e-3;

/// Resonator geometry and loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    /// Free spectral range (MHz).
    pub fsr_mhz: f64,
    /// Cold-cavity FWHM, the total decay rate `gamma_r + gamma_int` (MHz).
    pub gamma_all_mhz: f64,
    /// Extraction ratio `gamma_r / gamma_all`.
    pub gamma_r_ratio: f64,
    /// Waveguide length (mm).
    pub length_mm: Option<f64>,
    /// Effective group index.
    pub group_index: Option<f64>,
}

impl CavityParams {
    pub fn new(fsr_mhz: f64, gamma_all_mhz: f64, gamma_r_ratio: f64) -> Result<Self> {
        let cav = Self {
            fsr_mhz,
            gamma_all_mhz,
            gamma_r_ratio,
            length_mm: None,
            group_index: None,
        };
        cav.validate()?;
        Ok(cav)
    }

    /// Attaches a waveguide length; the group index is inferred from the FSR.
    pub fn with_length(mut self, length_mm: f64) -> Result<Self> {
        ensure_positive("length_mm", length_mm)?;
        self.group_index = Some(group_index_from(length_mm, self.fsr_mhz * 1e-3)?);
        self.length_mm = Some(length_mm);
        Ok(self)
    }

    /// Attaches both length and group index, which must reproduce the FSR.
    pub fn with_geometry(mut self, length_mm: f64, group_index: f64) -> Result<Self> {
        self.length_mm = Some(length_mm);
        self.group_index = Some(group_index);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("fsr_mhz", self.fsr_mhz)?;
        ensure_positive("gamma_all_mhz", self.gamma_all_mhz)?;
        ensure_unit_interval("gamma_r_ratio", self.gamma_r_ratio)?;
        if self.fsr_mhz < self.gamma_all_mhz {
            return Err(QfcError::invalid(format!(
                "finesse {} below 1 (fsr {} MHz < fwhm {} MHz)",
                self.fsr_mhz / self.gamma_all_mhz,
                self.fsr_mhz,
                self.gamma_all_mhz
            )));
        }
        if let (Some(len), Some(ng)) = (self.length_mm, self.group_index) {
            let geometric = fsr_from_length(len, ng)? * 1e3;
            let rel = (geometric - self.fsr_mhz).abs() / self.fsr_mhz;
            if rel > FSR_GEOMETRY_TOLERANCE {
                return Err(QfcError::invalid(format!(
                    "fsr {} MHz inconsistent with length {len} mm and group index {ng} ({geometric:.1} MHz)",
                    self.fsr_mhz
                )));
            }
        }
        Ok(())
    }

    pub fn fsr_ghz(&self) -> f64 {
        self.fsr_mhz * 1e-3
    }

    pub fn gamma_all_ghz(&self) -> f64 {
        self.gamma_all_mhz * 1e-3
    }
}

/// Pump drive. The dimensionless coupling is `alpha_tilde * power`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpDrive {
    pub power_mw: f64,
    /// Normalized coupling coefficient (1/mW).
    pub alpha_tilde_per_mw: f64,
    pub phase_rad: f64,
}

impl PumpDrive {
    pub fn new(power_mw: f64, alpha_tilde_per_mw: f64) -> Result<Self> {
        let drive = Self {
            power_mw,
            alpha_tilde_per_mw,
            phase_rad: 0.0,
        };
        drive.validate()?;
        Ok(drive)
    }

    pub fn with_phase(mut self, phase_rad: f64) -> Result<Self> {
        ensure_finite("phase_rad", phase_rad)?;
        self.phase_rad = phase_rad;
        Ok(self)
    }

    /// Builds `alpha_tilde` from a measured broadening slope (MHz/mW) and cold FWHM (MHz).
    pub fn from_broadening(power_mw: f64, alpha_mhz_per_mw: f64, gamma_all_mhz: f64) -> Result<Self> {
        ensure_positive("alpha_mhz_per_mw", alpha_mhz_per_mw)?;
        ensure_positive("gamma_all_mhz", gamma_all_mhz)?;
        Self::new(power_mw, alpha_mhz_per_mw / gamma_all_mhz)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_non_negative("power_mw", self.power_mw)?;
        ensure_positive("alpha_tilde_per_mw", self.alpha_tilde_per_mw)?;
        ensure_finite("phase_rad", self.phase_rad)?;
        Ok(())
    }

    /// Dimensionless coupling `C = alpha_tilde * P`.
    pub fn coupling(&self) -> f64 {
        self.alpha_tilde_per_mw * self.power_mw
    }
}

fn normalized_detuning(cav: &CavityParams, detuning_mhz: f64) -> Result<f64> {
    ensure_finite("detuning_mhz", detuning_mhz)?;
    Ok(detuning_mhz / cav.gamma_all_mhz)
}

/// Amplitude of the unconverted signal, `t_ss`.
pub fn transmission_amplitude(
    cav: &CavityParams,
    drive: &PumpDrive,
    detuning_mhz: f64,
) -> Result<Complex64> {
    cav.validate()?;
    drive.validate()?;
    let d = normalized_detuning(cav, detuning_mhz)?;
    let c = drive.coupling();
    let num = Complex64::new(0.5 * (1.0 - c), -d);
    let den = Complex64::new(0.5 * (1.0 + c), -d);
    Ok(num / den)
}

/// Amplitude of the converted output, `r_rs`.
pub fn conversion_amplitude(
    cav: &CavityParams,
    drive: &PumpDrive,
    detuning_mhz: f64,
) -> Result<Complex64> {
    cav.validate()?;
    drive.validate()?;
    let d = normalized_detuning(cav, detuning_mhz)?;
    let c = drive.coupling();
    let num = Complex64::from_polar(cav.gamma_r_ratio.sqrt() * c.sqrt(), -drive.phase_rad);
    let den = Complex64::new(0.5 * (1.0 + c), -d);
    Ok(num / den)
}

/// On-resonance conversion efficiency `4 g C / (1 + C)^2`.
pub fn peak_efficiency(drive: &PumpDrive, gamma_r_ratio: f64) -> Result<f64> {
    drive.validate()?;
    ensure_unit_interval("gamma_r_ratio", gamma_r_ratio)?;
    let c = drive.coupling();
    Ok(4.0 * gamma_r_ratio * c / ((1.0 + c) * (1.0 + c)))
}

/// Power-broadened linewidth `gamma_all (1 + alpha_tilde P)` in MHz.
pub fn power_broadened_fwhm(cav: &CavityParams, drive: &PumpDrive) -> Result<f64> {
    cav.validate()?;
    drive.validate()?;
    Ok(cav.gamma_all_mhz * (1.0 + drive.coupling()))
}

/// Cold-cavity finesse, FSR over FWHM.
pub fn finesse(cav: &CavityParams) -> Result<f64> {
    cav.validate()?;
    Ok(cav.fsr_mhz / cav.gamma_all_mhz)
}

/// Free spectral range `c / (2 n_g L)` in GHz.
pub fn fsr_from_length(length_mm: f64, group_index: f64) -> Result<f64> {
    ensure_positive("length_mm", length_mm)?;
    ensure_positive("group_index", group_index)?;
    // c [m/s] / (2 n L[mm] * 1e-3) -> Hz; 1e-9 -> GHz
    Ok(SPEED_OF_LIGHT / (2.0 * group_index * length_mm) * 1e-6)
}

/// Group index implied by a length (mm) and FSR (GHz).
pub fn group_index_from(length_mm: f64, fsr_ghz: f64) -> Result<f64> {
    ensure_positive("length_mm", length_mm)?;
    ensure_positive("fsr_ghz", fsr_ghz)?;
    Ok(SPEED_OF_LIGHT / (2.0 * length_mm * fsr_ghz) * 1e-6)
}

/// Airy finesse `pi sqrt(rho) / (1 - rho)` for round-trip amplitude factor
/// `rho = sqrt(R1 R2) (1 - loss)`.
pub fn finesse_from_reflectances(
    r_front: f64,
    r_rear: f64,
    internal_loss_per_pass: f64,
) -> Result<f64> {
    ensure_unit_interval("r_front", r_front)?;
    ensure_unit_interval("r_rear", r_rear)?;
    ensure_unit_interval("internal_loss_per_pass", internal_loss_per_pass)?;
    let rho = (r_front * r_rear).sqrt() * (1.0 - internal_loss_per_pass);
    if rho >= 1.0 {
        return Err(QfcError::invalid(
            "lossless closed cavity has unbounded finesse",
        ));
    }
    Ok(PI * rho.sqrt() / (1.0 - rho))
}

/// Single-pass efficiency without a cavity, `sin^2(sqrt(B P))`.
pub fn nocavity_efficiency(power_mw: f64, b_per_mw: f64) -> Result<f64> {
    ensure_non_negative("power_mw", power_mw)?;
    ensure_positive("b_per_mw", b_per_mw)?;
    Ok((b_per_mw * power_mw).sqrt().sin().powi(2))
}

/// Cavity coupling coefficient implied by the `F/pi` enhancement: `F B / (4 pi)`.
pub fn alpha_tilde_from_finesse(f_cold: f64, b_per_mw: f64) -> Result<f64> {
    ensure_positive("f_cold", f_cold)?;
    ensure_positive("b_per_mw", b_per_mw)?;
    Ok(f_cold * b_per_mw / (4.0 * PI))
}

/// Difference-frequency output wavelength (nm) for `w_r = w_s - w_p`.
pub fn dfg_wavelength(signal_nm: f64, pump_nm: f64) -> Result<f64> {
    ensure_positive("signal_nm", signal_nm)?;
    ensure_positive("pump_nm", pump_nm)?;
    if pump_nm <= signal_nm {
        return Err(QfcError::invalid(format!(
            "pump wavelength {pump_nm} nm must exceed signal wavelength {signal_nm} nm"
        )));
    }
    Ok(1.0 / (1.0 / signal_nm - 1.0 / pump_nm))
}

/// Converts a wavelength bandwidth (nm) at `center_nm` into GHz, `c dl / l^2`.
pub fn bandwidth_nm_to_ghz(delta_nm: f64, center_nm: f64) -> Result<f64> {
    ensure_positive("delta_nm", delta_nm)?;
    ensure_positive("center_nm", center_nm)?;
    // nm / nm^2 = 1/nm = 1e9 / m; times c [m/s] -> Hz * 1e9 -> GHz directly.
    Ok(SPEED_OF_LIGHT * delta_nm / (center_nm * center_nm))
}

/// Vacuum wavelengths of the three interacting modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavelengthConfig {
    pub signal_nm: f64,
    pub pump_nm: f64,
    pub converted_nm: f64,
}

impl WavelengthConfig {
    pub fn new(signal_nm: f64, pump_nm: f64, converted_nm: f64) -> Result<Self> {
        ensure_positive("signal_nm", signal_nm)?;
        ensure_positive("pump_nm", pump_nm)?;
        ensure_positive("converted_nm", converted_nm)?;
        let expected = 1.0 / signal_nm - 1.0 / pump_nm;
        let got = 1.0 / converted_nm;
        if ((got - expected) / expected).abs() > 1e-3 {
            return Err(QfcError::invalid(format!(
                "{signal_nm} nm - {pump_nm} nm does not produce {converted_nm} nm"
            )));
        }
        Ok(Self {
            signal_nm,
            pump_nm,
            converted_nm,
        })
    }

    pub fn from_dfg(signal_nm: f64, pump_nm: f64) -> Result<Self> {
        let converted_nm = dfg_wavelength(signal_nm, pump_nm)?;
        Self::new(signal_nm, pump_nm, converted_nm)
    }
}

/// Amplitudes sampled over a detuning grid at one pump power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversionResponse {
    pub detunings_mhz: Vec<f64>,
    pub t_ss: Vec<Complex64>,
    pub r_rs: Vec<Complex64>,
    pub power_mw: f64,
}

impl ConversionResponse {
    pub fn sample(cav: &CavityParams, drive: &PumpDrive, detunings_mhz: &[f64]) -> Result<Self> {
        let t_ss = detunings_mhz
            .iter()
            .map(|&d| transmission_amplitude(cav, drive, d))
            .collect::<Result<Vec<_>>>()?;
        let r_rs = detunings_mhz
            .iter()
            .map(|&d| conversion_amplitude(cav, drive, d))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            detunings_mhz: detunings_mhz.to_vec(),
            t_ss,
            r_rs,
            power_mw: drive.power_mw,
        })
    }

    pub fn transmission(&self) -> Vec<f64> {
        self.t_ss.iter().map(|t| t.norm_sqr()).collect()
    }

    pub fn conversion(&self) -> Vec<f64> {
        self.r_rs.iter().map(|r| r.norm_sqr()).collect()
    }
}
