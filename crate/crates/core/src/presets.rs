//! Reference device and experiment parameter sets.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::noise::NoiseParams;
use crate::spectral::{CavityParams, PumpDrive};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PresetName {
    /// 1540 nm signal, 13.26 mm crystal cavity.
    Telecom1540,
    /// 1522 nm signal in the same cavity design.
    Telecom1522,
    /// Anti-resonant filtering design for a 1587 nm converted photon.
    NvDesign,
}

impl PresetName {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "1540" => Some(PresetName::Telecom1540),
            "1522" => Some(PresetName::Telecom1522),
            "nv" => Some(PresetName::NvDesign),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PresetName::Telecom1540 => "1540",
            PresetName::Telecom1522 => "1522",
            PresetName::NvDesign => "nv",
        }
    }
}

/// Everything a model run needs, in the units used across the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: PresetName,
    pub fsr_mhz: f64,
    pub gamma_all_mhz: f64,
    pub gamma_r_ratio: f64,
    /// Power-broadening slope of the linewidth.
    pub alpha_mhz_per_mw: f64,
    /// Saturation coupling per mW, the inverse of the impedance-matching power.
    pub alpha_tilde_per_mw: f64,
    pub alpha_noise_cps_per_mw: f64,
    pub bpf_ghz: f64,
    /// Transmittance from the crystal output to the detector.
    pub t_circ: f64,
    pub length_mm: f64,
    pub signal_nm: f64,
}

impl Preset {
    pub fn get(name: PresetName) -> Self {
        match name {
            PresetName::Telecom1540 => Preset {
                name,
                fsr_mhz: 5200.0,
                gamma_all_mhz: 70.4,
                gamma_r_ratio: 0.7,
                alpha_mhz_per_mw: 0.49,
                alpha_tilde_per_mw: 1.0 / 144.0,
                alpha_noise_cps_per_mw: 230.0,
                bpf_ghz: 3.79,
                t_circ: 0.08,
                length_mm: 13.26,
                signal_nm: 1540.0,
            },
            PresetName::Telecom1522 => Preset {
                name,
                fsr_mhz: 5200.0,
                gamma_all_mhz: 34.4,
                gamma_r_ratio: 0.7,
                alpha_mhz_per_mw: 0.56,
                alpha_tilde_per_mw: 1.0 / 61.0,
                alpha_noise_cps_per_mw: 85.0,
                bpf_ghz: 3.88,
                t_circ: 0.08,
                length_mm: 13.26,
                signal_nm: 1522.0,
            },
            PresetName::NvDesign => Preset {
                name,
                fsr_mhz: 5000.0,
                gamma_all_mhz: 5000.0 / 45.0,
                gamma_r_ratio: 0.7,
                alpha_mhz_per_mw: 0.49,
                alpha_tilde_per_mw: 1.0 / 144.0,
                alpha_noise_cps_per_mw: 230.0,
                bpf_ghz: 0.03 * crate::spectral::SPEED_OF_LIGHT / (1587.0 * 1587.0),
                t_circ: 0.08,
                length_mm: 13.26,
                signal_nm: 1587.0,
            },
        }
    }

    pub fn cavity(&self) -> Result<CavityParams> {
        CavityParams::new(self.fsr_mhz, self.gamma_all_mhz, self.gamma_r_ratio)
    }

    pub fn drive(&self, power_mw: f64) -> Result<PumpDrive> {
        PumpDrive::new(power_mw, self.alpha_tilde_per_mw)
    }

    pub fn noise(&self) -> Result<NoiseParams> {
        NoiseParams::from_cavity(&self.cavity()?, self.alpha_noise_cps_per_mw, self.alpha_tilde_per_mw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_build() {
        for name in [PresetName::Telecom1540, PresetName::Telecom1522, PresetName::NvDesign] {
            let p = Preset::get(name);
            p.cavity().unwrap();
            p.drive(100.0).unwrap();
            p.noise().unwrap();
            assert_eq!(PresetName::parse(name.label()), Some(name));
        }
    }
}
