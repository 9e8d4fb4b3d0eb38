//! Named scalar overrides for `--param key=value`, checked against a fixed schema.

use std::collections::BTreeMap;

use cavity_qfc::noise::NoiseParams;
use cavity_qfc::presets::{Preset, PresetName};
use cavity_qfc::spectral::{CavityParams, PumpDrive};

use crate::error::{CliError, CliResult};

/// Every accepted key with a one-line description.
pub const SCHEMA: &[(&str, &str)] = &[
    ("fsr_MHz", "free spectral range"),
    ("gamma_all_MHz", "cold-cavity linewidth (FWHM)"),
    ("gamma_r", "extraction ratio"),
    ("alpha_tilde_per_mW", "saturation coupling, inverse impedance-matching power"),
    ("alpha_MHz_per_mW", "linewidth broadening slope"),
    ("alpha_noise_cps_per_mW", "anti-Stokes coefficient per FSR band"),
    ("bpf_GHz", "detection bandpass width"),
    ("t_circ", "transmittance from crystal to detector"),
    ("length_mm", "crystal length"),
    ("signal_nm", "signal wavelength"),
    ("power_mW", "pump power"),
    ("span_MHz", "detuning span of model spectra"),
    ("points", "number of samples"),
    ("p_min_mW", "lowest pump power of generated scans"),
    ("p_max_mW", "highest pump power of generated scans"),
    ("noise_rel", "relative Gaussian noise on generated scans"),
    ("mean_counts", "mean counts per point for Poisson comb scans (0 = noiseless)"),
    ("span_nm", "comb scan span"),
    ("step_nm", "comb scan step"),
    ("filter_nm", "scanning filter width"),
    ("finesse_c", "converted-mode finesse for the SNR table"),
    ("finesse_s", "signal-mode finesse for the SNR table"),
    ("grid", "points per SNR curve"),
    ("tolerance", "bisection tolerance of the minimum-finesse search"),
    ("g2_in", "input cross-correlation"),
    ("zeta", "signal-to-noise intensity ratio"),
    ("enhancement", "cavity enhancement factor"),
    ("g2_measured", "measured output correlation to invert for zeta"),
    ("mu", "mean pairs per time bin"),
    ("herald_eff", "herald detection efficiency"),
    ("signal_eff", "signal detection efficiency"),
    ("bins", "simulated time bins"),
    ("delay_span", "histogram half-width in bins"),
    ("window_ns", "coincidence window"),
    ("b_ref_per_mW", "reference single-pass efficiency coefficient"),
    ("l_ref_mm", "reference crystal length"),
];

#[derive(Debug, Clone)]
pub struct Params {
    preset: Preset,
    overrides: BTreeMap<String, f64>,
}

impl Params {
    pub fn new(preset: PresetName, raw: &[String]) -> CliResult<Self> {
        let mut overrides = BTreeMap::new();
        for item in raw {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--param expects key=value, got {item:?}")))?;
            let key = key.trim();
            if !SCHEMA.iter().any(|(k, _)| *k == key) {
                let known: Vec<&str> = SCHEMA.iter().map(|(k, _)| *k).collect();
                return Err(CliError::Usage(format!(
                    "unknown parameter {key:?}; known: {}",
                    known.join(", ")
                )));
            }
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("parameter {key}: {value:?} is not a number")))?;
            if !v.is_finite() {
                return Err(CliError::Usage(format!("parameter {key} must be finite")));
            }
            overrides.insert(key.to_string(), v);
        }
        Ok(Self {
            preset: Preset::get(preset),
            overrides,
        })
    }

    pub fn preset(&self) -> &Preset {
        &self.preset
    }

    fn preset_value(&self, key: &str) -> Option<f64> {
        let p = &self.preset;
        Some(match key {
            "fsr_MHz" => p.fsr_mhz,
            "gamma_all_MHz" => p.gamma_all_mhz,
            "gamma_r" => p.gamma_r_ratio,
            "alpha_tilde_per_mW" => p.alpha_tilde_per_mw,
            "alpha_MHz_per_mW" => p.alpha_mhz_per_mw,
            "alpha_noise_cps_per_mW" => p.alpha_noise_cps_per_mw,
            "bpf_GHz" => p.bpf_ghz,
            "t_circ" => p.t_circ,
            "length_mm" => p.length_mm,
            "signal_nm" => p.signal_nm,
            _ => return None,
        })
    }

    /// Override, else preset value, else `fallback`.
    pub fn get(&self, key: &str, fallback: f64) -> f64 {
        debug_assert!(SCHEMA.iter().any(|(k, _)| *k == key), "{key} missing from schema");
        self.overrides
            .get(key)
            .copied()
            .or_else(|| self.preset_value(key))
            .unwrap_or(fallback)
    }

    pub fn get_opt(&self, key: &str) -> Option<f64> {
        self.overrides.get(key).copied().or_else(|| self.preset_value(key))
    }

    pub fn count(&self, key: &str, fallback: usize) -> CliResult<usize> {
        let v = self.get(key, fallback as f64);
        if v < 0.0 || v.fract() != 0.0 || v > 1e12 {
            return Err(CliError::Usage(format!("parameter {key} must be a whole number, got {v}")));
        }
        Ok(v as usize)
    }

    pub fn cavity(&self) -> CliResult<CavityParams> {
        Ok(CavityParams::new(
            self.get("fsr_MHz", 0.0),
            self.get("gamma_all_MHz", 0.0),
            self.get("gamma_r", 0.0),
        )?)
    }

    pub fn drive(&self, power_mw: f64) -> CliResult<PumpDrive> {
        Ok(PumpDrive::new(power_mw, self.get("alpha_tilde_per_mW", 0.0))?)
    }

    pub fn noise(&self) -> CliResult<NoiseParams> {
        Ok(NoiseParams::from_cavity(
            &self.cavity()?,
            self.get("alpha_noise_cps_per_mW", 0.0),
            self.get("alpha_tilde_per_mW", 0.0),
        )?)
    }

    /// Effective parameters in key order, for provenance headers.
    pub fn effective(&self, keys: &[&str]) -> Vec<(String, f64)> {
        keys.iter()
            .filter_map(|k| self.get_opt(k).map(|v| (k.to_string(), v)))
            .collect()
    }
}
