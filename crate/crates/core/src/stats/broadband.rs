use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, QfcError, Result};
use crate::estimation::{AbscissaUnit, ScanSeries};
use crate::quad::trapezoid;
use crate::spectral::ConversionResponse;

/// Least fraction of the photon spectrum the response grid must cover.
const MIN_COVERAGE: f64 = 0.99;

/// Spectral shape of the incoming photon, detunings in MHz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum PhotonSpectrum {
    FlatTop { center_mhz: f64, width_mhz: f64 },
    Lorentzian { center_mhz: f64, fwhm_mhz: f64 },
    Gaussian { center_mhz: f64, fwhm_mhz: f64 },
    /// Arbitrary measured shape; normalized internally.
    Sampled(ScanSeries),
}

impl PhotonSpectrum {
    fn validate(&self) -> Result<()> {
        match self {
            PhotonSpectrum::FlatTop { center_mhz, width_mhz } => {
                ensure_finite("center_mhz", *center_mhz)?;
                ensure_positive("width_mhz", *width_mhz)?;
            }
            PhotonSpectrum::Lorentzian { center_mhz, fwhm_mhz }
            | PhotonSpectrum::Gaussian { center_mhz, fwhm_mhz } => {
                ensure_finite("center_mhz", *center_mhz)?;
                ensure_positive("fwhm_mhz", *fwhm_mhz)?;
            }
            PhotonSpectrum::Sampled(s) => s.validate()?,
        }
        Ok(())
    }

    fn density(&self, x: f64) -> f64 {
        match *self {
            PhotonSpectrum::Lorentzian { center_mhz, fwhm_mhz } => {
                let h = 0.5 * fwhm_mhz;
                let u = (x - center_mhz) / h;
                1.0 / (std::f64::consts::PI * h * (1.0 + u * u))
            }
            PhotonSpectrum::Gaussian { center_mhz, fwhm_mhz } => {
                let s = fwhm_mhz / (8.0 * std::f64::consts::LN_2).sqrt();
                let u = (x - center_mhz) / s;
                (-0.5 * u * u).exp() / (s * (2.0 * std::f64::consts::PI).sqrt())
            }
            _ => unreachable!("density only for analytic bell shapes"),
        }
    }

    /// Probability mass inside `[lo, hi]`.
    fn mass_within(&self, lo: f64, hi: f64) -> f64 {
        match *self {
            PhotonSpectrum::FlatTop { center_mhz, width_mhz } => {
                let a = (center_mhz - 0.5 * width_mhz).max(lo);
                let b = (center_mhz + 0.5 * width_mhz).min(hi);
                ((b - a) / width_mhz).max(0.0)
            }
            PhotonSpectrum::Lorentzian { center_mhz, fwhm_mhz } => {
                let h = 0.5 * fwhm_mhz;
                (((hi - center_mhz) / h).atan() - ((lo - center_mhz) / h).atan()) / std::f64::consts::PI
            }
            PhotonSpectrum::Gaussian { center_mhz, fwhm_mhz } => {
                let s = fwhm_mhz / (8.0 * std::f64::consts::LN_2).sqrt();
                let phi = |x: f64| 0.5 * libm::erfc(-(x - center_mhz) / (s * std::f64::consts::SQRT_2));
                phi(hi) - phi(lo)
            }
            PhotonSpectrum::Sampled(_) => unreachable!(),
        }
    }
}

/// Integral over `[lo, hi]` of the piecewise-linear interpolant of `(x, y)`.
fn interpolant_integral(x: &[f64], y: &[f64], lo: f64, hi: f64) -> f64 {
    let at = |i: usize, t: f64| y[i] + (y[i + 1] - y[i]) * (t - x[i]) / (x[i + 1] - x[i]);
    let mut total = 0.0;
    for i in 0..x.len() - 1 {
        let a = x[i].max(lo);
        let b = x[i + 1].min(hi);
        if b > a {
            total += 0.5 * (b - a) * (at(i, a) + at(i, b));
        }
    }
    total
}

fn interpolate(x: &[f64], y: &[f64], t: f64) -> f64 {
    let i = x.partition_point(|v| *v <= t).clamp(1, x.len() - 1) - 1;
    y[i] + (y[i + 1] - y[i]) * (t - x[i]) / (x[i + 1] - x[i])
}

/// Spectrally averaged conversion efficiency `integral S(d) |r_rs(d)|^2 dd`
/// for a unit-area photon spectrum `S`.
pub fn broadband_conversion_efficiency(
    photon: &PhotonSpectrum,
    response: &ConversionResponse,
) -> Result<f64> {
    photon.validate()?;
    let x = &response.detunings_mhz;
    if x.len() < 2 || x.windows(2).any(|w| w[1] <= w[0]) {
        return Err(QfcError::invalid(
            "response needs at least two strictly increasing detunings",
        ));
    }
    let eff = response.conversion();
    let (lo, hi) = (x[0], x[x.len() - 1]);

    let coverage_error = |covered: f64| {
        QfcError::Coverage(format!(
            "response grid [{lo}, {hi}] MHz holds {:.2} % of the photon spectrum",
            100.0 * covered
        ))
    };

    match photon {
        PhotonSpectrum::FlatTop { center_mhz, width_mhz } => {
            let covered = photon.mass_within(lo, hi);
            if covered < MIN_COVERAGE {
                return Err(coverage_error(covered));
            }
            let a = center_mhz - 0.5 * width_mhz;
            let b = center_mhz + 0.5 * width_mhz;
            Ok(interpolant_integral(x, &eff, a, b) / width_mhz)
        }
        PhotonSpectrum::Lorentzian { .. } | PhotonSpectrum::Gaussian { .. } => {
            let covered = photon.mass_within(lo, hi);
            if covered < MIN_COVERAGE {
                return Err(coverage_error(covered));
            }
            let weighted: Vec<f64> = x.iter().zip(&eff).map(|(d, e)| photon.density(*d) * e).collect();
            Ok(trapezoid(x, &weighted))
        }
        PhotonSpectrum::Sampled(s) => {
            let scale = match s.unit {
                AbscissaUnit::Megahertz => 1.0,
                AbscissaUnit::Gigahertz => 1e3,
                other => {
                    return Err(QfcError::invalid(format!(
                        "photon spectrum must be sampled in MHz or GHz, not {}",
                        other.suffix()
                    )))
                }
            };
            let sx: Vec<f64> = s.abscissa.iter().map(|v| v * scale).collect();
            if sx.len() < 2 {
                return Err(QfcError::invalid("sampled spectrum needs at least two points"));
            }
            if s.values.iter().any(|v| *v < 0.0) {
                return Err(QfcError::invalid("spectral density must be non-negative"));
            }
            let area = trapezoid(&sx, &s.values);
            if !(area > 0.0) {
                return Err(QfcError::invalid("sampled spectrum has zero area"));
            }
            if sx[0] < lo || sx[sx.len() - 1] > hi {
                let inside: Vec<f64> = sx
                    .iter()
                    .zip(&s.values)
                    .map(|(t, v)| if *t >= lo && *t <= hi { *v } else { 0.0 })
                    .collect();
                return Err(coverage_error(trapezoid(&sx, &inside) / area));
            }
            let weighted: Vec<f64> = sx
                .iter()
                .zip(&s.values)
                .map(|(t, v)| v * interpolate(x, &eff, *t))
                .collect();
            Ok(trapezoid(&sx, &weighted) / area)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::linspace;
    use crate::spectral::{peak_efficiency, CavityParams, PumpDrive};

    fn setup(power: f64) -> (CavityParams, PumpDrive) {
        let cav = CavityParams::new(5200.0, 70.4, 0.7).unwrap();
        let drive = PumpDrive::from_broadening(power, 0.49, 70.4).unwrap();
        (cav, drive)
    }

    #[test]
    fn narrow_photon_sees_peak() {
        let (cav, drive) = setup(140.0);
        let resp = ConversionResponse::sample(&cav, &drive, &linspace(-500.0, 500.0, 2001)).unwrap();
        let peak = peak_efficiency(&drive, 0.7).unwrap();
        let photon = PhotonSpectrum::FlatTop { center_mhz: 0.0, width_mhz: 0.01 };
        let eff = broadband_conversion_efficiency(&photon, &resp).unwrap();
        assert!((eff / peak - 1.0).abs() < 1e-6);
    }

    #[test]
    fn flat_top_wide_photon() {
        let (cav, drive) = setup(140.0);
        let resp = ConversionResponse::sample(&cav, &drive, &linspace(-2000.0, 2000.0, 40001)).unwrap();
        let photon = PhotonSpectrum::FlatTop { center_mhz: 0.0, width_mhz: 3800.0 };
        let eff = broadband_conversion_efficiency(&photon, &resp).unwrap();
        assert!((eff - 0.040).abs() < 0.001, "{eff}");
    }

    #[test]
    fn matched_lorentzians_halve_peak() {
        let (cav, drive) = setup(140.0);
        let fwhm = 70.4 * (1.0 + drive.coupling());
        let resp = ConversionResponse::sample(&cav, &drive, &linspace(-60_000.0, 60_000.0, 600_001)).unwrap();
        let photon = PhotonSpectrum::Lorentzian { center_mhz: 0.0, fwhm_mhz: fwhm };
        let eff = broadband_conversion_efficiency(&photon, &resp).unwrap();
        let peak = peak_efficiency(&drive, 0.7).unwrap();
        assert!((eff / (0.5 * peak) - 1.0).abs() < 2e-3, "{eff} vs {}", 0.5 * peak);
    }

    #[test]
    fn coverage_checked() {
        let (cav, drive) = setup(140.0);
        let resp = ConversionResponse::sample(&cav, &drive, &linspace(-500.0, 500.0, 101)).unwrap();
        let photon = PhotonSpectrum::FlatTop { center_mhz: 0.0, width_mhz: 3800.0 };
        assert!(matches!(
            broadband_conversion_efficiency(&photon, &resp),
            Err(QfcError::Coverage(_))
        ));
        let g = PhotonSpectrum::Gaussian { center_mhz: 0.0, fwhm_mhz: 100.0 };
        assert!(broadband_conversion_efficiency(&g, &resp).is_ok());
    }
}
