//! Free spectral range from the period of a scanned comb.

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use super::series::{AbscissaUnit, ScanSeries};
use super::Estimate;
use crate::error::{QfcError, Result};
use crate::spectral::bandwidth_nm_to_ghz;

/// Largest tolerated deviation of any sample step from the mean step.
const MAX_JITTER: f64 = 0.01;
const MIN_PEAK_TO_MEDIAN: f64 = 3.0;
const MIN_PERIODS: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FsrEstimate {
    /// Comb period in GHz, uncertainty one periodogram bin.
    pub fsr_ghz: Estimate,
    /// Uniform sample step after unit conversion (GHz for spectral scans, ns for time scans).
    pub step: f64,
    /// Periodogram bin width in cycles per `step` unit.
    pub bin_width: f64,
    /// One-sided periodogram, bins `0..=n/2`.
    pub power: Vec<f64>,
    pub peak_to_median: f64,
}

/// Removes the least-squares straight line through `(i, y_i)`.
pub fn detrend_linear(y: &[f64]) -> Vec<f64> {
    let n = y.len() as f64;
    if y.len() < 2 {
        return vec![0.0; y.len()];
    }
    let tbar = 0.5 * (n - 1.0);
    let ybar = y.iter().sum::<f64>() / n;
    let (mut stt, mut sty) = (0.0, 0.0);
    for (i, v) in y.iter().enumerate() {
        let t = i as f64 - tbar;
        stt += t * t;
        sty += t * (v - ybar);
    }
    let slope = sty / stt;
    y.iter()
        .enumerate()
        .map(|(i, v)| v - ybar - slope * (i as f64 - tbar))
        .collect()
}

/// Full two-sided periodogram `|X_k|^2 / n`; sums to the sample energy.
pub fn periodogram(samples: &[f64]) -> Vec<f64> {
    let n = samples.len();
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf.iter().map(|c| c.norm_sqr() / n as f64).collect()
}

/// Uniform step of the abscissa in GHz (spectral scans) or ns (time scans).
fn uniform_step(data: &ScanSeries) -> Result<f64> {
    let x = &data.abscissa;
    let n = x.len();
    let mean = (x[n - 1] - x[0]) / (n - 1) as f64;
    if let Some(w) = x
        .windows(2)
        .find(|w| ((w[1] - w[0]) - mean).abs() > MAX_JITTER * mean)
    {
        return Err(QfcError::Sampling(format!(
            "step {} deviates from mean step {mean} by more than {:.0} %",
            w[1] - w[0],
            MAX_JITTER * 100.0
        )));
    }
    match data.unit {
        AbscissaUnit::Gigahertz | AbscissaUnit::Nanosecond => Ok(mean),
        AbscissaUnit::Megahertz => Ok(mean * 1e-3),
        // the comb is periodic in frequency; map the step about the scan centre
        AbscissaUnit::Nanometer => bandwidth_nm_to_ghz(mean, 0.5 * (x[0] + x[n - 1])),
        AbscissaUnit::Milliwatt => Err(QfcError::invalid("power scans carry no comb period")),
    }
}

/// Dominant period of a uniformly sampled comb scan.
///
/// Spectral scans (nm, GHz, MHz) yield the FSR as the inverse peak
/// frequency; time-domain fringes (ns) yield it as the peak frequency.
pub fn extract_fsr(data: &ScanSeries) -> Result<FsrEstimate> {
    data.validate()?;
    let n = data.len();
    if n < 8 {
        return Err(QfcError::invalid(format!("{n} samples; at least 8 required")));
    }
    let step = uniform_step(data)?;

    let detrended = detrend_linear(&data.values);
    let energy: f64 = detrended.iter().map(|v| v * v).sum();
    let scale: f64 = data.values.iter().map(|v| v * v).sum();
    if !(energy > 1e-20 * scale) {
        return Err(QfcError::NoPeriodicity("series is constant or linear".into()));
    }

    let full = periodogram(&detrended);
    let half = n / 2;
    let power = full[..=half].to_vec();
    let search = &power[1..=half];
    let (offset, peak) = search
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let k = offset + 1;
    let mut sorted = search.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let peak_to_median = if median > 0.0 { peak / median } else { f64::INFINITY };
    if peak_to_median < MIN_PEAK_TO_MEDIAN {
        return Err(QfcError::NoPeriodicity(format!(
            "strongest bin is {peak_to_median:.2}x the median power"
        )));
    }

    let delta = if k < half {
        let (a, b, c) = (power[k - 1], power[k], power[k + 1]);
        let denom = a - 2.0 * b + c;
        if denom < 0.0 {
            (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
        } else {
            0.0
        }
    } else {
        0.0
    };
    let bin_width = 1.0 / (n as f64 * step);
    let f_peak = (k as f64 + delta) * bin_width;
    let periods = (k as f64 + delta) * (n - 1) as f64 / n as f64;
    if periods < MIN_PERIODS {
        return Err(QfcError::invalid(format!(
            "scan spans {periods:.1} periods; at least {MIN_PERIODS} required"
        )));
    }

    let fsr_ghz = match data.unit {
        AbscissaUnit::Nanosecond => Estimate::new(f_peak, bin_width),
        _ => Estimate::new(1.0 / f_peak, bin_width / (f_peak * f_peak)),
    };
    Ok(FsrEstimate {
        fsr_ghz,
        step,
        bin_width,
        power,
        peak_to_median,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::linspace;

    #[test]
    fn parseval() {
        let y: Vec<f64> = (0..257).map(|i| ((i * 37) % 101) as f64 * 0.3 - 4.0).collect();
        let d = detrend_linear(&y);
        let p = periodogram(&d);
        let e: f64 = d.iter().map(|v| v * v).sum();
        assert!((p.iter().sum::<f64>() / e - 1.0).abs() < 1e-9);
    }

    #[test]
    fn cosine_in_frequency() {
        let x = linspace(0.0, 200.0, 401);
        let y = x.iter().map(|f| 1.0 + (2.0 * std::f64::consts::PI * f / 5.2).cos()).collect();
        let s = ScanSeries::new(AbscissaUnit::Gigahertz, x, y, None).unwrap();
        let est = extract_fsr(&s).unwrap();
        assert!((est.fsr_ghz.value - 5.2).abs() < est.fsr_ghz.uncertainty);
    }

    #[test]
    fn time_domain_fringe() {
        let x = linspace(0.0, 10.0, 501);
        let y = x.iter().map(|t| (2.0 * std::f64::consts::PI * 5.2 * t).sin()).collect();
        let s = ScanSeries::new(AbscissaUnit::Nanosecond, x, y, None).unwrap();
        let est = extract_fsr(&s).unwrap();
        assert!((est.fsr_ghz.value - 5.2).abs() < est.fsr_ghz.uncertainty);
    }

    #[test]
    fn constant_has_no_period() {
        let s = ScanSeries::new(AbscissaUnit::Gigahertz, linspace(0.0, 10.0, 64), vec![3.0; 64], None).unwrap();
        assert!(matches!(extract_fsr(&s), Err(QfcError::NoPeriodicity(_))));
    }

    #[test]
    fn jitter_rejected() {
        let mut x = linspace(0.0, 10.0, 64);
        x[10] += 0.05;
        let y = x.iter().map(|v| v.sin()).collect();
        let s = ScanSeries::new(AbscissaUnit::Gigahertz, x, y, None).unwrap();
        assert!(matches!(extract_fsr(&s), Err(QfcError::Sampling(_))));
    }

    #[test]
    fn too_few_periods() {
        let x = linspace(0.0, 10.0, 64);
        let y = x.iter().map(|f| (2.0 * std::f64::consts::PI * f / 5.2).cos()).collect();
        let s = ScanSeries::new(AbscissaUnit::Gigahertz, x, y, None).unwrap();
        assert!(extract_fsr(&s).is_err());
    }
}
