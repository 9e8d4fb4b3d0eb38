//! Coincidence-histogram Monte Carlo for a heralded thermal pair source.
//!
//! Time advances in bins of one histogram resolution, by default one
//! coincidence window wide. Both photons of a pair fall in the bin they are
//! born in, so a correlated source puts its whole excess into the zero-delay
//! bin.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, ensure_positive, ensure_unit_interval, QfcError, Result};

pub const DEFAULT_RESOLUTION_NS: f64 = 0.8;
pub const DEFAULT_WINDOW_NS: f64 = 1.6;
pub const DEFAULT_SEED: u64 = 0x5eed_2024;
/// Below this many time bins the estimator variance is flagged.
pub const MIN_RELIABLE_BINS: u64 = 10_000;

/// Time bins per RNG stream; fixes the shard plan independently of thread count.
const SHARD_BINS: u64 = 1 << 18;
const MIN_OFF_PEAK_BINS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceModel {
    /// Mean of the two-mode thermal pair number per time bin.
    pub mean_pairs_per_bin: f64,
    pub herald_efficiency: f64,
    pub signal_efficiency: f64,
    /// Poisson mean of uncorrelated noise photons on the signal arm per bin.
    pub noise_rate_per_bin: f64,
    pub bins: u64,
    pub seed: u64,
    /// Selects an independent family of streams under the same seed.
    pub stream: u32,
    pub resolution_ns: f64,
}

impl SourceModel {
    pub fn new(
        mean_pairs_per_bin: f64,
        herald_efficiency: f64,
        signal_efficiency: f64,
        noise_rate_per_bin: f64,
        bins: u64,
        seed: u64,
    ) -> Result<Self> {
        let model = Self {
            mean_pairs_per_bin,
            herald_efficiency,
            signal_efficiency,
            noise_rate_per_bin,
            bins,
            seed,
            stream: 0,
            resolution_ns: DEFAULT_WINDOW_NS,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn with_stream(mut self, stream: u32) -> Self {
        self.stream = stream;
        self
    }

    pub fn with_resolution(mut self, resolution_ns: f64) -> Result<Self> {
        self.resolution_ns = ensure_positive("resolution_ns", resolution_ns)?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("mean_pairs_per_bin", self.mean_pairs_per_bin)?;
        ensure_unit_interval("herald_efficiency", self.herald_efficiency)?;
        ensure_unit_interval("signal_efficiency", self.signal_efficiency)?;
        ensure_non_negative("noise_rate_per_bin", self.noise_rate_per_bin)?;
        ensure_positive("resolution_ns", self.resolution_ns)?;
        if self.bins == 0 {
            return Err(QfcError::invalid("bins must be >= 1"));
        }
        Ok(())
    }

    /// Ratio of detected pair photons to noise photons on the signal arm
    /// in the weak-detection limit.
    pub fn zeta(&self) -> f64 {
        self.mean_pairs_per_bin * self.signal_efficiency / self.noise_rate_per_bin
    }
}

/// Noise mean per bin that sets the signal-to-noise ratio to `zeta`.
pub fn noise_rate_for_zeta(mean_pairs_per_bin: f64, signal_efficiency: f64, zeta: f64) -> Result<f64> {
    ensure_positive("mean_pairs_per_bin", mean_pairs_per_bin)?;
    ensure_unit_interval("signal_efficiency", signal_efficiency)?;
    ensure_positive("zeta", zeta)?;
    Ok(mean_pairs_per_bin * signal_efficiency / zeta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceHistogram {
    /// Bin centres, signal time minus herald time.
    pub delay_bins_ns: Vec<f64>,
    pub counts: Vec<u64>,
    /// Mean count over every bin except zero delay.
    pub accidental_level: f64,
    pub resolution_ns: f64,
    pub herald_clicks: u64,
    pub signal_clicks: u64,
    pub bins: u64,
    /// Set when the run is too short for a trustworthy estimate.
    pub low_statistics: bool,
}

impl CoincidenceHistogram {
    /// Builds a histogram from counts on delays `-d..=d` bins.
    pub fn from_counts(counts: Vec<u64>, resolution_ns: f64) -> Result<Self> {
        ensure_positive("resolution_ns", resolution_ns)?;
        if counts.len().is_multiple_of(2) {
            return Err(QfcError::invalid("delay axis needs an odd number of bins centred on zero"));
        }
        let half = (counts.len() / 2) as i64;
        let delay_bins_ns = (-half..=half).map(|d| d as f64 * resolution_ns).collect();
        let off: Vec<u64> = counts
            .iter()
            .enumerate()
            .filter(|(i, _)| *i as i64 != half)
            .map(|(_, c)| *c)
            .collect();
        let accidental_level = if off.is_empty() {
            0.0
        } else {
            off.iter().sum::<u64>() as f64 / off.len() as f64
        };
        Ok(Self {
            delay_bins_ns,
            counts,
            accidental_level,
            resolution_ns,
            herald_clicks: 0,
            signal_clicks: 0,
            bins: 0,
            low_statistics: false,
        })
    }

    fn zero_index(&self) -> usize {
        self.counts.len() / 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct G2Record {
    pub g2: f64,
    pub stderr: f64,
    pub window_ns: f64,
    pub resolution_ns: f64,
}

impl G2Record {
    /// True when `g2` exceeds the classical bound of 2 by more than its stderr.
    pub fn nonclassical(&self) -> bool {
        self.g2 - self.stderr > 2.0
    }
}

fn stream_rng(model: &SourceModel, shard: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    rng.set_stream(((model.stream as u64) << 40) | shard);
    rng
}

/// Herald and signal click bins for one shard, in increasing order.
fn simulate_shard(model: &SourceModel, shard: u64, pairs: &Geometric) -> (Vec<u64>, Vec<u64>) {
    let start = shard * SHARD_BINS;
    let end = (start + SHARD_BINS).min(model.bins);
    let mut rng = stream_rng(model, shard);
    let miss_i = 1.0 - model.herald_efficiency;
    let miss_s = 1.0 - model.signal_efficiency;
    let p_noise = -(-model.noise_rate_per_bin).exp_m1();
    let (mut heralds, mut signals) = (Vec::new(), Vec::new());
    for t in start..end {
        let n = pairs.sample(&mut rng).min(i32::MAX as u64) as i32;
        let u_h: f64 = rng.random();
        let u_s: f64 = rng.random();
        let u_n: f64 = rng.random();
        if n > 0 && u_h < 1.0 - miss_i.powi(n) {
            heralds.push(t);
        }
        let pair_click = n > 0 && u_s < 1.0 - miss_s.powi(n);
        if pair_click || u_n < p_noise {
            signals.push(t);
        }
    }
    (heralds, signals)
}

/// Runs the source for `model.bins` time bins and histograms signal-minus-herald
/// delays over `-delay_span_bins..=delay_span_bins`. Output depends only on
/// the model, never on the number of worker threads.
pub fn simulate_coincidences(model: &SourceModel, delay_span_bins: usize) -> Result<CoincidenceHistogram> {
    model.validate()?;
    if delay_span_bins < 1 {
        return Err(QfcError::invalid("delay span must be at least one bin"));
    }
    // rand_distr counts failures before the first success: P(n) = p (1 - p)^n
    let pairs = Geometric::new(1.0 / (1.0 + model.mean_pairs_per_bin))
        .map_err(|e| QfcError::invalid(format!("thermal law: {e}")))?;
    let shards = model.bins.div_ceil(SHARD_BINS);
    let parts: Vec<(Vec<u64>, Vec<u64>)> = (0..shards)
        .into_par_iter()
        .map(|s| simulate_shard(model, s, &pairs))
        .collect();
    let heralds: Vec<u64> = parts.iter().flat_map(|p| p.0.iter().copied()).collect();
    let signals: Vec<u64> = parts.iter().flat_map(|p| p.1.iter().copied()).collect();

    let span = delay_span_bins as u64;
    let width = 2 * delay_span_bins + 1;
    let counts = heralds
        .par_chunks(4096)
        .map(|chunk| {
            let mut local = vec![0u64; width];
            let mut lo = signals.partition_point(|&s| s + span < chunk[0]);
            for &h in chunk {
                while lo < signals.len() && signals[lo] + span < h {
                    lo += 1;
                }
                for &s in signals[lo..].iter().take_while(|&&s| s <= h + span) {
                    local[(s + span - h) as usize] += 1;
                }
            }
            local
        })
        .reduce(
            || vec![0u64; width],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let mut hist = CoincidenceHistogram::from_counts(counts, model.resolution_ns)?;
    hist.herald_clicks = heralds.len() as u64;
    hist.signal_clicks = signals.len() as u64;
    hist.bins = model.bins;
    hist.low_statistics = model.bins < MIN_RELIABLE_BINS;
    Ok(hist)
}

/// Coincidences in a `window_ns` window about zero delay over the accidental
/// count expected in an equal window away from the peak.
///
/// The window spans `window_ns / resolution` bins whose centres lie in
/// `[-window/2, window/2)`; all other bins estimate the accidental level.
pub fn g2_from_histogram(h: &CoincidenceHistogram, window_ns: f64) -> Result<G2Record> {
    ensure_positive("window_ns", window_ns)?;
    let ratio = window_ns / h.resolution_ns;
    let m = ratio.round();
    if m < 1.0 || (ratio - m).abs() > 1e-9 * ratio {
        return Err(QfcError::invalid(format!(
            "window {window_ns} ns is not a whole number of {} ns bins",
            h.resolution_ns
        )));
    }
    let m = m as usize;
    let zero = h.zero_index();
    // centres d * res with -m/2 <= d < m/2
    let first = zero as i64 - (m / 2) as i64;
    let last = first + m as i64 - 1;
    if first < 0 || last as usize >= h.counts.len() {
        return Err(QfcError::invalid("window exceeds the delay axis"));
    }
    let (first, last) = (first as usize, last as usize);
    let off_bins = h.counts.len() - m;
    if off_bins < MIN_OFF_PEAK_BINS {
        return Err(QfcError::invalid(format!(
            "{off_bins} off-peak bins; at least {MIN_OFF_PEAK_BINS} required"
        )));
    }
    let peak: u64 = h.counts[first..=last].iter().sum();
    let off_total: u64 = h.counts[..first].iter().chain(&h.counts[last + 1..]).sum();
    if off_total == 0 {
        return Err(QfcError::UndefinedRatio("no accidental coincidences off the peak".into()));
    }
    let accidental = off_total as f64 / off_bins as f64 * m as f64;
    let g2 = peak as f64 / accidental;
    let stderr = g2 * (1.0 / (peak.max(1) as f64) + 1.0 / off_total as f64).sqrt();
    Ok(G2Record {
        g2,
        stderr,
        window_ns,
        resolution_ns: h.resolution_ns,
    })
}
