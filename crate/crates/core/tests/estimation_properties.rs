use cavity_qfc::estimation::{
    detrend_linear, enhancement_factor, extract_fsr, extract_fwhm, fit_linear, fit_saturating_noise,
    periodogram, AbscissaUnit, FitResult, ScanSeries,
};
use cavity_qfc::quad::linspace;
use cavity_qfc::synthetic::{linewidth_scan, noise_scan, rng, with_relative_gaussian_noise};
use proptest::prelude::*;
use rayon::prelude::*;

fn coverage<F>(truth: &[(&str, f64)], fit: F) -> f64
where
    F: Fn(u64) -> FitResult + Sync,
{
    let trials = 200u64;
    let hits: usize = (0..trials)
        .into_par_iter()
        .map(|seed| {
            let r = fit(seed);
            truth
                .iter()
                .filter(|(k, v)| (r.value(k).unwrap() - v).abs() <= 3.0 * r.std_error(k).unwrap())
                .count()
        })
        .sum();
    hits as f64 / (trials as usize * truth.len()) as f64
}

#[test]
fn linear_fit_coverage_under_noise() {
    let powers = linspace(0.0, 250.0, 11);
    for (a, g) in [(0.49, 70.4), (0.56, 34.4)] {
        let clean = linewidth_scan(a, g, &powers).unwrap();
        let frac = coverage(&[("slope", a), ("intercept", g)], |seed| {
            let noisy = with_relative_gaussian_noise(&clean, 0.05, &mut rng(seed)).unwrap();
            fit_linear(&noisy).unwrap()
        });
        assert!(frac >= 0.95, "{frac}");
    }
}

#[test]
fn saturating_fit_coverage_under_noise() {
    let powers = linspace(10.0, 250.0, 10);
    for (an, at) in [(230.0, 1.0 / 144.0), (85.0, 1.0 / 61.0)] {
        let clean = noise_scan(an, at, 0.7, &powers).unwrap();
        let frac = coverage(&[("alpha_noise", an), ("alpha_tilde", at)], |seed| {
            let noisy = with_relative_gaussian_noise(&clean, 0.05, &mut rng(1000 + seed)).unwrap();
            fit_saturating_noise(&noisy, 0.7).unwrap()
        });
        assert!(frac >= 0.95, "{frac}");
    }
}

fn fringe(offset: f64, trend: f64) -> ScanSeries {
    let x = linspace(0.0, 150.0, 300);
    let y = x
        .iter()
        .map(|f| 2.0 + (2.0 * std::f64::consts::PI * f / 5.2).cos().powi(8) + offset + trend * f)
        .collect();
    ScanSeries::new(AbscissaUnit::Gigahertz, x, y, None).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fsr_ignores_offset_and_trend(offset in -1e3f64..1e3, trend in -1.0f64..1.0) {
        let base = extract_fsr(&fringe(0.0, 0.0)).unwrap();
        let moved = extract_fsr(&fringe(offset, trend)).unwrap();
        prop_assert!((base.fsr_ghz.value - moved.fsr_ghz.value).abs() < 1e-6 * base.fsr_ghz.value);
    }

    #[test]
    fn fwhm_ignores_shift_and_scale(shift in -300.0f64..300.0, scale in 1e-3f64..1e4) {
        let make = |dx: f64, k: f64| {
            let x = linspace(-1500.0 + dx, 1500.0 + dx, 1201);
            let y = x.iter().map(|v| k / (1.0 + (2.0 * (v - dx) / 139.0).powi(2))).collect();
            ScanSeries::new(AbscissaUnit::Megahertz, x, y, None).unwrap()
        };
        let a = extract_fwhm(&make(0.0, 1.0)).unwrap().fwhm.value;
        let b = extract_fwhm(&make(shift, scale)).unwrap().fwhm.value;
        prop_assert!((a - b).abs() < 1e-6 * a);
    }

    #[test]
    fn periodogram_conserves_energy(values in proptest::collection::vec(-1e3f64..1e3, 8..300)) {
        let d = detrend_linear(&values);
        let energy: f64 = d.iter().map(|v| v * v).sum();
        let spectral: f64 = periodogram(&d).iter().sum();
        prop_assert!((spectral - energy).abs() <= 1e-9 * energy.max(1e-300));
    }
}

#[test]
fn enhancement_scales_with_inverse_square_length() {
    let base = enhancement_factor(0.49 / 70.4, 17.3e-3, 45.0, 45.0).unwrap();
    for l in [13.26, 20.0, 90.0] {
        let e = enhancement_factor(0.49 / 70.4, 17.3e-3, 45.0, l).unwrap();
        let expect = base * (45.0 / l) * (45.0 / l);
        assert!((e / expect - 1.0).abs() < 1e-14);
    }
}
