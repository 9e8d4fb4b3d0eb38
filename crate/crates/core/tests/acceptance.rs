//! One pass/fail line per acceptance criterion. Run with `--nocapture` to
//! see the report; the test fails if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use cavity_qfc::estimation::{
    enhancement_with_finesse, extract_fsr, fit_linear, fit_saturating_noise, FitResult, ScanSeries,
};
use cavity_qfc::noise::{
    as_total_closed_form, as_total_numeric, normalized_noise_coefficient, spdc_antiresonant_suppression,
    NoiseParams,
};
use cavity_qfc::quad::linspace;
use cavity_qfc::snr::{min_finesse_for_dominance, normalized_cavity_snr_at, normalized_nocavity_snr_at};
use cavity_qfc::spectral::{
    conversion_amplitude, finesse, transmission_amplitude, CavityParams, ConversionResponse, PumpDrive,
};
use cavity_qfc::stats::{
    broadband_conversion_efficiency, g2_from_histogram, g2_out, noise_rate_for_zeta, predict_nocavity_g2,
    simulate_coincidences, zeta_from_g2, G2Record, PhotonSpectrum, SourceModel,
};
use cavity_qfc::synthetic::{
    comb_scan, linewidth_scan, noise_scan, poisson_counts, rng, with_relative_gaussian_noise,
};
use rand::Rng;
use rayon::prelude::*;

struct Report {
    lines: Vec<(bool, String)>,
}

impl Report {
    fn check(&mut self, id: u32, name: &str, checks: &[(bool, String)]) {
        let ok = checks.iter().all(|c| c.0);
        let detail: Vec<String> = checks
            .iter()
            .map(|(pass, msg)| format!("{}{msg}", if *pass { "" } else { "!! " }))
            .collect();
        let line = format!(
            "[{}] {id:>2}. {name}: {}",
            if ok { "PASS" } else { "FAIL" },
            detail.join("; ")
        );
        println!("{line}");
        self.lines.push((ok, line));
    }
}

fn within(value: f64, target: f64, tol: f64, label: &str) -> (bool, String) {
    (
        (value - target).abs() <= tol,
        format!("{label}={value:.6} (target {target} +/- {tol})"),
    )
}

fn timed(limit: Duration, elapsed: Duration) -> (bool, String) {
    (elapsed < limit, format!("runtime {:.2?} < {:?}", elapsed, limit))
}

fn unitarity(r: &mut Report) {
    let start = Instant::now();
    let cav = CavityParams::new(5200.0, 70.4, 1.0).unwrap();
    let mut g = rng(1);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let c: f64 = g.random_range(0.0..100.0);
        let d: f64 = g.random_range(-100.0..100.0);
        let drive = PumpDrive::new(c, 1.0).unwrap();
        let t = transmission_amplitude(&cav, &drive, d * 70.4).unwrap();
        let a = conversion_amplitude(&cav, &drive, d * 70.4).unwrap();
        worst = worst.max((t.norm_sqr() + a.norm_sqr() - 1.0).abs());
    }
    let elapsed = start.elapsed();
    r.check(
        1,
        "unitarity over 1e4 random points",
        &[
            (worst < 1e-12, format!("max deviation {worst:.2e} < 1e-12")),
            timed(Duration::from_secs(1), elapsed),
        ],
    );
}

fn noise_integral(r: &mut Report) {
    let cav = CavityParams::new(5200.0, 70.4, 0.7).unwrap();
    let noise = NoiseParams::from_cavity(&cav, 230.0, 1.0 / 144.0).unwrap();
    let checks: Vec<(bool, String)> = [1.0, 10.0, 100.0, 144.0, 300.0]
        .iter()
        .map(|&p| {
            let closed = as_total_closed_form(&noise, p, cav.gamma_all_ghz()).unwrap();
            let numeric = as_total_numeric(&noise, p, cav.gamma_all_ghz()).unwrap();
            let rel = (numeric / closed - 1.0).abs();
            (rel < 1e-6, format!("P={p}: rel err {rel:.1e}"))
        })
        .collect();
    r.check(2, "spectral density integral vs closed form", &checks);
}

fn snr_curves(r: &mut Report) {
    r.check(
        3,
        "normalized SNR curves",
        &[
            within(normalized_nocavity_snr_at(1.0).unwrap(), 1.0, 5e-4, "no-cavity(eta=1)"),
            within(normalized_cavity_snr_at(25.0, 0.0).unwrap(), 39.27, 5e-3, "F=25(eta->0)"),
            within(normalized_cavity_snr_at(25.0, 1.0).unwrap(), 9.82, 5e-3, "F=25(eta=1)"),
            within(normalized_cavity_snr_at(8.0 / PI, 1.0).unwrap(), 1.0, 1e-9, "F=8/pi(eta=1)"),
        ],
    );
}

fn threshold(r: &mut Report) {
    let f = min_finesse_for_dominance(1e-3).unwrap();
    r.check(4, "minimum finesse for dominance", &[within(f, 8.0 / PI, 1e-3, "F_min")]);
}

fn rel_ok(fit: &FitResult, name: &str, truth: f64) -> (bool, String) {
    let v = fit.value(name).unwrap();
    let rel = (v / truth - 1.0).abs();
    (rel <= 1e-3, format!("{name}={v:.6} rel {rel:.1e}"))
}

fn coverage(truth: &[(&str, f64)], fit: impl Fn(u64) -> FitResult + Sync) -> f64 {
    let hits: usize = (0..200u64)
        .into_par_iter()
        .map(|seed| {
            let res = fit(seed);
            truth
                .iter()
                .filter(|(k, v)| (res.value(k).unwrap() - v).abs() <= 3.0 * res.std_error(k).unwrap())
                .count()
        })
        .sum();
    hits as f64 / (200 * truth.len()) as f64
}

fn fit_recovery(r: &mut Report) {
    let start = Instant::now();
    let mut checks = Vec::new();
    let lin_powers = linspace(0.0, 250.0, 11);
    for (a, g) in [(0.49, 70.4), (0.56, 34.4)] {
        let clean = linewidth_scan(a, g, &lin_powers).unwrap();
        let fit = fit_linear(&clean).unwrap();
        checks.push(rel_ok(&fit, "slope", a));
        checks.push(rel_ok(&fit, "intercept", g));
        let frac = coverage(&[("slope", a), ("intercept", g)], |seed| {
            fit_linear(&with_relative_gaussian_noise(&clean, 0.05, &mut rng(seed)).unwrap()).unwrap()
        });
        checks.push((frac >= 0.95, format!("coverage({a},{g})={frac:.3}")));
    }
    let sat_powers = linspace(10.0, 250.0, 10);
    for (an, at) in [(230.0, 1.0 / 144.0), (85.0, 1.0 / 61.0)] {
        let clean: ScanSeries = noise_scan(an, at, 0.7, &sat_powers).unwrap();
        let fit = fit_saturating_noise(&clean, 0.7).unwrap();
        checks.push(rel_ok(&fit, "alpha_noise", an));
        checks.push(rel_ok(&fit, "alpha_tilde", at));
        let frac = coverage(&[("alpha_noise", an), ("alpha_tilde", at)], |seed| {
            let noisy = with_relative_gaussian_noise(&clean, 0.05, &mut rng(10_000 + seed)).unwrap();
            fit_saturating_noise(&noisy, 0.7).unwrap()
        });
        checks.push((frac >= 0.95, format!("coverage({an},{at:.5})={frac:.3}")));
    }
    checks.push(timed(Duration::from_secs(30), start.elapsed()));
    r.check(5, "fit recovery", &checks);
}

fn finesse_enhancement(r: &mut Report) {
    let f1 = finesse(&CavityParams::new(5200.0, 70.4, 0.7).unwrap()).unwrap();
    let f2 = finesse(&CavityParams::new(5200.0, 34.4, 0.7).unwrap()).unwrap();
    let e1 = enhancement_with_finesse(0.49 / 70.4, 17.3e-3, 45.0, 13.26, f1).unwrap();
    let e2 = enhancement_with_finesse(0.56 / 34.4, 3.6e-3, 20.0, 13.26, f2).unwrap();
    r.check(
        6,
        "finesse and enhancement",
        &[
            within(f1, 73.9, 0.1, "F(1540)"),
            within(f1, 74.0, 1.0, "F(1540) vs reported"),
            within(f2, 151.2, 0.1, "F(1522)"),
            within(f2, 151.0, 1.0, "F(1522) vs reported"),
            within(e1.factor, 18.5, 0.1, "enh(1540)"),
            within(e1.factor, 18.0, 1.0, "enh(1540) vs reported"),
            within(e1.finesse_over_pi, 23.5, 0.1, "F/pi(1540)"),
            within(e2.factor, 41.2, 0.1, "enh(1522)"),
            within(e2.factor, 41.0, 1.0, "enh(1522) vs reported"),
            within(e2.finesse_over_pi, 48.1, 0.1, "F/pi(1522)"),
        ],
    );
}

fn fsr_extraction(r: &mut Report) {
    let cav = CavityParams::new(5200.0, 70.4, 0.7).unwrap();
    let noise = NoiseParams::from_cavity(&cav, 230.0, 1.0 / 144.0).unwrap();
    let scan = comb_scan(&cav, &noise, 100.0, 1540.0, 2.0, 0.01, 0.03).unwrap();
    let clean = extract_fsr(&scan).unwrap();
    let noisy = extract_fsr(&poisson_counts(&scan, 25.0, &mut rng(2024)).unwrap()).unwrap();
    r.check(
        7,
        "FSR from comb scan",
        &[
            within(clean.fsr_ghz.value, 5.2, 0.1, "noiseless"),
            (
                (clean.fsr_ghz.uncertainty * 10.0).round() == 1.0,
                format!("bin uncertainty {:.3} GHz", clean.fsr_ghz.uncertainty),
            ),
            within(noisy.fsr_ghz.value, 5.2, 0.2, "Poisson"),
        ],
    );
}

fn g2_chain(r: &mut Report) {
    r.check(
        8,
        "g2 chain",
        &[
            within(g2_out(3.819, 2.1).unwrap(), 2.94, 0.05, "g2_out"),
            within(zeta_from_g2(3.819, 2.94).unwrap(), 2.1, 0.15, "zeta"),
            within(predict_nocavity_g2(3.819, 2.1, 18.0).unwrap(), 1.3, 0.05, "g2_nocav"),
        ],
    );
}

fn run_mc(mu: f64, nu: f64, stream: u32) -> G2Record {
    let model = SourceModel::new(mu, 0.01, 0.01, nu, 10_000_000, 2024)
        .unwrap()
        .with_stream(stream);
    let hist = simulate_coincidences(&model, 40).unwrap();
    g2_from_histogram(&hist, model.resolution_ns).unwrap()
}

fn monte_carlo(r: &mut Report) {
    let start = Instant::now();
    let mut checks = Vec::new();
    let base = run_mc(0.55, 0.0, 0);
    let target = 2.0 + 1.0 / 0.55;
    checks.push((
        (base.g2 - target).abs() <= 3.0 * base.stderr,
        format!("mu=0.55: {:.3} +/- {:.3} vs {target:.3}", base.g2, base.stderr),
    ));
    let mut stream = 1;
    for mu in [0.3, 0.55, 1.0] {
        let reference = run_mc(mu, 0.0, stream);
        stream += 1;
        for zeta in [0.5, 2.1, 5.0] {
            let nu = noise_rate_for_zeta(mu, 0.01, zeta).unwrap();
            let mixed = run_mc(mu, nu, stream);
            stream += 1;
            let predicted = g2_out(reference.g2, zeta).unwrap();
            let sigma = (mixed.stderr.powi(2) + (zeta / (zeta + 1.0) * reference.stderr).powi(2)).sqrt();
            checks.push((
                (mixed.g2 - predicted).abs() <= 3.0 * sigma,
                format!("({mu},{zeta}) {:.3} vs {predicted:.3}", mixed.g2),
            ));
        }
    }
    checks.push(timed(Duration::from_secs(120), start.elapsed()));
    r.check(9, "Monte Carlo validation", &checks);
}

fn nv_design(r: &mut Report) {
    let s = spdc_antiresonant_suppression(45.0, 5.0, 3.57).unwrap();
    r.check(
        10,
        "anti-resonant suppression",
        &[(s > 10.0, format!("factor {s:.3} > 10")), within(s, 13.6, 1.0, "factor")],
    );
}

fn noise_normalization(r: &mut Report) {
    let a = normalized_noise_coefficient(230.0, 13.26, 3.79, 0.08, 1.0).unwrap();
    let b = normalized_noise_coefficient(970.0, 45.0, 12.6, 0.09, 1.0).unwrap();
    r.check(
        11,
        "normalized noise coefficients",
        &[
            within(a, 57.2, 0.05, "1540"),
            ((a / 60.0 - 1.0).abs() <= 0.1, format!("{a:.2} within 10 % of 60")),
            within(b, 19.0, 0.05, "reference"),
            ((b / 25.0).max(25.0 / b) < 2.0, format!("{b:.2} within factor 2 of 25")),
        ],
    );
}

fn broadband(r: &mut Report) {
    let cav = CavityParams::new(5200.0, 70.4, 0.7).unwrap();
    let drive = PumpDrive::from_broadening(140.0, 0.49, 70.4).unwrap();
    let resp = ConversionResponse::sample(&cav, &drive, &linspace(-2500.0, 2500.0, 50_001)).unwrap();
    let photon = PhotonSpectrum::FlatTop { center_mhz: 0.0, width_mhz: 3800.0 };
    let eff = broadband_conversion_efficiency(&photon, &resp).unwrap();
    let ratio = eff / 0.07;
    r.check(
        12,
        "broadband efficiency",
        &[
            within(eff, 0.040, 0.001, "flat-top"),
            ((0.3..=3.0).contains(&ratio), format!("ratio to 0.07 = {ratio:.2}")),
        ],
    );
}

#[test]
fn acceptance() {
    let mut r = Report { lines: Vec::new() };
    unitarity(&mut r);
    noise_integral(&mut r);
    snr_curves(&mut r);
    threshold(&mut r);
    fit_recovery(&mut r);
    finesse_enhancement(&mut r);
    fsr_extraction(&mut r);
    g2_chain(&mut r);
    monte_carlo(&mut r);
    nv_design(&mut r);
    noise_normalization(&mut r);
    broadband(&mut r);
    let failed: Vec<&String> = r.lines.iter().filter(|l| !l.0).map(|l| &l.1).collect();
    println!("{} of {} criteria passed", r.lines.len() - failed.len(), r.lines.len());
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.iter().map(|s| s.as_str()).collect::<Vec<_>>().join("\n"));
}
