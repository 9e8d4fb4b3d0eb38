use cavity_qfc::spectral::{peak_efficiency, CavityParams, ConversionResponse, PumpDrive};
use cavity_qfc::stats::{
    broadband_conversion_efficiency, classical_threshold_zeta, g2_from_histogram, g2_out,
    noise_rate_for_zeta, simulate_coincidences, zeta_from_g2, PhotonSpectrum, SourceModel,
};
use cavity_qfc::quad::linspace;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn zeta_inverts_mixing(g_in in 1.001f64..50.0, frac in 0.001f64..0.999) {
        let y = 1.0 + frac * (g_in - 1.0);
        let z = zeta_from_g2(g_in, y).unwrap();
        let back = g2_out(g_in, z).unwrap();
        prop_assert!((back - y).abs() <= 1e-9 * y);
    }
}

proptest! {
    #[test]
    fn classical_bound_iff_threshold(g_in in 2.01f64..20.0, z in 0.0f64..50.0) {
        let zt = classical_threshold_zeta(g_in).unwrap();
        prop_assume!((z - zt).abs() > 1e-9 * zt);
        prop_assert_eq!(g2_out(g_in, z).unwrap() > 2.0, z > zt);
    }

    #[test]
    fn mixing_monotone_and_bounded(g_in in 1.0f64..20.0, z in 0.0f64..100.0, dz in 1e-3f64..10.0) {
        let a = g2_out(g_in, z).unwrap();
        prop_assert!(a >= 1.0 && a <= g_in);
        prop_assert!(g2_out(g_in, z + dz).unwrap() >= a);
    }

    #[test]
    fn broadband_never_beats_peak(width in 1.0f64..3000.0, center in -500.0f64..500.0, p in 1.0f64..300.0) {
        let cav = CavityParams::new(5200.0, 70.4, 0.7).unwrap();
        let drive = PumpDrive::from_broadening(p, 0.49, 70.4).unwrap();
        let resp = ConversionResponse::sample(&cav, &drive, &linspace(-3000.0, 3000.0, 6001)).unwrap();
        let photon = PhotonSpectrum::FlatTop { center_mhz: center, width_mhz: width.min(4000.0 - 2.0 * center.abs()) };
        let eff = broadband_conversion_efficiency(&photon, &resp).unwrap();
        prop_assert!(eff <= peak_efficiency(&drive, 0.7).unwrap() * (1.0 + 1e-12));
    }
}

#[test]
fn identical_seeds_identical_histograms() {
    let m = SourceModel::new(0.55, 0.05, 0.05, 0.01, 1_000_000, 99).unwrap();
    assert_eq!(simulate_coincidences(&m, 16).unwrap(), simulate_coincidences(&m, 16).unwrap());
}

#[test]
fn independent_streams_agree_statistically() {
    let m = SourceModel::new(0.55, 0.05, 0.05, 0.0, 2_000_000, 5).unwrap();
    let a = g2_from_histogram(&simulate_coincidences(&m, 20).unwrap(), m.resolution_ns).unwrap();
    let b = g2_from_histogram(&simulate_coincidences(&m.with_stream(3), 20).unwrap(), m.resolution_ns).unwrap();
    assert_ne!(a.g2, b.g2);
    let sigma = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
    assert!((a.g2 - b.g2).abs() < 4.0 * sigma);
}

#[test]
fn uncorrelated_limit() {
    let m = SourceModel::new(1e-3, 0.01, 0.01, 1.0, 10_000_000, 17).unwrap();
    let g = g2_from_histogram(&simulate_coincidences(&m, 20).unwrap(), m.resolution_ns).unwrap();
    assert!((g.g2 - 1.0).abs() < 3.0 * g.stderr, "{g:?}");
}

#[test]
fn noise_rate_sets_zeta() {
    let nu = noise_rate_for_zeta(0.55, 0.01, 2.1).unwrap();
    let m = SourceModel::new(0.55, 0.01, 0.01, nu, 10, 0).unwrap();
    assert!((m.zeta() - 2.1).abs() < 1e-12);
}
