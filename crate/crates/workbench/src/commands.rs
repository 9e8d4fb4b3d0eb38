use std::path::{Path, PathBuf};

use cavity_qfc::estimation::{
    enhancement_factor, extract_fsr, fit_linear, fit_saturating_noise, AbscissaUnit, FitResult, ScanSeries,
};
use cavity_qfc::noise::{normalized_noise_coefficient, spdc_antiresonant_suppression};
use cavity_qfc::quad::linspace;
use cavity_qfc::snr::{
    low_power_snr_gain, min_finesse_for_dominance, normalized_snr_curves, snr_config_table,
};
use cavity_qfc::spectral::{finesse, peak_efficiency, power_broadened_fwhm, ConversionResponse};
use cavity_qfc::stats::{
    classical_threshold_zeta, g2_from_histogram, g2_out, noise_rate_for_zeta, predict_nocavity_g2,
    simulate_coincidences, zeta_from_g2, CoincidenceHistogram, SourceModel,
};
use cavity_qfc::synthetic::{
    comb_scan, linewidth_scan, noise_scan, poisson_counts, rng, with_relative_gaussian_noise,
};
use clap::ValueEnum;

use crate::error::{CliError, CliResult};
use crate::input::{read_series, read_table};
use crate::output::{Cell, Document};
use crate::params::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitModel {
    /// Linewidth versus pump power, linear.
    Fwhm,
    /// Anti-Stokes counts versus pump power, saturating.
    Noise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SnrMode {
    Curves,
    Table,
    MinFinesse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DatasetKind {
    Fwhm,
    Noise,
    Comb,
    Histogram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum G2Mode {
    Analytic,
    Mc,
    Histogram,
}

pub struct Context {
    pub params: Params,
    pub input: Option<PathBuf>,
    pub seed: u64,
}

impl Context {
    fn input(&self) -> CliResult<&Path> {
        self.input
            .as_deref()
            .ok_or_else(|| CliError::Usage("this command needs --input".into()))
    }

    fn provenance(&self, doc: &mut Document, keys: &[&str]) {
        doc.meta("preset", self.params.preset().name.label());
        for (k, v) in self.params.effective(keys) {
            doc.meta(&k, v);
        }
    }
}

const CAVITY_KEYS: &[&str] = &["fsr_MHz", "gamma_all_MHz", "gamma_r", "alpha_tilde_per_mW"];

pub fn model(ctx: &Context, powers: &[f64]) -> CliResult<Document> {
    let p = &ctx.params;
    let cav = p.cavity()?;
    let span = p.get("span_MHz", 2000.0);
    let points = p.count("points", 2001)?;
    if points < 2 {
        return Err(CliError::Usage("points must be at least 2".into()));
    }
    let detunings = linspace(-0.5 * span, 0.5 * span, points);

    let mut doc = Document::new("model");
    ctx.provenance(&mut doc, CAVITY_KEYS);
    doc.meta("span_MHz", span).meta("points", points as f64);
    doc.columns(&["power_mW", "detuning_MHz", "transmission", "conversion"]);
    for &power in powers {
        let drive = p.drive(power)?;
        let fwhm = power_broadened_fwhm(&cav, &drive)?;
        if span < 6.0 * fwhm {
            return Err(cavity_qfc::QfcError::InvalidArgument(format!(
                "span {span} MHz covers fewer than 6 linewidths ({fwhm:.1} MHz at {power} mW)"
            ))
            .into());
        }
        doc.meta(&format!("fwhm_MHz_at_{power}_mW"), fwhm);
        let resp = ConversionResponse::sample(&cav, &drive, &detunings)?;
        for ((d, t), r) in detunings.iter().zip(resp.transmission()).zip(resp.conversion()) {
            doc.row(vec![power.into(), (*d).into(), t.into(), r.into()]);
        }
    }
    Ok(doc)
}

fn fit_document(doc: &mut Document, fit: &FitResult, names: &[(&str, &str)]) {
    for (key, label) in names {
        doc.meta(label, fit.value(key).unwrap_or(f64::NAN));
        doc.meta(&format!("{label}_stderr"), fit.std_error(key).unwrap_or(f64::NAN));
    }
    doc.meta("residual_norm", fit.residual_norm)
        .meta("iterations", fit.iterations as u64);
    doc.flag("converged", fit.converged);
}

pub fn fit(ctx: &Context, model: FitModel) -> CliResult<Document> {
    let path = ctx.input()?;
    let data = read_series(path)?;
    if data.unit != AbscissaUnit::Milliwatt {
        return Err(CliError::parse(1, "fit input must have a power_mW first column"));
    }
    let mut doc = Document::new("fit");
    doc.meta("input", path.display().to_string().as_str());
    doc.meta("points", data.len() as u64);
    let (fit, predict): (FitResult, Box<dyn Fn(f64) -> f64>) = match model {
        FitModel::Fwhm => {
            doc.meta("model", "fwhm");
            let fit = fit_linear(&data)?;
            fit_document(
                &mut doc,
                &fit,
                &[("slope", "alpha_MHz_per_mW"), ("intercept", "gamma_all_MHz")],
            );
            let (a, b) = (fit.value("slope").unwrap(), fit.value("intercept").unwrap());
            (fit, Box::new(move |x| a * x + b))
        }
        FitModel::Noise => {
            doc.meta("model", "noise");
            let g = ctx.params.get("gamma_r", 0.7);
            doc.meta("gamma_r", g);
            let fit = fit_saturating_noise(&data, g)?;
            fit_document(
                &mut doc,
                &fit,
                &[("alpha_noise", "alpha_noise_cps_per_mW"), ("alpha_tilde", "alpha_tilde_per_mW")],
            );
            let (a, t) = (fit.value("alpha_noise").unwrap(), fit.value("alpha_tilde").unwrap());
            (fit, Box::new(move |x| g * a * x / (2.0 * (1.0 + t * x))))
        }
    };
    if !fit.converged {
        return Err(cavity_qfc::QfcError::NumericFailure {
            message: "fit did not converge".into(),
            iterations: fit.iterations,
        }
        .into());
    }
    doc.columns(&["power_mW", "measured", "fitted", "residual"]);
    for (x, y) in data.abscissa.iter().zip(&data.values) {
        let m = predict(*x);
        doc.row(vec![(*x).into(), (*y).into(), m.into(), (y - m).into()]);
    }
    Ok(doc)
}

pub fn snr(ctx: &Context, mode: SnrMode, finesses: &[f64]) -> CliResult<Document> {
    let p = &ctx.params;
    let mut doc = Document::new("snr");
    match mode {
        SnrMode::Curves => {
            let grid = p.count("grid", 256)?;
            doc.meta("mode", "curves").meta("grid", grid as u64);
            doc.columns(&["curve", "finesse", "efficiency", "snr"]);
            let mut free = None;
            for &f in finesses {
                let (cav, nocav) = normalized_snr_curves(f, grid)?;
                for (e, s) in cav.efficiencies.iter().zip(&cav.snr_values) {
                    doc.row(vec!["cavity".into(), f.into(), (*e).into(), (*s).into()]);
                }
                free = Some(nocav);
            }
            if let Some(nocav) = free {
                for (e, s) in nocav.efficiencies.iter().zip(&nocav.snr_values) {
                    doc.row(vec!["no_cavity".into(), f64::NAN.into(), (*e).into(), (*s).into()]);
                }
            }
        }
        SnrMode::Table => {
            let f_c = p.get("finesse_c", finesse(&p.cavity()?)?);
            let f_s = p.get("finesse_s", 1.0);
            let t = snr_config_table(f_c, f_s)?;
            doc.meta("mode", "table").meta("finesse_c", f_c).meta("finesse_s", f_s);
            doc.columns(&["band", "no_cavity", "converted_mode", "signal_mode"]);
            for (band, row) in [("fsr", t.fsr_row), ("fwhm", t.fwhm_row)] {
                let mut cells = vec![Cell::from(band)];
                cells.extend(row.iter().map(|v| Cell::Num(*v)));
                doc.row(cells);
            }
        }
        SnrMode::MinFinesse => {
            let tol = p.get("tolerance", 1e-3);
            doc.meta("mode", "min-finesse").meta("tolerance", tol);
            doc.meta("min_finesse", min_finesse_for_dominance(tol)?);
        }
    }
    Ok(doc)
}

pub fn fsr(ctx: &Context) -> CliResult<Document> {
    let path = ctx.input()?;
    let data = read_series(path)?;
    let est = extract_fsr(&data)?;
    let mut doc = Document::new("fsr");
    doc.meta("input", path.display().to_string().as_str())
        .meta("abscissa_unit", data.unit.suffix())
        .meta("fsr_GHz", est.fsr_ghz.value)
        .meta("fsr_uncertainty_GHz", est.fsr_ghz.uncertainty)
        .meta("peak_to_median", est.peak_to_median);
    let (step_col, freq_col) = match data.unit {
        AbscissaUnit::Nanosecond => ("step_ns", "frequency_GHz"),
        _ => ("step_GHz", "frequency_per_GHz"),
    };
    doc.meta(step_col, est.step);
    doc.columns(&["bin", freq_col, "power"]);
    for (k, pw) in est.power.iter().enumerate() {
        doc.row(vec![(k as u64).into(), (k as f64 * est.bin_width).into(), (*pw).into()]);
    }
    Ok(doc)
}

fn series_rows(doc: &mut Document, series: &ScanSeries, x_name: &str, y_name: &str) {
    match &series.sigma {
        Some(sigma) => {
            doc.columns(&[x_name, y_name, "sigma"]);
            for ((x, y), s) in series.abscissa.iter().zip(&series.values).zip(sigma) {
                doc.row(vec![(*x).into(), (*y).into(), (*s).into()]);
            }
        }
        None => {
            doc.columns(&[x_name, y_name]);
            for (x, y) in series.abscissa.iter().zip(&series.values) {
                doc.row(vec![(*x).into(), (*y).into()]);
            }
        }
    }
}

fn source_model(ctx: &Context) -> CliResult<SourceModel> {
    let p = &ctx.params;
    let mu = p.get("mu", 0.55);
    let eta_s = p.get("signal_eff", 0.01);
    let nu = match p.get_opt("zeta") {
        Some(z) => noise_rate_for_zeta(mu, eta_s, z)?,
        None => 0.0,
    };
    let bins = p.count("bins", 10_000_000)? as u64;
    let model = SourceModel::new(mu, p.get("herald_eff", 0.01), eta_s, nu, bins, ctx.seed)?;
    Ok(match p.get_opt("window_ns") {
        Some(w) => model.with_resolution(w)?,
        None => model,
    })
}

pub fn generate(ctx: &Context, kind: DatasetKind) -> CliResult<Document> {
    let p = &ctx.params;
    let mut doc = Document::new("generate");
    let mut rand = rng(ctx.seed);
    let noise_rel = p.get("noise_rel", 0.0);
    let add_noise = |s: ScanSeries, rand: &mut _| -> CliResult<ScanSeries> {
        if noise_rel > 0.0 {
            Ok(with_relative_gaussian_noise(&s, noise_rel, rand)?)
        } else {
            Ok(s)
        }
    };
    doc.meta("seed", ctx.seed);
    match kind {
        DatasetKind::Fwhm => {
            let powers = linspace(p.get("p_min_mW", 0.0), p.get("p_max_mW", 250.0), p.count("points", 11)?);
            doc.meta("kind", "fwhm");
            ctx.provenance(&mut doc, &["alpha_MHz_per_mW", "gamma_all_MHz"]);
            doc.meta("noise_rel", noise_rel);
            let s = linewidth_scan(p.get("alpha_MHz_per_mW", 0.0), p.get("gamma_all_MHz", 0.0), &powers)?;
            series_rows(&mut doc, &add_noise(s, &mut rand)?, "power_mW", "fwhm_MHz");
        }
        DatasetKind::Noise => {
            let powers = linspace(p.get("p_min_mW", 10.0), p.get("p_max_mW", 250.0), p.count("points", 10)?);
            doc.meta("kind", "noise");
            ctx.provenance(&mut doc, &["alpha_noise_cps_per_mW", "alpha_tilde_per_mW", "gamma_r"]);
            doc.meta("noise_rel", noise_rel);
            let s = noise_scan(
                p.get("alpha_noise_cps_per_mW", 0.0),
                p.get("alpha_tilde_per_mW", 0.0),
                p.get("gamma_r", 0.0),
                &powers,
            )?;
            series_rows(&mut doc, &add_noise(s, &mut rand)?, "power_mW", "counts_cps");
        }
        DatasetKind::Comb => {
            let power = p.get("power_mW", 100.0);
            let (center, span, step, filter) = (
                p.get("signal_nm", 1540.0),
                p.get("span_nm", 2.0),
                p.get("step_nm", 0.01),
                p.get("filter_nm", 0.03),
            );
            let mean_counts = p.get("mean_counts", 0.0);
            doc.meta("kind", "comb");
            ctx.provenance(&mut doc, &["fsr_MHz", "gamma_all_MHz", "gamma_r", "alpha_tilde_per_mW", "alpha_noise_cps_per_mW"]);
            doc.meta("power_mW", power)
                .meta("center_nm", center)
                .meta("span_nm", span)
                .meta("step_nm", step)
                .meta("filter_nm", filter)
                .meta("mean_counts", mean_counts);
            let mut s = comb_scan(&p.cavity()?, &p.noise()?, power, center, span, step, filter)?;
            if mean_counts > 0.0 {
                s = poisson_counts(&s, mean_counts, &mut rand)?;
            }
            series_rows(&mut doc, &s, "wavelength_nm", "counts");
        }
        DatasetKind::Histogram => {
            let model = source_model(ctx)?;
            let span = p.count("delay_span", 40)?;
            let h = simulate_coincidences(&model, span)?;
            doc.meta("kind", "histogram")
                .meta("mu", model.mean_pairs_per_bin)
                .meta("herald_eff", model.herald_efficiency)
                .meta("signal_eff", model.signal_efficiency)
                .meta("noise_per_bin", model.noise_rate_per_bin)
                .meta("bins", model.bins)
                .meta("resolution_ns", h.resolution_ns)
                .meta("herald_clicks", h.herald_clicks)
                .meta("signal_clicks", h.signal_clicks);
            doc.flag("low_statistics", h.low_statistics);
            doc.columns(&["delay_ns", "coincidences"]);
            for (d, c) in h.delay_bins_ns.iter().zip(&h.counts) {
                doc.row(vec![(*d).into(), (*c).into()]);
            }
        }
    }
    Ok(doc)
}

fn read_histogram(path: &Path) -> CliResult<CoincidenceHistogram> {
    let table = read_table(path)?;
    let d = table
        .find(|h| h == "delay_ns")
        .ok_or_else(|| CliError::parse(1, "histogram needs a delay_ns column"))?;
    let c = table
        .find(|h| h == "coincidences")
        .ok_or_else(|| CliError::parse(1, "histogram needs a coincidences column"))?;
    let delays = table.column(d);
    let mut counts = Vec::with_capacity(delays.len());
    for (line, row) in &table.rows {
        let v = row[c];
        if v < 0.0 || v.fract() != 0.0 {
            return Err(CliError::parse(*line, format!("coincidence count {v} is not a whole number")));
        }
        counts.push(v as u64);
    }
    if delays.len() < 3 || delays.len().is_multiple_of(2) {
        return Err(CliError::parse(1, "delay axis needs an odd number of bins centred on zero"));
    }
    let res = (delays[delays.len() - 1] - delays[0]) / (delays.len() - 1) as f64;
    let mid = delays.len() / 2;
    let uniform = delays
        .iter()
        .enumerate()
        .all(|(i, t)| (t - (i as f64 - mid as f64) * res).abs() <= 1e-9 * res.abs().max(1.0));
    if !(res > 0.0) || !uniform {
        return Err(CliError::parse(1, "delay axis must be uniform and centred on zero"));
    }
    Ok(CoincidenceHistogram::from_counts(counts, res)?)
}

pub fn g2(ctx: &Context, mode: G2Mode) -> CliResult<Document> {
    let p = &ctx.params;
    let mut doc = Document::new("g2");
    match mode {
        G2Mode::Analytic => {
            let g_in = p.get("g2_in", 3.819);
            let zeta = match p.get_opt("g2_measured") {
                Some(g) => zeta_from_g2(g_in, g)?,
                None => p.get("zeta", 2.1),
            };
            let enh = p.get("enhancement", 18.0);
            let out = g2_out(g_in, zeta)?;
            doc.meta("mode", "analytic")
                .meta("g2_in", g_in)
                .meta("zeta", zeta)
                .meta("enhancement", enh)
                .meta("g2_out", out)
                .meta("g2_nocav", predict_nocavity_g2(g_in, zeta, enh)?);
            if g_in > 2.0 {
                doc.meta("zeta_classical_threshold", classical_threshold_zeta(g_in)?);
            }
            doc.flag("nonclassical", out > 2.0);
        }
        G2Mode::Mc | G2Mode::Histogram => {
            let (h, expected) = if mode == G2Mode::Mc {
                let model = source_model(ctx)?;
                let h = simulate_coincidences(&model, p.count("delay_span", 40)?)?;
                let pure = 2.0 + 1.0 / model.mean_pairs_per_bin;
                let expected = match p.get_opt("zeta") {
                    Some(z) => g2_out(pure, z)?,
                    None => pure,
                };
                doc.meta("mode", "mc")
                    .meta("seed", ctx.seed)
                    .meta("mu", model.mean_pairs_per_bin)
                    .meta("herald_eff", model.herald_efficiency)
                    .meta("signal_eff", model.signal_efficiency)
                    .meta("noise_per_bin", model.noise_rate_per_bin)
                    .meta("bins", model.bins);
                doc.flag("low_statistics", h.low_statistics);
                (h, Some(expected))
            } else {
                let path = ctx.input()?;
                doc.meta("mode", "histogram").meta("input", path.display().to_string().as_str());
                (read_histogram(path)?, None)
            };
            let window = p.get("window_ns", h.resolution_ns);
            let rec = g2_from_histogram(&h, window)?;
            doc.meta("window_ns", rec.window_ns)
                .meta("resolution_ns", rec.resolution_ns)
                .meta("accidental_level", h.accidental_level)
                .meta("g2", rec.g2)
                .meta("g2_stderr", rec.stderr);
            if let Some(e) = expected {
                doc.meta("g2_analytic", e).meta("deviation_sigma", (rec.g2 - e) / rec.stderr);
            }
            doc.flag("nonclassical", rec.nonclassical());
            doc.columns(&["delay_ns", "coincidences"]);
            for (d, c) in h.delay_bins_ns.iter().zip(&h.counts) {
                doc.row(vec![(*d).into(), (*c).into()]);
            }
        }
    }
    Ok(doc)
}

pub fn design(ctx: &Context) -> CliResult<Document> {
    let p = &ctx.params;
    let cav = p.cavity()?;
    let f = finesse(&cav)?;
    let alpha_tilde = p.get("alpha_tilde_per_mW", 0.0);
    let drive = p.drive(1.0 / alpha_tilde)?;
    let bpf = p.get("bpf_GHz", 0.0);
    let mut doc = Document::new("design");
    ctx.provenance(
        &mut doc,
        &["fsr_MHz", "gamma_all_MHz", "gamma_r", "alpha_tilde_per_mW", "alpha_noise_cps_per_mW", "bpf_GHz", "length_mm", "t_circ"],
    );
    let suppression = spdc_antiresonant_suppression(f, cav.fsr_ghz(), bpf.min(cav.fsr_ghz()))?;
    doc.meta("finesse", f)
        .meta("finesse_over_pi", f / std::f64::consts::PI)
        .meta("low_power_snr_gain", low_power_snr_gain(f)?)
        .meta("min_finesse_for_dominance", min_finesse_for_dominance(1e-3)?)
        .meta("impedance_matching_power_mW", 1.0 / alpha_tilde)
        .meta("peak_efficiency", peak_efficiency(&drive, cav.gamma_r_ratio)?)
        .meta("antiresonant_suppression", suppression);
    doc.flag("over_tenfold", suppression > 10.0);
    doc.meta(
        "normalized_noise_cps_per_mm_GHz_mW",
        normalized_noise_coefficient(
            p.get("alpha_noise_cps_per_mW", 0.0),
            p.get("length_mm", 0.0),
            bpf,
            p.get("t_circ", 0.0),
            1.0,
        )?,
    );
    if let (Some(b), Some(l)) = (p.get_opt("b_ref_per_mW"), p.get_opt("l_ref_mm")) {
        doc.meta("b_ref_per_mW", b).meta("l_ref_mm", l).meta(
            "enhancement_factor",
            enhancement_factor(alpha_tilde, b, l, p.get("length_mm", 0.0))?,
        );
    }
    Ok(doc)
}
