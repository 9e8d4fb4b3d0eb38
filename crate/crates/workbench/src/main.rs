//! `qfc`: model, fit and design workbench for cavity-enhanced frequency conversion.

mod commands;
mod error;
mod input;
mod output;
mod params;

use std::path::PathBuf;
use std::process::ExitCode;

use cavity_qfc::presets::PresetName;
use cavity_qfc::stats::DEFAULT_SEED;
use clap::{Args, Parser, Subcommand};

use commands::{Context, DatasetKind, FitModel, G2Mode, SnrMode};
use error::{CliError, CliResult};
use output::{emit, Format};

#[derive(Parser)]
#[command(name = "qfc", version, about, after_help = schema_help())]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Input data file (CSV, `#` comment lines allowed).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value = "1540", value_parser = ["1540", "1522", "nv"])]
    preset: String,
    /// Parameter override, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Transmission and conversion spectra versus detuning.
    Model {
        #[command(flatten)]
        common: Common,
        /// Pump powers in mW.
        #[arg(long, value_delimiter = ',', default_value = "33.3,94.0,148")]
        power: Vec<f64>,
    },
    /// Fit a linewidth or anti-Stokes power scan.
    Fit {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        model: FitModel,
    },
    /// Normalized SNR curves, configuration table or minimum finesse.
    Snr {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = SnrMode::Curves)]
        mode: SnrMode,
        /// Cold finesse values for the cavity curves.
        #[arg(long, value_delimiter = ',', default_value = "2.5464790894703255,25")]
        finesse: Vec<f64>,
    },
    /// Comb period from a wavelength, frequency or delay scan.
    Fsr {
        #[command(flatten)]
        common: Common,
    },
    /// Deterministic synthetic datasets.
    Generate {
        #[command(flatten)]
        common: Common,
        #[arg(value_enum)]
        kind: DatasetKind,
    },
    /// Correlation predictions, Monte Carlo, or estimates from a histogram.
    G2 {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = G2Mode::Analytic)]
        mode: G2Mode,
    },
    /// Derived design figures for the selected preset.
    Design {
        #[command(flatten)]
        common: Common,
    },
}

fn schema_help() -> String {
    let mut s = String::from("Parameters (--param KEY=VALUE):\n");
    for (k, d) in params::SCHEMA {
        s.push_str(&format!("  {k:<24} {d}\n"));
    }
    s.push_str("\nExit status: 0 ok, 2 usage, 3 parse error, 4 domain error, 5 numeric failure, 6 io error.");
    s
}

fn run(cli: Cli) -> CliResult<()> {
    let (common, default_format) = match &cli.command {
        Command::Fit { common, .. } => (common, Format::Json),
        Command::Model { common, .. }
        | Command::Snr { common, .. }
        | Command::Fsr { common }
        | Command::Generate { common, .. }
        | Command::G2 { common, .. }
        | Command::Design { common } => (common, Format::Csv),
    };
    let preset = PresetName::parse(&common.preset)
        .ok_or_else(|| CliError::Usage(format!("unknown preset {}", common.preset)))?;
    let ctx = Context {
        params: params::Params::new(preset, &common.params)?,
        input: common.input.clone(),
        seed: common.seed,
    };
    let doc = match &cli.command {
        Command::Model { power, .. } => commands::model(&ctx, power)?,
        Command::Fit { model, .. } => commands::fit(&ctx, *model)?,
        Command::Snr { mode, finesse, .. } => commands::snr(&ctx, *mode, finesse)?,
        Command::Fsr { .. } => commands::fsr(&ctx)?,
        Command::Generate { kind, .. } => commands::generate(&ctx, *kind)?,
        Command::G2 { mode, .. } => commands::g2(&ctx, *mode)?,
        Command::Design { .. } => commands::design(&ctx)?,
    };
    let bytes = doc.render(common.format.unwrap_or(default_format))?;
    emit(&bytes, common.output.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qfc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
