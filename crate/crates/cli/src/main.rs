//! `jja` — analysis chain for capacitively shunted JJ arrays and fluxonium
//! qubits: normal modes, ground-capacitance extraction, fluxonium spectra
//! and coherence predictions, resonator data reduction, and probe fits.
//!
//! Exit codes: 0 success, 2 input/parse error, 3 numerical/fit failure.

// validation sites use `!(v > 0.0)` so NaN fails closed
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "jja", version, about, max_term_width = 100)]
struct Cli {
    /// Config file (key=value); defaults to $JJA_CONFIG when set.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the normal modes of an array circuit spec (JSON).
    Modes(ModesArgs),
    /// Extract the ground capacitance from a measured fundamental, or
    /// compare two extracted values.
    FitC0(FitC0Args),
    /// Fluxonium spectra, dispersive shift, dephasing, and parameter fits.
    Fluxonium {
        #[command(subcommand)]
        sub: FluxoniumCmd,
    },
    /// Resonator data reduction.
    Resonator {
        #[command(subcommand)]
        sub: ResonatorCmd,
    },
    /// Fit room-temperature probe data to the parallel-resistance model.
    ProbeFit(ProbeFitArgs),
    /// Run the verification suite and emit a pass/fail report.
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
struct ModesArgs {
    /// Array circuit spec, JSON.
    spec: PathBuf,
    /// Closed-form dispersion of the end-grounded chain instead of the
    /// full paddle-terminated solve.
    #[arg(long, conflicts_with = "grounded_numeric")]
    grounded: bool,
    /// Numeric solve of the end-grounded chain (cross-check for
    /// --grounded).
    #[arg(long)]
    grounded_numeric: bool,
    /// Also write the mode table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the JSON record here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitC0Args {
    /// Array circuit spec, JSON (its c_0 value is ignored).
    #[arg(required_unless_present = "compare")]
    spec: Option<PathBuf>,
    /// Measured fundamental frequency, GHz.
    #[arg(long, required_unless_present = "compare")]
    f1_ghz: Option<f64>,
    /// Bracket, aF, as LO,HI.
    #[arg(long, value_parser = parse_pair)]
    bracket_af: Option<(f64, f64)>,
    /// Convergence tolerance, Hz.
    #[arg(long)]
    tol_hz: Option<f64>,
    /// Relative change between two extracted values: OLD_AF NEW_AF.
    #[arg(long, num_args = 2, value_names = ["OLD_AF", "NEW_AF"])]
    compare: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum FluxoniumCmd {
    /// Transition frequencies over an external-flux sweep (CSV).
    Spectrum(SpectrumArgs),
    /// Second-order dispersive shift of the 0-1 transition.
    Chi(ChiArgs),
    /// Thermal-photon dephasing sweep over n_th (CSV).
    Dephasing(DephasingArgs),
    /// Fit (E_J, E_C, E_L) to spectroscopy points (CSV).
    Fit(FluxoniumFitArgs),
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SpectrumArgs {
    #[arg(long)]
    ej: f64,
    #[arg(long)]
    ec: f64,
    #[arg(long)]
    el: f64,
    /// Sweep start, units of 2π.
    #[arg(long, default_value_t = 0.0)]
    phi_start: f64,
    /// Sweep end, units of 2π.
    #[arg(long, default_value_t = 1.0)]
    phi_end: f64,
    #[arg(long, default_value_t = 101)]
    points: usize,
    /// Comma-separated level pairs, e.g. 01,02,03.
    #[arg(long, default_value = "01,02,03")]
    transitions: String,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct ChiArgs {
    #[arg(long)]
    ej: f64,
    #[arg(long)]
    ec: f64,
    #[arg(long)]
    el: f64,
    /// Flux bias, units of 2π.
    #[arg(long, default_value_t = 0.5)]
    phi: f64,
    /// Coupling g/2π, GHz.
    #[arg(long)]
    g_ghz: f64,
    /// Readout frequency ω_R/2π, GHz.
    #[arg(long)]
    fr_ghz: f64,
    /// Basis size; picked by the convergence tolerance when omitted.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct DephasingArgs {
    /// Resonator linewidth κ_R/2π, MHz.
    #[arg(long)]
    kappa_mhz: f64,
    /// Dispersive shift χ01/2π, MHz.
    #[arg(long)]
    chi_mhz: f64,
    #[arg(long, default_value_t = 0.0)]
    nth_min: f64,
    #[arg(long, default_value_t = 1.0)]
    nth_max: f64,
    #[arg(long, default_value_t = 101)]
    points: usize,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct FluxoniumFitArgs {
    /// Spectroscopy points CSV: phi_ext_over_2pi, transition, freq_ghz.
    points: PathBuf,
    /// Initial guesses, GHz.
    #[arg(long)]
    ej0: f64,
    #[arg(long)]
    ec0: f64,
    #[arg(long)]
    el0: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ResonatorCmd {
    /// Fit the asymmetric hanger model to one trace CSV.
    FitS21(FitS21Args),
    /// Photon number from drive power and a fitted resonance.
    Photons(PhotonsArgs),
    /// Full power-sweep reduction: per-trace fits, photon calibration,
    /// and the self-Kerr line fit.
    Kerr(KerrArgs),
}

#[derive(Args)]
struct FitS21Args {
    trace: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct PhotonsArgs {
    #[arg(long)]
    power_dbm: f64,
    #[arg(long)]
    attenuation_db: f64,
    #[arg(long)]
    f0_hz: f64,
    #[arg(long)]
    qi: f64,
    #[arg(long)]
    qe: f64,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct KerrArgs {
    /// Directory of per-power trace CSVs (power from `_p<dBm>.csv` names
    /// or `.json` sidecars).
    #[arg(long)]
    dir: PathBuf,
    /// Cold line attenuation, dB.
    #[arg(long, conflicts_with = "room_temp_atten_db")]
    attenuation_db: Option<f64>,
    /// Room-temperature line attenuation, dB; the configured correction is
    /// subtracted.
    #[arg(long)]
    room_temp_atten_db: Option<f64>,
    #[arg(long, default_value_t = 1)]
    window_before: usize,
    #[arg(long, default_value_t = 10)]
    window_after: usize,
    /// Write the (n̄, f0) points as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProbeFitArgs {
    /// Long-format CSV: n_junctions, resistance_ohm.
    dataset: PathBuf,
    /// Superconducting gap, μeV (overrides config).
    #[arg(long)]
    gap_uev: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReproduceArgs {
    /// Write the markdown report here as well as stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Superconducting gap, μeV (overrides config).
    #[arg(long)]
    gap_uev: Option<f64>,
    /// Run only the named criteria (repeatable).
    #[arg(long)]
    only: Vec<String>,
}

fn load_config(cli: &Cli) -> Result<RunConfig, jja_core::Error> {
    let path = cli
        .config
        .clone()
        .or_else(|| std::env::var_os("JJA_CONFIG").map(PathBuf::from));
    match path {
        Some(p) => RunConfig::load(&p),
        None => Ok(RunConfig::default()),
    }
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected LO,HI, got {s:?}"))?;
    let lo = a.trim().parse().map_err(|_| format!("bad number {a:?}"))?;
    let hi = b.trim().parse().map_err(|_| format!("bad number {b:?}"))?;
    Ok((lo, hi))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Modes(ref args) => commands::modes(args, &config),
        Command::FitC0(ref args) => commands::fit_c0(args, &config),
        Command::Fluxonium { ref sub } => match sub {
            FluxoniumCmd::Spectrum(args) => commands::fluxonium_spectrum(args, &config),
            FluxoniumCmd::Chi(args) => commands::fluxonium_chi(args, &config),
            FluxoniumCmd::Dephasing(args) => commands::fluxonium_dephasing(args, &config),
            FluxoniumCmd::Fit(args) => commands::fluxonium_fit(args, &config),
        },
        Command::Resonator { ref sub } => match sub {
            ResonatorCmd::FitS21(args) => commands::resonator_fit_s21(args, &config),
            ResonatorCmd::Photons(args) => commands::resonator_photons(args),
            ResonatorCmd::Kerr(args) => commands::resonator_kerr(args, &config),
        },
        Command::ProbeFit(ref args) => commands::probe_fit(args, &config),
        Command::Reproduce(ref args) => return commands::reproduce(args, &config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 3 })
        }
    }
}
