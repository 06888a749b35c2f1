use std::f64::consts::TAU;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use jja_core::circuit::ArrayCircuitSpec;
use jja_core::fluxonium::{self, FluxoniumParams, SpectroscopyPoint};
use jja_core::modes;
use jja_core::probe;
use jja_core::reproduce;
use jja_core::resonator::{self, HangerFit, KerrWindow};
use jja_core::units::{ghz_to_rad_s, ATTOFARAD};
use jja_core::{Error, Result};
use serde_json::json;

use crate::config::RunConfig;
use crate::{
    ChiArgs, DephasingArgs, FitC0Args, FitS21Args, FluxoniumFitArgs, KerrArgs, ModesArgs,
    PhotonsArgs, ProbeFitArgs, ReproduceArgs, SpectrumArgs,
};

fn read_spec(path: &Path) -> Result<ArrayCircuitSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn resolved(out: &Option<PathBuf>, config: &RunConfig) -> Option<PathBuf> {
    out.as_ref().map(|p| config.resolve_out(p))
}

fn emit_json(value: &serde_json::Value, out: &Option<PathBuf>) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    match out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn write_csv_or_stdout(path: &Option<PathBuf>, content: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, content)?,
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
        }
    }
    Ok(())
}

pub fn modes(args: &ModesArgs, config: &RunConfig) -> Result<()> {
    let spec = read_spec(&args.spec)?;
    let n = spec.n_junctions;

    let (label, freqs_ghz, n_zero_modes): (&str, Vec<f64>, usize) = if args.grounded {
        let f = (1..n)
            .map(|k| modes::analytic_dispersion(k, &spec) / (TAU * 1e9))
            .collect();
        ("grounded-analytic", f, 0)
    } else if args.grounded_numeric {
        let s = modes::solve_grounded_chain(&spec)?;
        let f = s.frequencies.iter().map(|w| w / (TAU * 1e9)).collect();
        ("grounded-numeric", f, s.n_zero_modes)
    } else {
        let c = jja_core::build_capacitance_matrix(&spec)?;
        let m = jja_core::build_inverse_inductance_matrix(&spec)?;
        let s = modes::solve_modes(&c, &m, config.zero_mode_threshold_rad_s())?;
        let f = s.frequencies.iter().map(|w| w / (TAU * 1e9)).collect();
        ("full", f, s.n_zero_modes)
    };

    if let Some(csv_path) = &resolved(&args.csv, config) {
        let mut w = csv::Writer::from_path(csv_path)
            .map_err(|e| Error::Parse(format!("{}: {e}", csv_path.display())))?;
        w.write_record(["mode_index", "freq_ghz"])
            .map_err(|e| Error::Parse(e.to_string()))?;
        for (i, f) in freqs_ghz.iter().enumerate() {
            w.write_record([format!("{}", i + 1), format!("{f:.9}")])
                .map_err(|e| Error::Parse(e.to_string()))?;
        }
        w.flush()?;
    }

    emit_json(
        &json!({
            "n_junctions": n,
            "solver": label,
            "n_zero_modes": n_zero_modes,
            "frequencies_ghz": freqs_ghz,
        }),
        &resolved(&args.out, config),
    )
}

pub fn fit_c0(args: &FitC0Args, config: &RunConfig) -> Result<()> {
    if let Some(pair) = &args.compare {
        let (old_af, new_af) = (pair[0], pair[1]);
        if old_af == 0.0 {
            return Err(Error::InvalidInput("old value must be nonzero".into()));
        }
        let rel = (new_af - old_af) / old_af;
        return emit_json(
            &json!({
                "old_af": old_af,
                "new_af": new_af,
                "relative_change": (rel * 100.0).round() / 100.0,
                "relative_change_exact": rel,
            }),
            &resolved(&args.out, config),
        );
    }

    let spec = read_spec(args.spec.as_ref().expect("clap enforces spec"))?;
    let f1_hz = args.f1_ghz.expect("clap enforces f1") * 1e9;
    let bracket = args
        .bracket_af
        .map(|(lo, hi)| (lo * ATTOFARAD, hi * ATTOFARAD))
        .unwrap_or_else(|| config.c0_bracket_farad());
    let tol = args.tol_hz.unwrap_or(config.c0_tol_hz);

    let fit = modes::fit_c0(f1_hz, &spec, bracket, tol).map_err(|e| match e {
        Error::Bracket(msg) => {
            Error::Bracket(format!("{msg}; widen the search with --bracket-af LO,HI"))
        }
        other => other,
    })?;

    emit_json(
        &json!({
            "n_junctions": spec.n_junctions,
            "c0_af": fit.c_0 / ATTOFARAD,
            "residual_hz": fit.residual_hz,
            "iterations": fit.iterations,
            "bracket_af": [fit.bracket.0 / ATTOFARAD, fit.bracket.1 / ATTOFARAD],
        }),
        &resolved(&args.out, config),
    )
}

fn parse_transition(s: &str) -> Result<(usize, usize)> {
    let digits: Vec<u32> = s.trim().chars().filter_map(|c| c.to_digit(10)).collect();
    if digits.len() != 2 || s.trim().len() != 2 {
        return Err(Error::Parse(format!(
            "transition must be two digits like \"01\", got {s:?}"
        )));
    }
    Ok((digits[0] as usize, digits[1] as usize))
}

pub fn fluxonium_spectrum(args: &SpectrumArgs, config: &RunConfig) -> Result<()> {
    let params = FluxoniumParams::new(args.ej, args.ec, args.el, 0.0)?;
    let transitions: Vec<(usize, usize)> = args
        .transitions
        .split(',')
        .map(parse_transition)
        .collect::<Result<_>>()?;
    if args.points < 2 {
        return Err(Error::InvalidInput("need at least 2 sweep points".into()));
    }
    let phis: Vec<f64> = (0..args.points)
        .map(|i| {
            TAU * (args.phi_start
                + (args.phi_end - args.phi_start) * i as f64 / (args.points - 1) as f64)
        })
        .collect();
    let table = fluxonium::spectrum_sweep(&params, &phis, &transitions)?;

    let mut out = String::from("phi_ext_over_2pi");
    for (i, j) in &table.transitions {
        out.push_str(&format!(",f_{i}{j}_ghz"));
    }
    out.push('\n');
    for (p, row) in table.phi_ext.iter().zip(&table.frequencies_ghz) {
        out.push_str(&format!("{:.9}", p / TAU));
        for f in row {
            out.push_str(&format!(",{f:.9}"));
        }
        out.push('\n');
    }
    write_csv_or_stdout(&resolved(&args.csv, config), &out)
}

pub fn fluxonium_chi(args: &ChiArgs, config: &RunConfig) -> Result<()> {
    let params = FluxoniumParams::new(args.ej, args.ec, args.el, TAU * args.phi)?;
    let dim = match args.dim {
        Some(d) => d,
        None => fluxonium::converged_dim(&params, config.fluxonium_convergence_ghz())?
            .max(2 * (fluxonium::DISPERSIVE_LEVEL_CUTOFF + 1)),
    };
    let shift = fluxonium::dispersive_shift(
        &params,
        ghz_to_rad_s(args.g_ghz),
        ghz_to_rad_s(args.fr_ghz),
        dim,
    )?;
    emit_json(
        &json!({
            "chi01_rad_per_s": shift.chi_01,
            "chi01_over_2pi_mhz": shift.chi_01 / TAU / 1e6,
            "truncation_remainder_over_2pi_mhz": shift.remainder / TAU / 1e6,
            "level_cutoff": shift.level_cutoff,
            "dim_used": shift.dim_used,
        }),
        &resolved(&args.out, config),
    )
}

pub fn fluxonium_dephasing(args: &DephasingArgs, config: &RunConfig) -> Result<()> {
    if args.points < 2 {
        return Err(Error::InvalidInput("need at least 2 sweep points".into()));
    }
    let mut out = String::from("n_th,gamma_phi_rad_per_s,t_phi_us\n");
    for i in 0..args.points {
        let n_th =
            args.nth_min + (args.nth_max - args.nth_min) * i as f64 / (args.points - 1) as f64;
        let d = fluxonium::thermal_dephasing(&fluxonium::DephasingInputs {
            kappa_r: TAU * args.kappa_mhz * 1e6,
            chi_01: TAU * args.chi_mhz * 1e6,
            n_th,
        })?;
        let t_phi = if d.t_phi.is_infinite() {
            "inf".to_string()
        } else {
            format!("{:.6}", d.t_phi * 1e6)
        };
        out.push_str(&format!("{n_th:.6},{:.6},{t_phi}\n", d.gamma_phi));
    }
    write_csv_or_stdout(&resolved(&args.csv, config), &out)
}

pub fn fluxonium_fit(args: &FluxoniumFitArgs, config: &RunConfig) -> Result<()> {
    let mut reader = csv::Reader::from_path(&args.points)
        .map_err(|e| Error::Parse(format!("{}: {e}", args.points.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Parse(format!("missing column {name}")))
    };
    let (pc, tc, fc) = (
        col("phi_ext_over_2pi")?,
        col("transition")?,
        col("freq_ghz")?,
    );
    let mut points = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let phi: f64 = rec[pc]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad phi_ext_over_2pi {:?}", &rec[pc])))?;
        let freq_ghz: f64 = rec[fc]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad freq_ghz {:?}", &rec[fc])))?;
        points.push(SpectroscopyPoint {
            phi_ext: TAU * phi,
            transition: parse_transition(&rec[tc])?,
            freq_ghz,
        });
    }

    let guess = FluxoniumParams::new(args.ej0, args.ec0, args.el0, 0.0)?;
    let fit = fluxonium::fit_params(&points, &guess)?;
    let rms = (fit.residuals_ghz.iter().map(|r| r * r).sum::<f64>()
        / fit.residuals_ghz.len() as f64)
        .sqrt();
    emit_json(
        &json!({
            "e_j_ghz": fit.params.e_j,
            "e_c_ghz": fit.params.e_c,
            "e_l_ghz": fit.params.e_l,
            "rms_residual_ghz": rms,
            "iterations": fit.iterations,
            "converged": fit.converged,
        }),
        &resolved(&args.out, config),
    )
}

pub fn resonator_fit_s21(args: &FitS21Args, config: &RunConfig) -> Result<()> {
    let trace = resonator::io::read_trace_csv(&args.trace)?;
    let res = resonator::fit_s21(&trace)?;
    emit_json(
        &serde_json::to_value(&res).map_err(|e| Error::Parse(e.to_string()))?,
        &resolved(&args.out, config),
    )
}

pub fn resonator_photons(args: &PhotonsArgs) -> Result<()> {
    if !(args.qi > 0.0) || !(args.qe > 0.0) || !(args.f0_hz > 0.0) {
        return Err(Error::InvalidInput(
            "f0, qi and qe must all be positive".into(),
        ));
    }
    let fit = HangerFit {
        f0: args.f0_hz,
        q_i: args.qi,
        q_e: args.qe,
        phi_asym: 0.0,
        amplitude: 1.0,
        phase_offset: 0.0,
        delay: 0.0,
    };
    let n = resonator::photons_from_power(args.power_dbm, args.attenuation_db, &fit);
    emit_json(
        &json!({
            "n_photons": n,
            "device_power_w": jja_core::units::dbm_to_watts(args.power_dbm - args.attenuation_db),
        }),
        &None,
    )
}

pub fn resonator_kerr(args: &KerrArgs, config: &RunConfig) -> Result<()> {
    let attenuation_db = match (args.attenuation_db, args.room_temp_atten_db) {
        (Some(a), _) => a,
        (None, Some(room)) => {
            resonator::apply_attenuation_correction(room, config.attenuation_correction_db)
        }
        (None, None) => {
            return Err(Error::InvalidInput(
                "supply --attenuation-db or --room-temp-atten-db".into(),
            ))
        }
    };
    let traces = resonator::io::read_power_sweep_dir(&args.dir)?;
    let analysis = resonator::kerr_from_traces(
        &traces,
        attenuation_db,
        KerrWindow {
            before: args.window_before,
            after: args.window_after,
        },
    )?;

    if let Some(csv_path) = &resolved(&args.csv, config) {
        let mut out = String::from("nbar,f0_hz\n");
        for (n, f) in &analysis.points {
            out.push_str(&format!("{n:.6},{f:.3}\n"));
        }
        std::fs::write(csv_path, out)?;
    }

    emit_json(
        &json!({
            "attenuation_db": attenuation_db,
            "n_traces": analysis.points.len(),
            "anchor_index": analysis.anchor,
            "anchor_nbar": analysis.points[analysis.anchor].0,
            "f_intercept_hz": analysis.kerr.f_intercept,
            "k_self_khz_per_photon": analysis.kerr.k_self_khz_per_photon,
            "k_self_stderr_khz": analysis.kerr.k_self_stderr_khz,
            "fit_window_nbar": [analysis.kerr.fit_window.0, analysis.kerr.fit_window.1],
            "q_i_at_anchor": analysis.hanger_fits[analysis.anchor].fit.q_i,
            "q_e_at_anchor": analysis.hanger_fits[analysis.anchor].fit.q_e,
        }),
        &resolved(&args.out, config),
    )
}

pub fn probe_fit(args: &ProbeFitArgs, config: &RunConfig) -> Result<()> {
    let dataset = probe::ProbeDataset::from_csv(&args.dataset)?;
    let fit = probe::fit_probe(&dataset)?;
    let gap_ev = args.gap_uev.map_or(config.gap_ev(), |g| g * 1e-6);
    let i_c = probe::ab_critical_current(fit.r_junction, gap_ev)?;
    let l_j = probe::junction_inductance(i_c)?;
    emit_json(
        &json!({
            "r_junction_ohm": fit.r_junction,
            "r_substrate_ohm": fit.r_substrate,
            "covariance_ohm2": fit.covariance,
            "gap_uev": gap_ev * 1e6,
            "i_c_a": i_c,
            "l_j_nh": l_j / 1e-9,
        }),
        &resolved(&args.out, config),
    )
}

pub fn reproduce(args: &ReproduceArgs, config: &RunConfig) -> ExitCode {
    let gap_ev = args.gap_uev.map_or(config.gap_ev(), |g| g * 1e-6);
    type Runner = Box<dyn Fn() -> reproduce::CriterionOutcome>;
    let criteria: Vec<(&str, Runner)> = vec![
        (
            "dispersive-shift",
            Box::new(reproduce::dispersive_shift_reference),
        ),
        (
            "thermal-dephasing",
            Box::new(reproduce::thermal_dephasing_window),
        ),
        (
            "dispersion-oracle",
            Box::new(reproduce::dispersion_oracle_equivalence),
        ),
        ("c0-round-trips", Box::new(reproduce::c0_round_trips)),
        (
            "ab-chain",
            Box::new(move || reproduce::ambegaokar_baratoff_chain(gap_ev)),
        ),
        (
            "probe-fit-recovery",
            Box::new(reproduce::probe_fit_recovery),
        ),
        (
            "fluxonium-oracle",
            Box::new(reproduce::fluxonium_grid_oracle),
        ),
        ("kerr-pipeline", Box::new(reproduce::kerr_pipeline_recovery)),
        (
            "quality-factors",
            Box::new(reproduce::quality_factor_anchors),
        ),
        ("s21-fitter", Box::new(reproduce::s21_fitter_recovery)),
    ];
    let outcomes: Vec<_> = criteria
        .iter()
        .filter(|(name, _)| args.only.is_empty() || args.only.iter().any(|n| n == name))
        .map(|(_, run)| run())
        .collect();
    if outcomes.is_empty() {
        eprintln!("error: no criteria match {:?}", args.only);
        return ExitCode::from(2);
    }
    let report = reproduce::markdown_report(&outcomes);
    println!("{report}");
    if let Some(path) = &args.out.as_ref().map(|p| config.resolve_out(p)) {
        if let Err(e) = std::fs::write(path, &report) {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    if outcomes.iter().all(|o| o.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    }
}
