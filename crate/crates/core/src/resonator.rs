//! Reduction of measured resonator data: hanger S21 fitting with the
//! diameter-correction (asymmetric hanger) convention, drive-power to
//! photon-number calibration, attenuation correction, and self-Kerr slope
//! extraction from frequency-vs-photon-number data.

use std::f64::consts::TAU;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::lm::{self, FdScheme, LmOptions};
use crate::units::dbm_to_watts;
use crate::util::par_map;

/// Room-temperature cables are this much more attenuating than when cold.
pub const DEFAULT_ATTENUATION_CORRECTION_DB: f64 = 0.85;

/// Default Kerr fit window relative to the n̄ ≈ 1 anchor: one step before,
/// ten after.
pub const DEFAULT_KERR_WINDOW: KerrWindow = KerrWindow {
    before: 1,
    after: 10,
};

/// Complex transmission versus frequency with drive-power metadata.
#[derive(Debug, Clone)]
pub struct S21Trace {
    /// Hz, strictly increasing.
    pub freqs: Vec<f64>,
    /// Linear-units complex transmission, same length as `freqs`.
    pub s21: Vec<Complex64>,
    /// Instrument output power, dBm.
    pub power_dbm: Option<f64>,
    /// Total line attenuation before the device, dB.
    pub attenuation_db: Option<f64>,
}

impl S21Trace {
    pub fn new(freqs: Vec<f64>, s21: Vec<Complex64>) -> Result<Self> {
        if freqs.len() != s21.len() {
            return Err(Error::InvalidInput(format!(
                "{} frequencies but {} S21 samples",
                freqs.len(),
                s21.len()
            )));
        }
        if freqs.len() < 16 {
            return Err(Error::InvalidInput(format!(
                "trace too short: {} points",
                freqs.len()
            )));
        }
        if freqs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "frequencies must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            freqs,
            s21,
            power_dbm: None,
            attenuation_db: None,
        })
    }

    pub fn span(&self) -> f64 {
        self.freqs[self.freqs.len() - 1] - self.freqs[0]
    }
}

/// Hanger-model parameters.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HangerFit {
    /// Resonance frequency, Hz.
    pub f0: f64,
    /// Internal quality factor.
    pub q_i: f64,
    /// External quality factor magnitude.
    pub q_e: f64,
    /// Asymmetry angle, rad.
    pub phi_asym: f64,
    /// Off-resonant transmission magnitude.
    pub amplitude: f64,
    /// Baseline phase at f = 0, rad.
    pub phase_offset: f64,
    /// Cable delay, seconds.
    pub delay: f64,
}

impl HangerFit {
    /// Total quality factor: 1/Q_t = 1/q_i + 1/q_e, exact by construction.
    pub fn q_total(&self) -> f64 {
        1.0 / (1.0 / self.q_i + 1.0 / self.q_e)
    }
}

/// Per-parameter standard errors of a hanger fit (same fields/units as
/// [`HangerFit`]).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HangerStdErr {
    pub f0: f64,
    pub q_i: f64,
    pub q_e: f64,
    pub phi_asym: f64,
    pub amplitude: f64,
    pub phase_offset: f64,
    pub delay: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HangerFitResult {
    pub fit: HangerFit,
    pub stderr: HangerStdErr,
    pub rms_residual: f64,
    pub iterations: usize,
}

/// Asymmetric-hanger transmission:
///
/// S21(f) = A e^{i(θ₀ + 2πfτ)} · [1 − (Q_t/q_e) e^{iφ} / (1 + 2i Q_t (f−f0)/f0)]
pub fn s21_model(f: f64, fit: &HangerFit) -> Complex64 {
    let qt = fit.q_total();
    let x = 2.0 * qt * (f - fit.f0) / fit.f0;
    let dip = Complex64::from_polar(qt / fit.q_e, fit.phi_asym) / Complex64::new(1.0, x);
    let baseline = Complex64::from_polar(fit.amplitude, fit.phase_offset + TAU * f * fit.delay);
    baseline * (Complex64::new(1.0, 0.0) - dip)
}

/// Generates a trace from the model plus complex Gaussian noise
/// (`noise_sigma` per quadrature).
pub fn synthesize_trace<R: Rng>(
    fit: &HangerFit,
    freqs: &[f64],
    noise_sigma: f64,
    rng: &mut R,
) -> Result<S21Trace> {
    use rand_distr::{Distribution, Normal};
    let normal = Normal::new(0.0, 1.0).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let s21 = freqs
        .iter()
        .map(|&f| {
            s21_model(f, fit)
                + Complex64::new(
                    noise_sigma * normal.sample(rng),
                    noise_sigma * normal.sample(rng),
                )
        })
        .collect();
    S21Trace::new(freqs.to_vec(), s21)
}

fn unwrap_phases(zs: &[Complex64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(zs.len());
    let mut offset = 0.0;
    let mut prev = zs[0].arg();
    out.push(prev);
    for z in &zs[1..] {
        let raw = z.arg();
        let mut d = raw - prev;
        while d > std::f64::consts::PI {
            d -= TAU;
        }
        while d < -std::f64::consts::PI {
            d += TAU;
        }
        prev = raw;
        offset += d;
        out.push(out[0] + offset);
    }
    out
}

// Algebraic least-squares circle (Kasa): minimize |z|² + D x + E y + F.
fn kasa_circle(zs: &[Complex64]) -> Result<(Complex64, f64)> {
    let n = zs.len() as f64;
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut sz, mut szx, mut szy) = (0.0, 0.0, 0.0);
    for z in zs {
        let (x, y) = (z.re, z.im);
        let r2 = x * x + y * y;
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
        sz += r2;
        szx += r2 * x;
        szy += r2 * y;
    }
    let a = nalgebra::Matrix3::new(sxx, sxy, sx, sxy, syy, sy, sx, sy, n);
    let b = nalgebra::Vector3::new(-szx, -szy, -sz);
    let sol = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::SingularFit("degenerate circle fit".into()))?;
    let (d, e, f) = (sol[0], sol[1], sol[2]);
    let center = Complex64::new(-d / 2.0, -e / 2.0);
    let r2 = center.norm_sqr() - f;
    if r2 <= 0.0 {
        return Err(Error::SingularFit("circle fit collapsed".into()));
    }
    Ok((center, r2.sqrt()))
}

fn initial_guess(trace: &S21Trace) -> Result<HangerFit> {
    let n = trace.freqs.len();
    let wing = (n / 10).max(5).min(n / 3);

    let mags: Vec<f64> = trace.s21.iter().map(|z| z.norm()).collect();
    let wing_idx: Vec<usize> = (0..wing).chain(n - wing..n).collect();
    let baseline_amp = wing_idx.iter().map(|&i| mags[i]).sum::<f64>() / wing_idx.len() as f64;

    // noise floor from magnitude scatter in the two wings
    let noise_sigma = {
        let mut acc = 0.0;
        for half in [&wing_idx[..wing], &wing_idx[wing..]] {
            let m = half.iter().map(|&i| mags[i]).sum::<f64>() / half.len() as f64;
            acc += half
                .iter()
                .map(|&i| (mags[i] - m) * (mags[i] - m))
                .sum::<f64>();
        }
        (acc / (wing_idx.len() as f64 - 2.0).max(1.0)).sqrt()
    };

    let i_min = mags
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0;
    let depth = baseline_amp - mags[i_min];
    if depth <= 3.0 * noise_sigma || depth <= 1e-9 * baseline_amp.max(f64::MIN_POSITIVE) {
        return Err(Error::NoResonance);
    }
    let f0 = trace.freqs[i_min];

    // cable delay from the phase slope of the wings
    let phases = unwrap_phases(&trace.s21);
    let (fm, pm) = wing_idx
        .iter()
        .fold((0.0, 0.0), |(a, b), &i| (a + trace.freqs[i], b + phases[i]));
    let (fm, pm) = (fm / wing_idx.len() as f64, pm / wing_idx.len() as f64);
    let (mut num, mut den) = (0.0, 0.0);
    for &i in &wing_idx {
        num += (trace.freqs[i] - fm) * (phases[i] - pm);
        den += (trace.freqs[i] - fm) * (trace.freqs[i] - fm);
    }
    let delay = if den > 0.0 { num / den / TAU } else { 0.0 };

    // delay-corrected plane for the circle fit
    let corrected: Vec<Complex64> = trace
        .freqs
        .iter()
        .zip(&trace.s21)
        .map(|(&f, &z)| z * Complex64::from_polar(1.0, -TAU * f * delay))
        .collect();
    let (center, radius) = kasa_circle(&corrected)?;

    // off-resonant point: diametrically opposite the resonance on the circle
    let z_res = corrected[i_min];
    let away = center - z_res;
    let p_off = if away.norm() > 0.0 {
        center + away / away.norm() * radius
    } else {
        Complex64::new(baseline_amp, 0.0)
    };
    let amplitude = p_off.norm().max(1e-12);
    let phase_offset = p_off.arg();

    // Q_t from the half-depth width
    let half_level = 0.5 * (baseline_amp + mags[i_min]);
    let mut left = i_min;
    while left > 0 && mags[left] < half_level {
        left -= 1;
    }
    let mut right = i_min;
    while right < n - 1 && mags[right] < half_level {
        right += 1;
    }
    let width = (trace.freqs[right] - trace.freqs[left]).max(trace.span() / (n as f64));
    let q_t = (f0 / width).max(10.0);

    if trace.span() < 3.0 * f0 / q_t {
        return Err(Error::InvalidInput(format!(
            "trace spans {:.1} linewidths; need at least 3",
            trace.span() * q_t / f0
        )));
    }

    let dip_complex = Complex64::new(1.0, 0.0) - z_res / p_off;
    let phi_asym = dip_complex.arg();
    let ratio = dip_complex.norm().clamp(1e-6, 0.999_999);
    let q_e = q_t / ratio;
    let inv_qi = 1.0 / q_t - 1.0 / q_e;
    let q_i = if inv_qi > 0.0 {
        1.0 / inv_qi
    } else {
        10.0 * q_t
    };

    Ok(HangerFit {
        f0,
        q_i,
        q_e,
        phi_asym,
        amplitude,
        phase_offset,
        delay,
    })
}

/// Fits the asymmetric hanger model to a complex trace.
///
/// Initialization combines an algebraic least-squares circle fit in the
/// delay-corrected complex plane with wing-based delay/baseline estimates;
/// the full model is then refined by damped least squares on the stacked
/// real/imaginary residuals. Standard errors come from the Jacobian at the
/// solution.
pub fn fit_s21(trace: &S21Trace) -> Result<HangerFitResult> {
    let g = initial_guess(trace)?;

    let residual = |p: &[f64]| -> Result<Vec<f64>> {
        let fit = HangerFit {
            f0: p[0],
            q_i: p[1].exp(),
            q_e: p[2].exp(),
            phi_asym: p[3],
            amplitude: p[4].exp(),
            phase_offset: p[5],
            delay: p[6],
        };
        let mut out = Vec::with_capacity(2 * trace.freqs.len());
        for (&f, &z) in trace.freqs.iter().zip(&trace.s21) {
            let m = s21_model(f, &fit);
            out.push(m.re - z.re);
            out.push(m.im - z.im);
        }
        Ok(out)
    };

    let p0 = [
        g.f0,
        g.q_i.ln(),
        g.q_e.ln(),
        g.phi_asym,
        g.amplitude.ln(),
        g.phase_offset,
        g.delay,
    ];
    let opts = LmOptions {
        max_iterations: 200,
        relative_step_tol: 1e-10,
        fd_scheme: FdScheme::Central,
        fd_step: 1e-6,
        // floors keep finite-difference steps meaningful for parameters
        // that pass through zero (angles, delay)
        fd_scales: vec![g.f0.abs(), 1.0, 1.0, 1.0, 1.0, 1.0, 1e-8],
        ..Default::default()
    };
    let out = lm::least_squares(residual, &p0, &opts)?;
    if !out.converged {
        return Err(Error::NoConvergence(format!(
            "hanger fit stalled; last rms residual {:.3e}",
            (out.cost / out.residuals.len() as f64).sqrt()
        )));
    }

    // the baseline phase and the asymmetry angle only enter mod 2pi
    let wrap = |x: f64| {
        let y = x.rem_euclid(TAU);
        if y > std::f64::consts::PI {
            y - TAU
        } else {
            y
        }
    };
    let fit = HangerFit {
        f0: out.params[0],
        q_i: out.params[1].exp(),
        q_e: out.params[2].exp(),
        phi_asym: wrap(out.params[3]),
        amplitude: out.params[4].exp(),
        phase_offset: wrap(out.params[5]),
        delay: out.params[6],
    };
    let cov = out.covariance();
    let se = |i: usize| cov.as_ref().map_or(0.0, |c| c[(i, i)].max(0.0).sqrt());
    let stderr = HangerStdErr {
        f0: se(0),
        q_i: fit.q_i * se(1),
        q_e: fit.q_e * se(2),
        phi_asym: se(3),
        amplitude: fit.amplitude * se(4),
        phase_offset: se(5),
        delay: se(6),
    };

    Ok(HangerFitResult {
        fit,
        stderr,
        rms_residual: (out.cost / out.residuals.len() as f64).sqrt(),
        iterations: out.iterations,
    })
}

/// Fits every trace; parallel per trace under the `parallel` feature.
pub fn fit_s21_batch(traces: &[S21Trace]) -> Vec<Result<HangerFitResult>> {
    par_map(traces, fit_s21)
}

/// Steady-state on-resonance photon number of a hanger-coupled resonator:
///
/// n̄ = 2 Q_t² P_dev / (q_e ħ ω₀²),  P_dev = P(power_dbm − attenuation_db).
///
/// This calibration constant is the dominant systematic in any Kerr-slope
/// number derived from it; attenuation uncertainty propagates one-to-one.
pub fn photons_from_power(power_dbm: f64, attenuation_db: f64, fit: &HangerFit) -> f64 {
    let p_dev = dbm_to_watts(power_dbm - attenuation_db);
    let qt = fit.q_total();
    let omega0 = TAU * fit.f0;
    2.0 * qt * qt * p_dev / (fit.q_e * HBAR * omega0 * omega0)
}

/// Removes the room-temperature excess attenuation measured during line
/// calibration: cold = room_temp − correction.
pub fn apply_attenuation_correction(room_temp_atten_db: f64, correction_db: f64) -> f64 {
    room_temp_atten_db - correction_db
}

/// Window around the anchor index used for the Kerr line fit.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KerrWindow {
    pub before: usize,
    pub after: usize,
}

/// Self-Kerr line-fit result.
#[derive(Debug, Clone, Serialize)]
pub struct KerrFit {
    /// Extrapolated zero-photon resonance frequency, Hz.
    pub f_intercept: f64,
    /// Self-Kerr coefficient, kHz per photon (positive for a downward
    /// frequency pull).
    pub k_self_khz_per_photon: f64,
    /// Standard error of the slope, kHz per photon.
    pub k_self_stderr_khz: f64,
    /// (min n̄, max n̄) actually used.
    pub fit_window: (f64, f64),
}

/// Ordinary least squares of f(n̄) = f_intercept − k_self·n̄ over the window
/// [anchor − before, anchor + after].
pub fn fit_kerr(points: &[(f64, f64)], anchor: usize, window: KerrWindow) -> Result<KerrFit> {
    if anchor >= points.len() {
        return Err(Error::InvalidInput(format!(
            "anchor {anchor} out of range for {} points",
            points.len()
        )));
    }
    let lo = anchor.saturating_sub(window.before);
    let hi = (anchor + window.after).min(points.len() - 1);
    let sel = &points[lo..=hi];
    if sel.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "only {} points in the fit window; need at least 3",
            sel.len()
        )));
    }

    let m = sel.len() as f64;
    let xm = sel.iter().map(|p| p.0).sum::<f64>() / m;
    let ym = sel.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = sel.iter().map(|p| (p.0 - xm) * (p.0 - xm)).sum();
    if sxx == 0.0 {
        return Err(Error::SingularFit("all photon numbers equal".into()));
    }
    let sxy: f64 = sel.iter().map(|p| (p.0 - xm) * (p.1 - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ss_res: f64 = sel
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + slope * p.0);
            r * r
        })
        .sum();
    let slope_var = if sel.len() > 2 {
        ss_res / (m - 2.0) / sxx
    } else {
        0.0
    };

    let (mut nmin, mut nmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in sel {
        nmin = nmin.min(p.0);
        nmax = nmax.max(p.0);
    }

    Ok(KerrFit {
        f_intercept: intercept,
        k_self_khz_per_photon: -slope / 1e3,
        k_self_stderr_khz: slope_var.sqrt() / 1e3,
        fit_window: (nmin, nmax),
    })
}

/// Full power-sweep reduction: per-trace hanger fits, photon-number
/// calibration, anchor selection at n̄ ≈ 1, and the Kerr line fit.
#[derive(Debug, Clone, Serialize)]
pub struct KerrAnalysis {
    /// (n̄, f0 Hz) per power step, ascending in power.
    pub points: Vec<(f64, f64)>,
    /// Index of the n̄ ≈ 1 anchor.
    pub anchor: usize,
    pub kerr: KerrFit,
    pub hanger_fits: Vec<HangerFitResult>,
}

/// Chains `fit_s21` → `photons_from_power` → `fit_kerr` over a power sweep.
/// Every trace must carry `power_dbm`; `attenuation_db` applies to all.
pub fn kerr_from_traces(
    traces: &[S21Trace],
    attenuation_db: f64,
    window: KerrWindow,
) -> Result<KerrAnalysis> {
    if traces.is_empty() {
        return Err(Error::InvalidInput("no traces supplied".into()));
    }
    let mut order: Vec<usize> = (0..traces.len()).collect();
    for (i, t) in traces.iter().enumerate() {
        if t.power_dbm.is_none() {
            return Err(Error::Parse(format!("trace {i} missing power metadata")));
        }
    }
    order.sort_by(|&a, &b| {
        traces[a]
            .power_dbm
            .unwrap()
            .total_cmp(&traces[b].power_dbm.unwrap())
    });
    let sorted: Vec<S21Trace> = order.iter().map(|&i| traces[i].clone()).collect();

    let mut hanger_fits = Vec::with_capacity(sorted.len());
    for res in fit_s21_batch(&sorted) {
        hanger_fits.push(res?);
    }

    let points: Vec<(f64, f64)> = sorted
        .iter()
        .zip(&hanger_fits)
        .map(|(t, h)| {
            (
                photons_from_power(t.power_dbm.unwrap(), attenuation_db, &h.fit),
                h.fit.f0,
            )
        })
        .collect();

    let anchor = points
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 .0 - 1.0).abs().total_cmp(&(b.1 .0 - 1.0).abs()))
        .unwrap()
        .0;
    let kerr = fit_kerr(&points, anchor, window)?;

    Ok(KerrAnalysis {
        points,
        anchor,
        kerr,
        hanger_fits,
    })
}

pub mod io {
    //! Trace CSV I/O and power-sweep directory ingestion.
    //!
    //! Trace files carry columns `freq_hz, s21_re, s21_im` (linear units);
    //! `freq_hz, s21_db, s21_phase_rad` is also accepted. Drive power comes
    //! from the `<name>_p<dBm>.csv` filename convention or a `<name>.json`
    //! sidecar with a `power_dbm` key.

    use super::*;
    use num_complex::Complex64;
    use std::path::PathBuf;

    pub fn read_trace_csv(path: &Path) -> Result<S21Trace> {
        let mut reader = csv::Reader::from_path(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let headers = reader
            .headers()
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
            .clone();
        let col = |name: &str| headers.iter().position(|h| h.trim() == name);
        let f_col = col("freq_hz")
            .ok_or_else(|| Error::Parse(format!("{}: missing column freq_hz", path.display())))?;

        enum Fmt {
            ReIm(usize, usize),
            DbPhase(usize, usize),
        }
        let fmt = match (
            col("s21_re"),
            col("s21_im"),
            col("s21_db"),
            col("s21_phase_rad"),
        ) {
            (Some(re), Some(im), _, _) => Fmt::ReIm(re, im),
            (_, _, Some(db), Some(ph)) => Fmt::DbPhase(db, ph),
            _ => {
                return Err(Error::Parse(format!(
                    "{}: need s21_re/s21_im or s21_db/s21_phase_rad columns",
                    path.display()
                )))
            }
        };

        let mut freqs = Vec::new();
        let mut s21 = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            let parse = |i: usize| -> Result<f64> {
                rec[i].trim().parse().map_err(|_| {
                    Error::Parse(format!("{}: bad number {:?}", path.display(), &rec[i]))
                })
            };
            freqs.push(parse(f_col)?);
            match fmt {
                Fmt::ReIm(re, im) => s21.push(Complex64::new(parse(re)?, parse(im)?)),
                Fmt::DbPhase(db, ph) => {
                    let amp = 10f64.powf(parse(db)? / 20.0);
                    s21.push(Complex64::from_polar(amp, parse(ph)?));
                }
            }
        }
        S21Trace::new(freqs, s21)
    }

    pub fn write_trace_csv(path: &Path, trace: &S21Trace) -> Result<()> {
        let mut w = csv::Writer::from_path(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        w.write_record(["freq_hz", "s21_re", "s21_im"])
            .map_err(|e| Error::Parse(e.to_string()))?;
        for (f, z) in trace.freqs.iter().zip(&trace.s21) {
            w.write_record([
                format!("{f:.6}"),
                format!("{:e}", z.re),
                format!("{:e}", z.im),
            ])
            .map_err(|e| Error::Parse(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Drive power encoded in the file name: `<name>_p<dBm>.csv`.
    pub fn power_from_filename(path: &Path) -> Option<f64> {
        let stem = path.file_name()?.to_str()?.strip_suffix(".csv")?;
        let idx = stem.rfind("_p")?;
        stem[idx + 2..].parse().ok()
    }

    fn power_from_sidecar(path: &Path) -> Option<f64> {
        let sidecar: PathBuf = path.with_extension("json");
        let text = std::fs::read_to_string(sidecar).ok()?;
        let v: serde_json::Value = serde_json::from_str(&text).ok()?;
        v.get("power_dbm")?.as_f64()
    }

    /// Reads every `*.csv` in a directory as one power step each. Errors if
    /// any trace lacks power metadata (filename or sidecar).
    pub fn read_power_sweep_dir(dir: &Path) -> Result<Vec<S21Trace>> {
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        paths.sort();
        if paths.is_empty() {
            return Err(Error::InvalidInput(format!(
                "no .csv traces in {}",
                dir.display()
            )));
        }
        let mut traces = Vec::with_capacity(paths.len());
        for p in &paths {
            let mut trace = read_trace_csv(p)?;
            trace.power_dbm = power_from_filename(p).or_else(|| power_from_sidecar(p));
            if trace.power_dbm.is_none() {
                return Err(Error::Parse(format!(
                    "missing power metadata for {} (expected _p<dBm>.csv suffix or .json sidecar)",
                    p.display()
                )));
            }
            traces.push(trace);
        }
        Ok(traces)
    }
}
