//! Normal-mode solving for the array circuit, the closed-form dispersion of
//! the end-grounded chain, and ground-capacitance extraction by inversion of
//! the fundamental frequency.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::circuit::{build_capacitance_matrix, build_inverse_inductance_matrix, ArrayCircuitSpec};
use crate::error::{Error, Result};

/// Default threshold below which a mode counts as a zero mode: 2π × 1 MHz,
/// far below any physical mode (~GHz) yet far above numerical noise.
pub const DEFAULT_ZERO_MODE_THRESHOLD: f64 = TAU * 1e6;

/// Default ground-capacitance bracket for [`fit_c0`]: [1 aF, 10 fF].
pub const DEFAULT_C0_BRACKET: (f64, f64) = (1e-18, 1e-14);
/// Default frequency tolerance for [`fit_c0`], Hz.
pub const DEFAULT_C0_TOL_HZ: f64 = 1e3;
/// Bisection iteration cap for [`fit_c0`].
pub const C0_MAX_ITERATIONS: usize = 200;

/// Sorted normal-mode frequencies and C-orthonormal mode vectors of a
/// generalized eigenproblem M v = ω² C v.
#[derive(Debug, Clone)]
pub struct ModeSpectrum {
    /// Nonzero mode angular frequencies, rad/s, ascending.
    pub frequencies: Vec<f64>,
    /// Mode vectors as columns, aligned with `frequencies`; they satisfy
    /// vᵢᵀ C vⱼ = δᵢⱼ for the capacitance matrix used to produce them.
    pub mode_vectors: DMatrix<f64>,
    /// Number of near-zero modes discarded from `frequencies`.
    pub n_zero_modes: usize,
}

impl ModeSpectrum {
    /// Lowest retained (nonzero) mode frequency in Hz.
    pub fn fundamental_hz(&self) -> Option<f64> {
        self.frequencies.first().map(|w| w / TAU)
    }
}

/// Result of a ground-capacitance fit.
#[derive(Debug, Clone, Serialize)]
pub struct C0FitResult {
    /// Converged ground capacitance, F.
    pub c_0: f64,
    /// |forward_fundamental(c_0) − measured| at convergence, Hz.
    pub residual_hz: f64,
    /// Bisection iterations used.
    pub iterations: usize,
    /// Bracket enclosing the returned value, F.
    pub bracket: (f64, f64),
}

/// Solves the generalized symmetric eigenproblem M v = ω² C v by Cholesky
/// reduction of C to a standard dense symmetric eigendecomposition.
///
/// Eigenvalues below `zero_mode_threshold`² are counted in `n_zero_modes`
/// and excluded from the returned frequencies. More than one zero mode
/// signals a degenerate circuit and is an error: a connected chain can shed
/// at most the uniform flux shift.
pub fn solve_modes(
    c_matrix: &DMatrix<f64>,
    l_inv_matrix: &DMatrix<f64>,
    zero_mode_threshold: f64,
) -> Result<ModeSpectrum> {
    if c_matrix.nrows() != c_matrix.ncols() || c_matrix.shape() != l_inv_matrix.shape() {
        return Err(Error::InvalidInput(format!(
            "matrix dimensions differ: C is {:?}, M is {:?}",
            c_matrix.shape(),
            l_inv_matrix.shape()
        )));
    }

    let chol = nalgebra::Cholesky::new(c_matrix.clone())
        .ok_or_else(|| Error::NotPositiveDefinite("Cholesky factorization failed".into()))?;
    let l = chol.l();

    // A = L⁻¹ M L⁻ᵀ, using (L⁻¹M)ᵀ = M L⁻ᵀ for symmetric M
    let half = l
        .solve_lower_triangular(l_inv_matrix)
        .ok_or_else(|| Error::NotPositiveDefinite("triangular solve failed".into()))?;
    let mut a = l
        .solve_lower_triangular(&half.transpose())
        .ok_or_else(|| Error::NotPositiveDefinite("triangular solve failed".into()))?;
    a = (&a + a.transpose()) * 0.5;

    let eig = nalgebra::SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let lt = l.transpose();
    let thr2 = zero_mode_threshold * zero_mode_threshold;
    let mut frequencies = Vec::new();
    let mut kept_cols = Vec::new();
    let mut n_zero_modes = 0usize;
    for &idx in &order {
        let lambda = eig.eigenvalues[idx];
        if lambda < thr2 {
            n_zero_modes += 1;
            continue;
        }
        frequencies.push(lambda.sqrt());
        kept_cols.push(idx);
    }
    if n_zero_modes > 1 {
        return Err(Error::DegenerateCircuit(format!(
            "{n_zero_modes} near-zero modes; a connected chain has at most one"
        )));
    }

    // back-transform kept eigenvectors: v = L⁻ᵀ y
    let n = eig.eigenvalues.len();
    let mut mode_vectors = DMatrix::<f64>::zeros(n, kept_cols.len());
    for (out_col, &idx) in kept_cols.iter().enumerate() {
        let y = eig.eigenvectors.column(idx).into_owned();
        let v = lt
            .solve_upper_triangular(&y)
            .ok_or_else(|| Error::NotPositiveDefinite("triangular solve failed".into()))?;
        mode_vectors.set_column(out_col, &v);
    }

    Ok(ModeSpectrum {
        frequencies,
        mode_vectors,
        n_zero_modes,
    })
}

/// Closed-form dispersion of the isolated array in the grounded-end limit:
///
/// ω_k = ω₀ √[(1 − cos(πk/N)) / (1 − cos(πk/N) + C₀/(2C_J))],  ω₀ = 1/√(L_J C_J).
///
/// Paddle capacitances are ignored. Valid for 0 ≤ k ≤ N; k = 0 is the null
/// mode and returns 0.
pub fn analytic_dispersion(k: usize, spec: &ArrayCircuitSpec) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let n = spec.n_junctions as f64;
    let omega0 = 1.0 / (spec.l_j * spec.c_j).sqrt();
    let x = 1.0 - (std::f64::consts::PI * k as f64 / n).cos();
    omega0 * (x / (x + spec.c_0 / (2.0 * spec.c_j))).sqrt()
}

/// Numeric normal modes of the chain with both end nodes grounded
/// (rows/columns 0 and N deleted). This is the configuration the closed-form
/// dispersion describes, so [`analytic_dispersion`] is its exact oracle.
pub fn solve_grounded_chain(spec: &ArrayCircuitSpec) -> Result<ModeSpectrum> {
    spec.validate()?;
    let n = spec.n_junctions;
    if n < 2 {
        return Err(Error::InvalidInput(
            "grounded chain needs at least 2 junctions (1 free node)".into(),
        ));
    }
    let c_full = grounded_capacitance(spec);
    let m_full = build_inverse_inductance_matrix(spec)?;
    let c = c_full.view((1, 1), (n - 1, n - 1)).into_owned();
    let m = m_full.view((1, 1), (n - 1, n - 1)).into_owned();
    solve_modes(&c, &m, DEFAULT_ZERO_MODE_THRESHOLD)
}

// Capacitance matrix with paddle terms dropped (ends are shorted to ground,
// so c_s/c_g/c_c no longer enter the interior problem).
fn grounded_capacitance(spec: &ArrayCircuitSpec) -> DMatrix<f64> {
    let n = spec.n_junctions;
    let mut c = DMatrix::<f64>::zeros(n + 1, n + 1);
    for i in 0..n {
        c[(i, i)] += spec.c_j;
        c[(i + 1, i + 1)] += spec.c_j;
        c[(i, i + 1)] -= spec.c_j;
        c[(i + 1, i)] -= spec.c_j;
    }
    for i in 1..n {
        c[(i, i)] += spec.c_0;
    }
    c
}

/// Builds the full paddle-terminated circuit matrices, solves the modes,
/// and returns the lowest nonzero mode frequency in Hz.
pub fn forward_fundamental(spec: &ArrayCircuitSpec) -> Result<f64> {
    let c = build_capacitance_matrix(spec)?;
    let m = build_inverse_inductance_matrix(spec)?;
    let spectrum = solve_modes(&c, &m, DEFAULT_ZERO_MODE_THRESHOLD)?;
    spectrum
        .fundamental_hz()
        .ok_or_else(|| Error::DegenerateCircuit("no nonzero modes".into()))
}

/// Extracts the ground capacitance reproducing a measured fundamental
/// frequency by bisection on c_0.
///
/// The forward map is strictly decreasing in c_0 (added ground loading
/// lowers every mode), so a straddling bracket guarantees convergence.
/// `spec_without_c0`'s own c_0 value is ignored.
pub fn fit_c0(
    measured_f1_hz: f64,
    spec_without_c0: &ArrayCircuitSpec,
    bracket: (f64, f64),
    tol_hz: f64,
) -> Result<C0FitResult> {
    if !(measured_f1_hz > 0.0) {
        return Err(Error::InvalidInput(format!(
            "measured frequency must be positive, got {measured_f1_hz}"
        )));
    }
    if !(tol_hz > 0.0) {
        return Err(Error::InvalidInput(format!(
            "tolerance must be positive, got {tol_hz}"
        )));
    }
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0) || !(hi > lo) {
        return Err(Error::InvalidInput(format!(
            "bracket must satisfy 0 < low < high, got ({lo:e}, {hi:e})"
        )));
    }

    let f_lo = forward_fundamental(&spec_without_c0.with_c0(lo))?;
    let f_hi = forward_fundamental(&spec_without_c0.with_c0(hi))?;
    // decreasing map: f(lo) is the upper frequency, f(hi) the lower
    if !(f_hi <= measured_f1_hz && measured_f1_hz <= f_lo) {
        return Err(Error::Bracket(format!(
            "target {:.6} GHz outside [{:.6}, {:.6}] GHz spanned by c_0 in [{:.3e}, {:.3e}] F",
            measured_f1_hz / 1e9,
            f_hi / 1e9,
            f_lo / 1e9,
            lo,
            hi
        )));
    }

    for iteration in 1..=C0_MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        let f_mid = forward_fundamental(&spec_without_c0.with_c0(mid))?;
        let residual = (f_mid - measured_f1_hz).abs();
        if residual < tol_hz {
            return Ok(C0FitResult {
                c_0: mid,
                residual_hz: residual,
                iterations: iteration,
                bracket: (lo, hi),
            });
        }
        if f_mid > measured_f1_hz {
            lo = mid; // frequency too high -> need more ground loading
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence(format!(
        "bisection did not reach {tol_hz} Hz within {C0_MAX_ITERATIONS} iterations"
    )))
}
