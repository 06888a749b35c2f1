//! Independent cross-check routes used by the self-verification suite and
//! tests. These deliberately avoid the primary solver paths: the fluxonium
//! oracle diagonalizes on a periodic phase grid with a pseudospectral
//! kinetic term (the production code works in the oscillator basis with the
//! flux inside the cosine), and uses the gauge with the flux in the
//! quadratic term.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fluxonium::FluxoniumParams;

/// Half-width of the phase box; the grid covers [−12π, 12π).
pub const GRID_HALF_WIDTH: f64 = 12.0 * PI;
/// Default number of grid points. The pseudospectral kinetic term is
/// spectrally converged here (512 vs 1024 points agree to ~1e-11 GHz for
/// the device parameter sets), while keeping the dense solve fast.
pub const DEFAULT_GRID_POINTS: usize = 512;

/// Lowest `n_levels` eigenenergies (GHz, ground-state offset) of
/// H = 4E_C n² − E_J cos φ + ½E_L (φ + φ_ext)² on a uniform periodic phase
/// grid.
///
/// The kinetic operator is exact in the plane-wave basis of the box; its
/// grid representation is the circulant with symbol 4E_C k². Wavefunctions
/// at the box edge are suppressed by ~e^{-100}, so the periodic seam is
/// irrelevant.
pub fn phase_grid_energies(
    params: &FluxoniumParams,
    n_points: usize,
    n_levels: usize,
) -> Result<Vec<f64>> {
    if n_points < 64 || !n_points.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "grid size must be even and at least 64, got {n_points}"
        )));
    }
    if n_levels == 0 || n_levels > n_points / 4 {
        return Err(Error::InvalidInput(format!(
            "level count {n_levels} out of range for {n_points} points"
        )));
    }
    let n = n_points;
    let length = 2.0 * GRID_HALF_WIDTH;
    let h = length / n as f64;

    // circulant kinetic row: t[d] = (1/n) Σ_m 4E_C k_m² cos(2π m d / n),
    // k_m = 2π m / L over m in [−n/2, n/2)
    let mut row = vec![0.0f64; n];
    let prefactor = 4.0 * params.e_c;
    for (d, slot) in row.iter_mut().enumerate() {
        let mut acc = 0.0;
        for m in -(n as i64) / 2..(n as i64) / 2 {
            let k = TAU * m as f64 / length;
            acc += prefactor * k * k * (TAU * m as f64 * d as f64 / n as f64).cos();
        }
        *slot = acc / n as f64;
    }

    let mut ham = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        for l in 0..n {
            ham[(j, l)] = row[(n + j - l) % n];
        }
    }
    for j in 0..n {
        let phi = -GRID_HALF_WIDTH + j as f64 * h;
        let v = -params.e_j * phi.cos()
            + 0.5 * params.e_l * (phi + params.phi_ext) * (phi + params.phi_ext);
        ham[(j, j)] += v;
    }

    let mut evals: Vec<f64> = ham.symmetric_eigenvalues().iter().copied().collect();
    evals.sort_by(f64::total_cmp);
    let e0 = evals[0];
    Ok(evals[..n_levels].iter().map(|e| e - e0).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_limit_exact() {
        // E_J -> 0: ladder spacing sqrt(8 E_L E_C), independent of flux
        let p = FluxoniumParams::new(1e-12, 1.01, 0.42, 0.7).unwrap();
        let e = phase_grid_energies(&p, 256, 4).unwrap();
        let spacing = (8.0f64 * 0.42 * 1.01).sqrt();
        for (m, &em) in e.iter().enumerate() {
            assert!(
                (em - m as f64 * spacing).abs() < 1e-9,
                "level {m}: {em} vs {}",
                m as f64 * spacing
            );
        }
    }

    #[test]
    fn grid_refinement_converged() {
        let p = FluxoniumParams::new(2.59, 1.01, 0.42, std::f64::consts::PI).unwrap();
        let coarse = phase_grid_energies(&p, 256, 6).unwrap();
        let fine = phase_grid_energies(&p, 512, 6).unwrap();
        for (a, b) in coarse.iter().zip(&fine) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn rejects_bad_grid() {
        let p = FluxoniumParams::new(1.0, 1.0, 1.0, 0.0).unwrap();
        assert!(phase_grid_energies(&p, 63, 4).is_err());
        assert!(phase_grid_energies(&p, 128, 0).is_err());
    }
}
