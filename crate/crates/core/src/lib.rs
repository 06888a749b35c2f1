//! Circuit analysis for capacitively shunted Josephson junction arrays and
//! fluxonium qubits.
//!
//! The crate covers the full numerical chain used to characterize such
//! devices:
//!
//! - circuit-matrix construction and generalized normal-mode solving for a
//!   shunted JJ array ([`circuit`], [`modes`]), including the closed-form
//!   dispersion of the end-grounded chain and ground-capacitance extraction
//!   by inverting the fundamental frequency;
//! - fluxonium Hamiltonian diagonalization in the harmonic-oscillator basis,
//!   flux sweeps, dispersive-shift and thermal-photon-dephasing predictions,
//!   and spectroscopy parameter fitting ([`fluxonium`]);
//! - reduction of measured resonator data: hanger S21 fits, drive-power to
//!   photon-number calibration, and self-Kerr slope extraction
//!   ([`resonator`]);
//! - room-temperature probe analysis: Ambegaokar-Baratoff conversion and
//!   the parallel-resistance model of an array shunted by the substrate
//!   ([`probe`]).
//!
//! Matrices and solver-facing quantities are kept in SI units (farad, henry,
//! rad/s); GHz, fF/aF and nH appear only at the I/O boundary. Fluxonium
//! energies follow the E/h-in-GHz convention.
//!
//! All operations are pure and re-entrant. With the default `parallel`
//! feature, batch operations (flux sweeps, per-trace fitting) distribute
//! over rayon; disabling the feature falls back to sequential iteration
//! with identical results.

// validation sites use `!(v > 0.0)` so NaN fails closed
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod constants;
pub mod error;
pub mod fluxonium;
pub mod lm;
pub mod modes;
pub mod oracles;
pub mod probe;
pub mod reproduce;
pub mod resonator;
pub mod tables;
pub mod units;
mod util;

pub use circuit::{build_capacitance_matrix, build_inverse_inductance_matrix, ArrayCircuitSpec};
pub use constants::PhysicalConstants;
pub use error::{Error, Result};
pub use fluxonium::{
    diagonalize, diagonalize_auto, dispersive_shift, fit_params, quality_factor, spectrum_sweep,
    thermal_dephasing, transition, DephasingInputs, DephasingRate, FluxoniumParams,
    FluxoniumSolution,
};
pub use modes::{
    analytic_dispersion, fit_c0, forward_fundamental, solve_grounded_chain, solve_modes,
    C0FitResult, ModeSpectrum,
};
pub use probe::{
    ab_critical_current, fit_probe, junction_inductance, parallel_model, probe_stats, ProbeDataset,
    ProbeFit,
};
pub use resonator::{
    apply_attenuation_correction, fit_kerr, fit_s21, photons_from_power, s21_model, HangerFit,
    KerrFit, S21Trace,
};
