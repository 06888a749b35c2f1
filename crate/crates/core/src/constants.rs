//! Physical constants (2019 SI exact values where defined).

/// Planck constant, J·s.
pub const PLANCK_H: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = PLANCK_H / (2.0 * std::f64::consts::PI);
/// Elementary charge, C.
pub const ELECTRON_CHARGE: f64 = 1.602_176_634e-19;
/// Superconducting flux quantum Φ0 = h/2e, Wb.
pub const FLUX_QUANTUM: f64 = PLANCK_H / (2.0 * ELECTRON_CHARGE);
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Bundle of the constants used across the crate, overridable for
/// sensitivity studies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Planck constant, J·s.
    pub planck_h: f64,
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Elementary charge, C.
    pub electron_charge: f64,
    /// Flux quantum h/2e, Wb.
    pub flux_quantum: f64,
    /// Boltzmann constant, J/K.
    pub boltzmann: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            planck_h: PLANCK_H,
            hbar: HBAR,
            electron_charge: ELECTRON_CHARGE,
            flux_quantum: FLUX_QUANTUM,
            boltzmann: BOLTZMANN,
        }
    }
}

impl PhysicalConstants {
    /// Checks internal consistency: all constants strictly positive and
    /// Φ0 = h/2e to 1e-12 relative.
    pub fn is_consistent(&self) -> bool {
        let positive = self.planck_h > 0.0
            && self.hbar > 0.0
            && self.electron_charge > 0.0
            && self.flux_quantum > 0.0
            && self.boltzmann > 0.0;
        let phi0 = self.planck_h / (2.0 * self.electron_charge);
        positive && ((self.flux_quantum - phi0) / phi0).abs() < 1e-12
    }
}
