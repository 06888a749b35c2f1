//! Unit conversions. Solver internals are SI; these helpers live at the I/O
//! boundary.

use std::f64::consts::TAU;

/// 1 femtofarad in farad.
pub const FEMTOFARAD: f64 = 1e-15;
/// 1 attofarad in farad.
pub const ATTOFARAD: f64 = 1e-18;
/// 1 nanohenry in henry.
pub const NANOHENRY: f64 = 1e-9;

/// dBm → watts: P = 1 mW · 10^(dBm/10).
pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

/// watts → dBm, the exact inverse of [`dbm_to_watts`].
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts / 1e-3).log10()
}

/// Angular frequency (rad/s) of a frequency given in GHz.
pub fn ghz_to_rad_s(f_ghz: f64) -> f64 {
    TAU * f_ghz * 1e9
}

/// Frequency in GHz of an angular frequency in rad/s.
pub fn rad_s_to_ghz(omega: f64) -> f64 {
    omega / (TAU * 1e9)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dbm_anchors() {
        assert_eq!(dbm_to_watts(0.0), 1e-3);
        assert!((dbm_to_watts(-30.0) - 1e-6).abs() < 1e-18);
    }

    #[test]
    fn round_trip() {
        for &x in &[1e-18, 1e-3] {
            let back = dbm_to_watts(watts_to_dbm(x));
            assert!(((back - x) / x).abs() < 1e-12);
        }
    }

    #[test]
    fn angular_round_trip() {
        let f = 7.18;
        assert!((rad_s_to_ghz(ghz_to_rad_s(f)) - f).abs() < 1e-12);
    }
}
