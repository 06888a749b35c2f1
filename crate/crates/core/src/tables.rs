//! Design and measurement-anchored parameter tables for the five-array
//! characterization chips (on-substrate and etched variants).
//!
//! Each chip carries arrays of 500, 400, 300, 200 and 100 junctions; the
//! per-array capacitance lists are stored positionally in that order.

use crate::circuit::ArrayCircuitSpec;
use crate::error::{Error, Result};
use crate::units::{ATTOFARAD, FEMTOFARAD, NANOHENRY};

/// Junction counts, largest first; the per-array value lists below follow
/// this ordering.
pub const JUNCTION_COUNTS: [usize; 5] = [500, 400, 300, 200, 100];

/// Simulated/designed electrical values for one chip variant. Capacitances
/// in fF, inductance in nH.
#[derive(Debug, Clone, Copy)]
pub struct ArrayDesignTable {
    pub l_j_nh: f64,
    pub c_j_ff: f64,
    pub c_s_ff: [f64; 5],
    pub c_c_left_ff: [f64; 5],
    pub c_c_right_ff: [f64; 5],
    pub c_g_left_ff: [f64; 5],
    pub c_g_right_ff: [f64; 5],
}

/// On-substrate chip values.
pub const ON_SUBSTRATE: ArrayDesignTable = ArrayDesignTable {
    l_j_nh: 0.91,
    c_j_ff: 20.0,
    c_s_ff: [0.51, 0.51, 0.53, 0.53, 0.58],
    c_c_left_ff: [0.99, 0.94, 0.95, 0.85, 0.93],
    c_c_right_ff: [0.34, 0.32, 0.31, 0.29, 0.26],
    c_g_left_ff: [5.89, 5.84, 6.29, 6.37, 7.72],
    c_g_right_ff: [6.55, 6.43, 6.47, 6.49, 6.41],
};

/// Etched (suspended-array) chip values.
pub const ETCHED: ArrayDesignTable = ArrayDesignTable {
    l_j_nh: 1.10,
    c_j_ff: 20.0,
    c_s_ff: [0.48, 0.48, 0.50, 0.50, 0.55],
    c_c_left_ff: [0.99, 0.94, 0.94, 0.85, 0.93],
    c_c_right_ff: [0.34, 0.32, 0.30, 0.28, 0.26],
    c_g_left_ff: [5.81, 5.80, 6.26, 6.34, 7.67],
    c_g_right_ff: [6.46, 6.40, 6.43, 6.46, 6.46],
};

/// Extracted ground capacitances (aF) by junction count, etched chip.
pub const C0_ETCHED_AF: [(usize, f64); 4] = [(400, 15.0), (300, 14.0), (200, 60.0), (100, 83.0)];
/// Extracted ground capacitances (aF) by junction count, on-substrate chip.
pub const C0_ON_SUBSTRATE_AF: [(usize, f64); 3] = [(300, 118.0), (200, 158.0), (100, 293.0)];

impl ArrayDesignTable {
    /// Builds the full circuit spec for the array with `n_junctions`
    /// junctions, using the positional per-array values and the given
    /// ground capacitance (farad).
    pub fn spec_for(&self, n_junctions: usize, c_0: f64) -> Result<ArrayCircuitSpec> {
        let idx = JUNCTION_COUNTS
            .iter()
            .position(|&n| n == n_junctions)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "no table entry for N = {n_junctions}; known counts: {JUNCTION_COUNTS:?}"
                ))
            })?;
        ArrayCircuitSpec::new(
            n_junctions,
            self.l_j_nh * NANOHENRY,
            self.c_j_ff * FEMTOFARAD,
            c_0,
            self.c_s_ff[idx] * FEMTOFARAD,
            self.c_g_left_ff[idx] * FEMTOFARAD,
            self.c_g_right_ff[idx] * FEMTOFARAD,
            self.c_c_left_ff[idx] * FEMTOFARAD,
            self.c_c_right_ff[idx] * FEMTOFARAD,
        )
    }
}

/// All ten (variant, N, c0) anchor combinations with extracted ground
/// capacitances, as ready-made specs.
pub fn anchored_specs() -> Vec<(String, ArrayCircuitSpec)> {
    let mut out = Vec::new();
    for (n, c0_af) in C0_ETCHED_AF {
        let spec = ETCHED.spec_for(n, c0_af * ATTOFARAD).unwrap();
        out.push((format!("etched N={n}"), spec));
    }
    for (n, c0_af) in C0_ON_SUBSTRATE_AF {
        let spec = ON_SUBSTRATE.spec_for(n, c0_af * ATTOFARAD).unwrap();
        out.push((format!("on-substrate N={n}"), spec));
    }
    out
}
