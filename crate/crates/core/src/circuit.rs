//! Electrical description of a capacitively shunted JJ array and the circuit
//! matrices derived from it.
//!
//! Node indices 0..=N are the island fluxes Φ_0..Φ_N. Node 0 and node N are
//! the capacitor paddles; each junction couples neighboring nodes. The
//! transmission-line coupling capacitances are lumped into the paddle ground
//! capacitances for mode solving; the external load is not modeled.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{FEMTOFARAD, NANOHENRY};

/// Full electrical description of a shunted JJ array.
///
/// All values in SI units (farad, henry). The serialized JSON form uses
/// fF for capacitances and nH for inductances, with identical field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ArrayCircuitSpecJson", into = "ArrayCircuitSpecJson")]
pub struct ArrayCircuitSpec {
    /// Number of junctions N; the circuit has N+1 nodes.
    pub n_junctions: usize,
    /// Per-junction inductance, H.
    pub l_j: f64,
    /// Per-junction capacitance, F.
    pub c_j: f64,
    /// Per-island ground capacitance (interior islands 1..N-1), F.
    pub c_0: f64,
    /// Paddle-to-paddle shunt capacitance, F.
    pub c_s: f64,
    /// Left paddle ground capacitance, F.
    pub c_g_left: f64,
    /// Right paddle ground capacitance, F.
    pub c_g_right: f64,
    /// Left paddle-to-transmission-line coupling capacitance, F.
    pub c_c_left: f64,
    /// Right paddle-to-transmission-line coupling capacitance, F.
    pub c_c_right: f64,
}

/// Serialized form: capacitances in fF, inductances in nH.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArrayCircuitSpecJson {
    n_junctions: usize,
    l_j: f64,
    c_j: f64,
    c_0: f64,
    c_s: f64,
    c_g_left: f64,
    c_g_right: f64,
    c_c_left: f64,
    c_c_right: f64,
}

impl TryFrom<ArrayCircuitSpecJson> for ArrayCircuitSpec {
    type Error = Error;

    fn try_from(j: ArrayCircuitSpecJson) -> Result<Self> {
        ArrayCircuitSpec::new(
            j.n_junctions,
            j.l_j * NANOHENRY,
            j.c_j * FEMTOFARAD,
            j.c_0 * FEMTOFARAD,
            j.c_s * FEMTOFARAD,
            j.c_g_left * FEMTOFARAD,
            j.c_g_right * FEMTOFARAD,
            j.c_c_left * FEMTOFARAD,
            j.c_c_right * FEMTOFARAD,
        )
    }
}

impl From<ArrayCircuitSpec> for ArrayCircuitSpecJson {
    fn from(s: ArrayCircuitSpec) -> Self {
        ArrayCircuitSpecJson {
            n_junctions: s.n_junctions,
            l_j: s.l_j / NANOHENRY,
            c_j: s.c_j / FEMTOFARAD,
            c_0: s.c_0 / FEMTOFARAD,
            c_s: s.c_s / FEMTOFARAD,
            c_g_left: s.c_g_left / FEMTOFARAD,
            c_g_right: s.c_g_right / FEMTOFARAD,
            c_c_left: s.c_c_left / FEMTOFARAD,
            c_c_right: s.c_c_right / FEMTOFARAD,
        }
    }
}

impl ArrayCircuitSpec {
    /// Constructs a spec, enforcing the type invariants: N ≥ 1, l_j > 0,
    /// c_j > 0, all other capacitances ≥ 0 (c_0 may be zero for
    /// grounded-limit comparisons).
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n_junctions: usize,
        l_j: f64,
        c_j: f64,
        c_0: f64,
        c_s: f64,
        c_g_left: f64,
        c_g_right: f64,
        c_c_left: f64,
        c_c_right: f64,
    ) -> Result<Self> {
        let spec = Self {
            n_junctions,
            l_j,
            c_j,
            c_0,
            c_s,
            c_g_left,
            c_g_right,
            c_c_left,
            c_c_right,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_junctions == 0 {
            return Err(Error::InvalidInput("n_junctions must be >= 1".into()));
        }
        if !(self.l_j > 0.0) || !self.l_j.is_finite() {
            return Err(Error::InvalidInput(format!(
                "l_j must be positive, got {}",
                self.l_j
            )));
        }
        if !(self.c_j > 0.0) || !self.c_j.is_finite() {
            return Err(Error::InvalidInput(format!(
                "c_j must be positive, got {}",
                self.c_j
            )));
        }
        for (name, v) in [
            ("c_0", self.c_0),
            ("c_s", self.c_s),
            ("c_g_left", self.c_g_left),
            ("c_g_right", self.c_g_right),
            ("c_c_left", self.c_c_left),
            ("c_c_right", self.c_c_right),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Copy of the spec with a different ground capacitance.
    pub fn with_c0(&self, c_0: f64) -> Self {
        Self {
            c_0,
            ..self.clone()
        }
    }
}

/// Assembles the (N+1)x(N+1) capacitance matrix of the kinetic quadratic
/// form ½ Φ̇ᵀ C Φ̇.
///
/// Junction capacitances couple neighbors, c_0 loads interior islands,
/// (c_g + c_c) loads each paddle and c_s couples the paddles directly.
/// Errors if the result is not positive definite (a circuit with no path
/// to ground is degenerate).
pub fn build_capacitance_matrix(spec: &ArrayCircuitSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
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
    c[(0, 0)] += spec.c_g_left + spec.c_c_left + spec.c_s;
    c[(n, n)] += spec.c_g_right + spec.c_c_right + spec.c_s;
    c[(0, n)] -= spec.c_s;
    c[(n, 0)] -= spec.c_s;

    if nalgebra::Cholesky::new(c.clone()).is_none() {
        return Err(Error::NotPositiveDefinite(
            "circuit has no capacitive path to ground".into(),
        ));
    }
    Ok(c)
}

/// Assembles the (N+1)x(N+1) inverse-inductance matrix: (1/l_j) times the
/// chain-graph Laplacian. Positive semidefinite with exactly one zero
/// eigenvalue (the uniform flux shift).
pub fn build_inverse_inductance_matrix(spec: &ArrayCircuitSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let n = spec.n_junctions;
    let g = 1.0 / spec.l_j;
    let mut m = DMatrix::<f64>::zeros(n + 1, n + 1);
    for i in 0..n {
        m[(i, i)] += g;
        m[(i + 1, i + 1)] += g;
        m[(i, i + 1)] -= g;
        m[(i + 1, i)] -= g;
    }
    Ok(m)
}
