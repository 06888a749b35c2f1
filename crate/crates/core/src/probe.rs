//! Room-temperature probe analysis: Ambegaokar-Baratoff conversion,
//! parallel-resistance model of an array shunted by the substrate, and
//! per-condition probe statistics.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::constants::FLUX_QUANTUM;
use crate::error::{Error, Result};
use crate::lm::{self, FdScheme, LmOptions};

/// Conventional thin-film aluminum superconducting gap, eV.
pub const DEFAULT_GAP_EV: f64 = 180e-6;

/// Two-point probe resistances grouped by junction count.
#[derive(Debug, Clone)]
pub struct ProbeDataset {
    pub records: Vec<ProbeRecord>,
}

#[derive(Debug, Clone)]
pub struct ProbeRecord {
    pub n_junctions: usize,
    pub resistances: Vec<f64>,
}

impl ProbeRecord {
    pub fn mean(&self) -> f64 {
        self.resistances.iter().sum::<f64>() / self.resistances.len() as f64
    }

    /// Sample standard deviation (n−1 denominator); zero for a single value.
    pub fn std(&self) -> f64 {
        if self.resistances.len() < 2 {
            return 0.0;
        }
        let m = self.mean();
        let ss: f64 = self.resistances.iter().map(|r| (r - m) * (r - m)).sum();
        (ss / (self.resistances.len() - 1) as f64).sqrt()
    }
}

impl ProbeDataset {
    pub fn new(records: Vec<ProbeRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::InvalidInput("empty probe dataset".into()));
        }
        for r in &records {
            if r.resistances.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "no resistances for n = {}",
                    r.n_junctions
                )));
            }
            if r.resistances.iter().any(|&x| !(x > 0.0)) {
                return Err(Error::InvalidInput(format!(
                    "non-positive resistance for n = {}",
                    r.n_junctions
                )));
            }
        }
        Ok(Self { records })
    }

    /// Reads the long-format CSV (columns `n_junctions`, `resistance_ohm`)
    /// and groups rows by junction count.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
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
        let n_col = col("n_junctions")?;
        let r_col = col("resistance_ohm")?;
        let mut grouped: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            let n: usize = rec[n_col]
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad n_junctions: {}", &rec[n_col])))?;
            let r: f64 = rec[r_col]
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad resistance_ohm: {}", &rec[r_col])))?;
            grouped.entry(n).or_default().push(r);
        }
        let records = grouped
            .into_iter()
            .map(|(n_junctions, resistances)| ProbeRecord {
                n_junctions,
                resistances,
            })
            .collect();
        Self::new(records)
    }
}

/// Parallel-resistance model parameters for an array probed through the
/// substrate.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeFit {
    /// Resistance per junction, Ω.
    pub r_junction: f64,
    /// Substrate shunt resistance, Ω.
    pub r_substrate: f64,
    /// Covariance of (r_junction, r_substrate).
    pub covariance: [[f64; 2]; 2],
}

/// Critical current from the normal-state resistance: I_c R_n = πΔ/2e.
/// `gap` is the superconducting gap in eV, so πΔ/2e is simply π·gap/2 volts.
pub fn ab_critical_current(r_n: f64, gap_ev: f64) -> Result<f64> {
    if !(r_n > 0.0) {
        return Err(Error::InvalidInput(format!(
            "normal-state resistance must be positive, got {r_n}"
        )));
    }
    if !(gap_ev > 0.0) {
        return Err(Error::InvalidInput(format!(
            "superconducting gap must be positive, got {gap_ev}"
        )));
    }
    Ok(std::f64::consts::PI * gap_ev / (2.0 * r_n))
}

/// Josephson inductance of a junction with critical current `i_c`:
/// L_J = Φ0/(2π I_c).
pub fn junction_inductance(i_c: f64) -> Result<f64> {
    if !(i_c > 0.0) {
        return Err(Error::InvalidInput(format!(
            "critical current must be positive, got {i_c}"
        )));
    }
    Ok(FLUX_QUANTUM / (std::f64::consts::TAU * i_c))
}

/// Normal-state resistance that yields junction inductance `l_j` through
/// the Ambegaokar-Baratoff chain; inverse of
/// `junction_inductance(ab_critical_current(..))`.
pub fn resistance_for_inductance(l_j: f64, gap_ev: f64) -> Result<f64> {
    if !(l_j > 0.0) || !(gap_ev > 0.0) {
        return Err(Error::InvalidInput(
            "inductance and gap must be positive".into(),
        ));
    }
    let i_c = FLUX_QUANTUM / (std::f64::consts::TAU * l_j);
    Ok(std::f64::consts::PI * gap_ev / (2.0 * i_c))
}

/// Measured two-point resistance of an n-junction array in parallel with the
/// substrate path: R = n·r_j·r_sub / (n·r_j + r_sub).
pub fn parallel_model(n: usize, r_j: f64, r_sub: f64) -> f64 {
    let series = n as f64 * r_j;
    series * r_sub / (series + r_sub)
}

/// Weighted nonlinear least squares of [`parallel_model`] over
/// (r_junction, r_substrate), log-parameterized for positivity.
///
/// Weights are 1/σ² from the per-count sample deviations when every record
/// carries at least two values; unit weights otherwise.
pub fn fit_probe(dataset: &ProbeDataset) -> Result<ProbeFit> {
    let mut by_n: BTreeMap<usize, &ProbeRecord> = BTreeMap::new();
    for r in &dataset.records {
        by_n.insert(r.n_junctions, r);
    }
    if by_n.len() < 2 {
        return Err(Error::SingularFit(
            "need at least 2 distinct junction counts".into(),
        ));
    }

    let counts: Vec<usize> = by_n.keys().copied().collect();
    let means: Vec<f64> = by_n.values().map(|r| r.mean()).collect();
    let use_weights = by_n.values().all(|r| r.resistances.len() >= 2);
    let weights: Vec<f64> = if use_weights {
        by_n.values()
            .map(|r| {
                let s = r.std().max(1e-6 * r.mean());
                1.0 / s
            })
            .collect()
    } else {
        vec![1.0; by_n.len()]
    };

    // initial guess: smallest array is least shunted by the substrate
    let rj0 = (means[0] / counts[0] as f64).max(1e-6);
    let rsub0 = 10.0 * means.last().unwrap();

    let residual = |logp: &[f64]| -> Result<Vec<f64>> {
        let (rj, rsub) = (logp[0].exp(), logp[1].exp());
        Ok(counts
            .iter()
            .zip(&means)
            .zip(&weights)
            .map(|((&n, &m), &w)| w * (parallel_model(n, rj, rsub) - m))
            .collect())
    };

    let opts = LmOptions {
        max_iterations: 300,
        relative_step_tol: 1e-12,
        fd_scheme: FdScheme::Central,
        ..Default::default()
    };
    let out = lm::least_squares(residual, &[rj0.ln(), rsub0.ln()], &opts)?;
    if !out.converged {
        return Err(Error::NoConvergence(format!(
            "probe fit stalled at cost {:.3e}",
            out.cost
        )));
    }
    let r_junction = out.params[0].exp();
    let r_substrate = out.params[1].exp();

    // delta method: cov(r) = J_t cov(log r) J_tᵀ with J_t = diag(r)
    let cov_log = out
        .covariance()
        .unwrap_or_else(|| nalgebra::DMatrix::zeros(2, 2));
    let mut covariance = [[0.0; 2]; 2];
    let scales = [r_junction, r_substrate];
    for i in 0..2 {
        for j in 0..2 {
            covariance[i][j] = cov_log[(i, j)] * scales[i] * scales[j];
        }
    }

    Ok(ProbeFit {
        r_junction,
        r_substrate,
        covariance,
    })
}

/// Sample mean, sample standard deviation (n−1), and their ratio.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProbeStats {
    pub mean: f64,
    pub std: f64,
    pub cov: f64,
}

pub fn probe_stats(resistances: &[f64]) -> Result<ProbeStats> {
    if resistances.is_empty() {
        return Err(Error::InvalidInput("empty resistance list".into()));
    }
    let n = resistances.len() as f64;
    let mean = resistances.iter().sum::<f64>() / n;
    let std = if resistances.len() < 2 {
        0.0
    } else {
        let ss: f64 = resistances.iter().map(|r| (r - mean) * (r - mean)).sum();
        (ss / (n - 1.0)).sqrt()
    };
    Ok(ProbeStats {
        mean,
        std,
        cov: std / mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ab_inverse_proportionality() {
        let i1 = ab_critical_current(782.0, DEFAULT_GAP_EV).unwrap();
        let i2 = ab_critical_current(1564.0, DEFAULT_GAP_EV).unwrap();
        assert!(((i1 / i2) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn ab_frozen_value() {
        // pi*Delta/2e = 2.827e-4 V at 180 ueV
        let i = ab_critical_current(782.0, DEFAULT_GAP_EV).unwrap();
        assert!(((i - 3.615_643_7e-7) / i).abs() < 1e-6, "Ic = {i}");
    }

    #[test]
    fn inductance_chain_anchors() {
        // resistances back-solved from the target inductances round-trip
        for l_target in [0.91e-9, 1.10e-9] {
            let rn = resistance_for_inductance(l_target, DEFAULT_GAP_EV).unwrap();
            let l = junction_inductance(ab_critical_current(rn, DEFAULT_GAP_EV).unwrap()).unwrap();
            assert!(((l - l_target) / l_target).abs() < 1e-12);
        }
        // frozen intermediate values
        let rn = resistance_for_inductance(0.91e-9, DEFAULT_GAP_EV).unwrap();
        assert!((rn - 781.8).abs() < 0.1, "Rn = {rn}");
        let rn = resistance_for_inductance(1.10e-9, DEFAULT_GAP_EV).unwrap();
        assert!((rn - 945.0).abs() < 0.1, "Rn = {rn}");
    }

    #[test]
    fn junction_inductance_identity() {
        let i_c = FLUX_QUANTUM / (std::f64::consts::TAU * 1e-9);
        let l = junction_inductance(i_c).unwrap();
        assert!(((l - 1e-9) / 1e-9).abs() < 1e-14);
    }

    #[test]
    fn parallel_model_values() {
        let r = parallel_model(500, 782.0, 670e3);
        assert!((r - 246.9e3).abs() / r < 1e-3, "R = {r}");
        let r = parallel_model(500, 905.0, 1000e3);
        assert!((r - 311.5e3).abs() / r < 1e-3, "R = {r}");
        // r_sub -> infinity recovers the series resistance
        let r = parallel_model(500, 782.0, 1e15);
        assert!((r - 500.0 * 782.0).abs() / r < 1e-6);
    }

    #[test]
    fn probe_fit_noise_free_round_trip() {
        let (rj, rsub) = (782.0, 670e3);
        let records = (1..=5)
            .map(|k| ProbeRecord {
                n_junctions: 100 * k,
                resistances: vec![parallel_model(100 * k, rj, rsub)],
            })
            .collect();
        let fit = fit_probe(&ProbeDataset::new(records).unwrap()).unwrap();
        assert!(
            ((fit.r_junction - rj) / rj).abs() < 1e-3,
            "{}",
            fit.r_junction
        );
        assert!(
            ((fit.r_substrate - rsub) / rsub).abs() < 1e-3,
            "{}",
            fit.r_substrate
        );
    }

    #[test]
    fn probe_fit_single_count_is_singular() {
        let dataset = ProbeDataset::new(vec![ProbeRecord {
            n_junctions: 200,
            resistances: vec![1.0e5, 1.1e5],
        }])
        .unwrap();
        match fit_probe(&dataset) {
            Err(Error::SingularFit(_)) => {}
            other => panic!("expected SingularFit, got {other:?}"),
        }
    }

    #[test]
    fn stats_examples() {
        let s = probe_stats(&[5.0, 5.0, 5.0]).unwrap();
        assert_eq!(s.std, 0.0);
        let s = probe_stats(&[1.0, 3.0]).unwrap();
        assert_eq!(s.mean, 2.0);
        assert!((s.std - std::f64::consts::SQRT_2).abs() < 1e-15);
        // table anchor: 55.3 kOhm mean, 6.4 kOhm std -> 0.12
        assert!(((6.4f64 / 55.3) * 100.0).round() / 100.0 == 0.12);
    }

    proptest! {
        #[test]
        fn parallel_below_both_branches(
            n in 1usize..2000,
            rj in 1.0f64..1e4,
            rsub in 1.0f64..1e7,
        ) {
            let r = parallel_model(n, rj, rsub);
            prop_assert!(r < n as f64 * rj);
            prop_assert!(r < rsub);
        }

        #[test]
        fn ab_round_trip_identity(rn in 10.0f64..1e5) {
            let i = ab_critical_current(rn, DEFAULT_GAP_EV).unwrap();
            let back = std::f64::consts::PI * DEFAULT_GAP_EV / (2.0 * i);
            prop_assert!(((back - rn) / rn).abs() < 1e-12);
        }
    }

    #[test]
    fn probe_fit_scale_equivariant() {
        let (rj, rsub, c) = (800.0, 5e5, 3.7);
        let base: Vec<ProbeRecord> = (1..=5)
            .map(|k| ProbeRecord {
                n_junctions: 100 * k,
                resistances: vec![parallel_model(100 * k, rj, rsub)],
            })
            .collect();
        let scaled: Vec<ProbeRecord> = base
            .iter()
            .map(|r| ProbeRecord {
                n_junctions: r.n_junctions,
                resistances: r.resistances.iter().map(|x| c * x).collect(),
            })
            .collect();
        let f1 = fit_probe(&ProbeDataset::new(base).unwrap()).unwrap();
        let f2 = fit_probe(&ProbeDataset::new(scaled).unwrap()).unwrap();
        assert!(((f2.r_junction - c * f1.r_junction) / f2.r_junction).abs() < 1e-6);
        assert!(((f2.r_substrate - c * f1.r_substrate) / f2.r_substrate).abs() < 1e-6);
    }
}
