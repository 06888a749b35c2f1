//! Small dense Levenberg-Marquardt solver shared by the fitters.
//!
//! Damped Gauss-Newton with Marquardt diagonal scaling; a step is accepted
//! only if it decreases the residual sum of squares. Jacobians are computed
//! by finite differences with per-parameter relative steps, so callers can
//! mix wildly different parameter scales.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub enum FdScheme {
    Forward,
    Central,
}

#[derive(Debug, Clone)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Converged when every |δ_j| falls below
    /// `relative_step_tol * max(|p_j|, scale_j)`; the per-parameter
    /// criterion keeps large-magnitude parameters (e.g. frequencies in Hz)
    /// from masking small ones (angles, delays).
    pub relative_step_tol: f64,
    /// Converged when the RMS residual changes by less than this (residual
    /// units) on an accepted step.
    pub rms_change_tol: f64,
    pub fd_scheme: FdScheme,
    /// Relative finite-difference step. The step for parameter j is
    /// `fd_step * max(|p_j|, scale_j)` with `scale_j` from `fd_scales`
    /// (1e-8 when unset), so zero-valued parameters still get a usable
    /// perturbation.
    pub fd_step: f64,
    /// Characteristic magnitude per parameter, used as the floor in the
    /// finite-difference step. Empty means 1e-8 for every parameter.
    pub fd_scales: Vec<f64>,
    pub lambda_init: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            relative_step_tol: 1e-10,
            rms_change_tol: 0.0,
            fd_scheme: FdScheme::Central,
            fd_step: 1e-6,
            fd_scales: Vec::new(),
            lambda_init: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmResult {
    pub params: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Sum of squared residuals at the solution.
    pub cost: f64,
    /// Accepted iterations.
    pub iterations: usize,
    pub converged: bool,
    /// JᵀJ at the solution, for covariance estimates.
    pub jtj: DMatrix<f64>,
}

impl LmResult {
    /// Covariance of the parameter estimates: s² (JᵀJ)⁻¹ with
    /// s² = cost / (m − n). None when the system is degenerate.
    pub fn covariance(&self) -> Option<DMatrix<f64>> {
        let m = self.residuals.len();
        let n = self.params.len();
        if m <= n {
            return None;
        }
        let s2 = self.cost / (m - n) as f64;
        self.jtj.clone().try_inverse().map(|inv| inv * s2)
    }
}

pub fn least_squares<F>(residual_fn: F, p0: &[f64], opts: &LmOptions) -> Result<LmResult>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = p0.len();
    let mut p = DVector::from_column_slice(p0);
    let mut r = DVector::from_vec(residual_fn(p.as_slice())?);
    let m = r.len();
    if m < n {
        return Err(Error::InvalidInput(format!(
            "{m} residuals cannot constrain {n} parameters"
        )));
    }
    let mut cost = r.norm_squared();
    let mut lambda = opts.lambda_init;
    let mut iterations = 0usize;
    let mut converged = false;
    let mut jac = jacobian(&residual_fn, &p, &r, opts)?;

    for _ in 0..opts.max_iterations {
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * &r;

        if g.amax() == 0.0 {
            converged = true; // stationary point (e.g. exact fit)
            break;
        }

        // inner damping loop: raise lambda until a step decreases the cost
        let mut accepted = false;
        for _ in 0..40 {
            let mut a = jtj.clone();
            for i in 0..n {
                let d = jtj[(i, i)];
                if d == 0.0 {
                    return Err(Error::SingularFit(format!(
                        "parameter {i} has zero sensitivity (singular Jacobian)"
                    )));
                }
                a[(i, i)] = d * (1.0 + lambda);
            }
            let chol = match nalgebra::Cholesky::new(a) {
                Some(c) => c,
                None => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let delta = chol.solve(&(-&g));

            let step_small = (0..n).all(|j| {
                let floor = opts.fd_scales.get(j).copied().unwrap_or(1e-8);
                delta[j].abs() <= opts.relative_step_tol * p[j].abs().max(floor)
            });
            if step_small {
                converged = true;
                break;
            }

            let p_try = &p + &delta;
            let r_try = DVector::from_vec(residual_fn(p_try.as_slice())?);
            let cost_try = r_try.norm_squared();
            if cost_try < cost {
                let rms_change = ((cost / m as f64).sqrt() - (cost_try / m as f64).sqrt()).abs();
                p = p_try;
                r = r_try;
                cost = cost_try;
                lambda = (lambda * 0.25).max(1e-12);
                iterations += 1;
                accepted = true;
                if rms_change < opts.rms_change_tol {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }

        if converged {
            break;
        }
        if !accepted {
            // no damping produced a decrease: the iterate is a local
            // minimum to working precision
            converged = true;
            break;
        }
        jac = jacobian(&residual_fn, &p, &r, opts)?;
    }

    let jtj = jac.transpose() * &jac;
    Ok(LmResult {
        params: p.as_slice().to_vec(),
        residuals: r.as_slice().to_vec(),
        cost,
        iterations,
        converged,
        jtj,
    })
}

fn jacobian<F>(
    residual_fn: &F,
    p: &DVector<f64>,
    r0: &DVector<f64>,
    opts: &LmOptions,
) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = p.len();
    let m = r0.len();
    let mut jac = DMatrix::<f64>::zeros(m, n);
    for j in 0..n {
        let floor = opts.fd_scales.get(j).copied().unwrap_or(1e-8);
        let h = opts.fd_step * p[j].abs().max(floor);
        match opts.fd_scheme {
            FdScheme::Forward => {
                let mut pp = p.clone();
                pp[j] += h;
                let rp = residual_fn(pp.as_slice())?;
                if rp.len() != m {
                    return Err(Error::InvalidInput("residual length changed".into()));
                }
                for i in 0..m {
                    jac[(i, j)] = (rp[i] - r0[i]) / h;
                }
            }
            FdScheme::Central => {
                let mut pp = p.clone();
                let mut pm = p.clone();
                pp[j] += h;
                pm[j] -= h;
                let rp = residual_fn(pp.as_slice())?;
                let rm = residual_fn(pm.as_slice())?;
                if rp.len() != m || rm.len() != m {
                    return Err(Error::InvalidInput("residual length changed".into()));
                }
                for i in 0..m {
                    jac[(i, j)] = (rp[i] - rm[i]) / (2.0 * h);
                }
            }
        }
    }
    Ok(jac)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exponential_decay() {
        // y = a exp(-b x) sampled exactly; start from a perturbed guess
        let xs: Vec<f64> = (0..30).map(|i| i as f64 * 0.1).collect();
        let truth = (2.5, 1.3);
        let ys: Vec<f64> = xs.iter().map(|&x| truth.0 * (-truth.1 * x).exp()).collect();
        let res = |p: &[f64]| -> Result<Vec<f64>> {
            Ok(xs
                .iter()
                .zip(&ys)
                .map(|(&x, &y)| p[0] * (-p[1] * x).exp() - y)
                .collect())
        };
        let out = least_squares(res, &[1.0, 2.0], &LmOptions::default()).unwrap();
        assert!(out.converged);
        assert!((out.params[0] - truth.0).abs() < 1e-8);
        assert!((out.params[1] - truth.1).abs() < 1e-8);
    }

    #[test]
    fn exact_start_takes_zero_accepted_steps() {
        let res = |p: &[f64]| -> Result<Vec<f64>> { Ok(vec![p[0] - 1.0, 2.0 * (p[1] - 3.0)]) };
        let out = least_squares(res, &[1.0, 3.0], &LmOptions::default()).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 0);
        assert!(out.cost < 1e-30);
    }

    #[test]
    fn insensitive_parameter_is_singular() {
        // residuals ignore p[1]
        let res = |p: &[f64]| -> Result<Vec<f64>> { Ok(vec![p[0] - 1.0, 2.0 * p[0] + 1.0]) };
        match least_squares(res, &[0.0, 5.0], &LmOptions::default()) {
            Err(Error::SingularFit(_)) => {}
            other => panic!("expected SingularFit, got {other:?}"),
        }
    }

    #[test]
    fn covariance_shape() {
        let res = |p: &[f64]| -> Result<Vec<f64>> {
            Ok((0..10).map(|i| p[0] * i as f64 + p[1] - i as f64).collect())
        };
        let out = least_squares(res, &[0.5, 0.5], &LmOptions::default()).unwrap();
        let cov = out.covariance().unwrap();
        assert_eq!(cov.shape(), (2, 2));
    }
}
