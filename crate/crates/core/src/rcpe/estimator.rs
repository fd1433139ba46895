use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::config::RcpeConfig;
use super::ops::{apply_output_map, build_regressor, compute_pre_estimate, update_integrator};
use crate::error::{check_dim, Error, Result};

/// Largest admissible condition number of `Gamma_k` before the step is refused.
pub const GAMMA_CONDITION_LIMIT: f64 = 1e14;

/// Evolving quantities of the estimator at step `k`.
///
/// `phi_history[0]` is `Phi_{k-1}` and `nu_history[0]` is `nu_{k-1}`; slots
/// before the first step are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorState {
    pub phi: DVector<f64>,
    pub theta: DVector<f64>,
    pub p: DMatrix<f64>,
    /// Current pre-estimate `nu_k = Phi_k theta_k`.
    pub nu: DVector<f64>,
    pub phi_history: VecDeque<DMatrix<f64>>,
    pub nu_history: VecDeque<DVector<f64>>,
    pub step: usize,
}

impl EstimatorState {
    /// Initial state: `theta_0 = 0`, `phi_0 = 0`, `P_0 = R_theta^{-1}`.
    pub fn new(cfg: &RcpeConfig) -> Result<Self> {
        cfg.validate()?;
        let (l_mu, l_y, l_theta, n_f) = (cfg.l_mu(), cfg.l_y(), cfg.l_theta(), cfg.n_f());
        let p = cfg
            .r_theta
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Config("R_theta must be positive definite".into()))?
            .inverse();
        Ok(Self {
            phi: DVector::zeros(l_y),
            theta: DVector::zeros(l_theta),
            p: symmetrize(p),
            nu: DVector::zeros(l_mu),
            phi_history: (0..n_f).map(|_| DMatrix::zeros(l_mu, l_theta)).collect(),
            nu_history: (0..n_f).map(|_| DVector::zeros(l_mu)).collect(),
            step: 0,
        })
    }

    /// Regressor `Phi_k` for the current integrator state.
    pub fn regressor(&self) -> DMatrix<f64> {
        build_regressor(&self.phi, self.nu.len())
    }
}

/// Stacks the histories into `Phibar_k = [Phi_{k-1}; ...; Phi_{k-nf}]` and
/// `Vbar_k = [nu_{k-1}; ...; nu_{k-nf}]`.
pub fn stack_history(state: &EstimatorState) -> (DMatrix<f64>, DVector<f64>) {
    let n_f = state.phi_history.len();
    let l_mu = state.nu.len();
    let l_theta = state.theta.len();
    let mut phibar = DMatrix::zeros(n_f * l_mu, l_theta);
    let mut vbar = DVector::zeros(n_f * l_mu);
    for (i, (phi, nu)) in state.phi_history.iter().zip(&state.nu_history).enumerate() {
        phibar
            .view_mut((i * l_mu, 0), (l_mu, l_theta))
            .copy_from(phi);
        vbar.rows_mut(i * l_mu, l_mu).copy_from(nu);
    }
    (phibar, vbar)
}

/// One recursive least-squares update of `theta` and `P` minimizing the
/// retrospective cost with the data available at step `k`.
pub fn rls_step(state: &mut EstimatorState, z: &DVector<f64>, cfg: &RcpeConfig) -> Result<()> {
    let k = state.step;
    check_dim("rls step (z)", cfg.l_y(), z.len())?;
    if !z.iter().all(|v| v.is_finite()) {
        return Err(Error::Divergence {
            step: k,
            reason: "non-finite output error".into(),
        });
    }
    let (phibar, vbar) = stack_history(state);
    let n = cfg.stacked_filter();
    let lambda = cfg.lambda;
    let l_y = cfg.l_y();

    let h = &n * &phibar;
    let p = &state.p;
    let pht = p * h.transpose();
    let gamma = symmetrize(DMatrix::identity(l_y, l_y) * lambda + &h * &pht);
    let cond = condition_number(&gamma);
    if !(cond <= GAMMA_CONDITION_LIMIT) {
        return Err(Error::NumericalFailure {
            step: k,
            reason: format!("Gamma is numerically singular (condition estimate {cond:e})"),
        });
    }
    let chol = gamma.cholesky().ok_or_else(|| Error::NumericalFailure {
        step: k,
        reason: "Gamma is not positive definite".into(),
    })?;
    let gain_rhs = chol.solve(&pht.transpose());
    let p_next = symmetrize((p - &pht * gain_rhs) / lambda);
    if !p_next.iter().all(|v| v.is_finite()) || p_next.clone().cholesky().is_none() {
        return Err(Error::NumericalFailure {
            step: k,
            reason: "P lost positive definiteness".into(),
        });
    }
    let innovation = &h * &state.theta + z - &n * &vbar;
    let theta_next = &state.theta - &p_next * h.transpose() * innovation;
    if !theta_next.iter().all(|v| v.is_finite()) {
        return Err(Error::Divergence {
            step: k,
            reason: "non-finite estimator coefficient".into(),
        });
    }
    state.p = p_next;
    state.theta = theta_next;
    Ok(())
}

/// Result of one estimator step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub mu_hat: DVector<f64>,
    pub nu: DVector<f64>,
    pub saturated: bool,
}

/// Advances the estimator from step `k` to `k + 1` given the output error `z_k`.
///
/// The coefficient update is skipped at `k = 0`, where the retrospective cost
/// holds only the regularization term and its minimizer is `theta_1 = 0`.
pub fn estimator_step(
    state: &mut EstimatorState,
    z: &DVector<f64>,
    cfg: &RcpeConfig,
) -> Result<StepOutput> {
    check_dim("estimator step (z)", cfg.l_y(), z.len())?;
    let mut next = state.clone();
    if next.step >= 1 {
        rls_step(&mut next, z, cfg)?;
    } else if !z.iter().all(|v| v.is_finite()) {
        return Err(Error::Divergence {
            step: 0,
            reason: "non-finite output error".into(),
        });
    }
    let current_regressor = next.regressor();
    let current_nu = next.nu.clone();
    next.phi_history.push_front(current_regressor);
    next.phi_history.pop_back();
    next.nu_history.push_front(current_nu);
    next.nu_history.pop_back();

    next.phi = update_integrator(&next.phi, z)?;
    next.nu = compute_pre_estimate(&next.regressor(), &next.theta)?;
    next.step += 1;

    let (mu_hat, saturated) = saturate(apply_output_map(&next.nu, cfg), cfg);
    let out = StepOutput {
        mu_hat,
        nu: next.nu.clone(),
        saturated,
    };
    *state = next;
    Ok(out)
}

fn saturate(mu_hat: DVector<f64>, cfg: &RcpeConfig) -> (DVector<f64>, bool) {
    match &cfg.saturation {
        Some(upper) => {
            let clipped = mu_hat.zip_map(upper, |m, u| m.min(u));
            let hit = clipped != mu_hat;
            (clipped, hit)
        }
        None => (mu_hat, false),
    }
}

/// Online estimator owning its configuration and state.
#[derive(Debug, Clone)]
pub struct Estimator {
    cfg: RcpeConfig,
    state: EstimatorState,
}

impl Estimator {
    pub fn new(cfg: RcpeConfig) -> Result<Self> {
        let state = EstimatorState::new(&cfg)?;
        Ok(Self { cfg, state })
    }

    pub fn config(&self) -> &RcpeConfig {
        &self.cfg
    }

    pub fn state(&self) -> &EstimatorState {
        &self.state
    }

    /// Estimate `mu_hat_k` for the current step.
    pub fn estimate(&self) -> DVector<f64> {
        saturate(apply_output_map(&self.state.nu, &self.cfg), &self.cfg).0
    }

    pub fn step(&mut self, z: &DVector<f64>) -> Result<StepOutput> {
        estimator_step(&mut self.state, z, &self.cfg)
    }
}

pub(crate) fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

fn condition_number(sym: &DMatrix<f64>) -> f64 {
    let eig = sym.clone().symmetric_eigenvalues();
    let max = eig.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let min = eig.iter().fold(f64::INFINITY, |a, &v| a.min(v.abs()));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
