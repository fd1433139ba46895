use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Central-difference gradient with the same step `delta` in every coordinate.
///
/// The cost is evaluated exactly `2 l_mu` times; evaluations run in parallel.
pub fn fd_gradient<F>(cost: F, mu: &DVector<f64>, delta: f64) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> Result<f64> + Sync,
{
    let steps = vec![delta; mu.len()];
    fd_gradient_with_steps(cost, mu, &steps)
}

/// Central-difference gradient with a per-coordinate step.
pub fn fd_gradient_with_steps<F>(cost: F, mu: &DVector<f64>, steps: &[f64]) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> Result<f64> + Sync,
{
    if steps.len() != mu.len() || steps.iter().any(|&h| !(h > 0.0)) {
        return Err(Error::Config(
            "finite-difference steps must be positive, one per parameter".into(),
        ));
    }
    let evals: Vec<f64> = (0..2 * mu.len())
        .into_par_iter()
        .map(|e| {
            let (i, sign) = (e / 2, if e % 2 == 0 { 1.0 } else { -1.0 });
            let mut probe = mu.clone();
            probe[i] += sign * steps[i];
            cost(&probe)
        })
        .collect::<Result<_>>()?;
    Ok(DVector::from_fn(mu.len(), |i, _| {
        (evals[2 * i] - evals[2 * i + 1]) / (2.0 * steps[i])
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentConfig {
    pub gamma: f64,
    pub max_iters: usize,
    /// Step scale relative to `|mu_i| + 1`.
    pub delta: f64,
    /// Stop once `|mu(j) - mu(j-1)|` falls below this.
    pub step_tol: f64,
}

impl Default for DescentConfig {
    fn default() -> Self {
        Self {
            gamma: 1e-2,
            max_iters: 1000,
            delta: 1e-6,
            step_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DescentTrajectory {
    pub estimates: Vec<DVector<f64>>,
    /// `costs[j]` is the cost at `estimates[j]`.
    pub costs: Vec<f64>,
    /// Set when the run stopped on a failing or non-finite cost.
    pub aborted: Option<Error>,
}

impl DescentTrajectory {
    pub fn last(&self) -> &DVector<f64> {
        self.estimates
            .last()
            .expect("trajectory holds the initial estimate")
    }
}

/// Fixed-step gradient descent `mu(j) = mu(j-1) - gamma dJ/dmu` using central differences.
pub fn gradient_descent<F>(cost: F, mu0: &DVector<f64>, cfg: &DescentConfig) -> DescentTrajectory
where
    F: Fn(&DVector<f64>) -> Result<f64> + Sync,
{
    let mut traj = DescentTrajectory {
        estimates: vec![mu0.clone()],
        costs: Vec::new(),
        aborted: None,
    };
    if !(cfg.gamma >= 0.0) {
        traj.aborted = Some(Error::Config("gamma must be nonnegative".into()));
        return traj;
    }
    match checked(&cost, mu0, 0) {
        Ok(j) => traj.costs.push(j),
        Err(e) => {
            traj.aborted = Some(e);
            return traj;
        }
    }
    for iter in 1..=cfg.max_iters {
        let mu = traj.last().clone();
        let steps: Vec<f64> = mu.iter().map(|m| cfg.delta * (m.abs() + 1.0)).collect();
        let grad = match fd_gradient_with_steps(&cost, &mu, &steps) {
            Ok(g) => g,
            Err(e) => {
                traj.aborted = Some(e);
                break;
            }
        };
        let next = &mu - grad * cfg.gamma;
        let moved = (&next - &mu).norm();
        match checked(&cost, &next, iter) {
            Ok(j) => {
                traj.costs.push(j);
                traj.estimates.push(next);
            }
            Err(e) => {
                traj.aborted = Some(e);
                break;
            }
        }
        if moved < cfg.step_tol {
            break;
        }
    }
    traj
}

fn checked<F>(cost: &F, mu: &DVector<f64>, iter: usize) -> Result<f64>
where
    F: Fn(&DVector<f64>) -> Result<f64>,
{
    let j = cost(mu)?;
    if j.is_finite() {
        Ok(j)
    } else {
        Err(Error::Divergence {
            step: iter,
            reason: "non-finite cost".into(),
        })
    }
}
