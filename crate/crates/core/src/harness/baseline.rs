use super::closed_loop::PlantInstance;
use super::config::ExperimentConfig;
use crate::baselines::{
    batch_cost, gradient_descent, BatchCostConfig, DescentConfig, DescentTrajectory,
};
use crate::error::Result;
use crate::models::simulate;

/// Fits `mu` by gradient descent on the batch output cost over the configured horizon.
///
/// Measurements come from the truth model started at `x0`; the cost simulates
/// the estimation model from the same `x0`. Descent starts at `mu_bar`.
pub fn run_baseline(cfg: &ExperimentConfig, descent: &DescentConfig) -> Result<DescentTrajectory> {
    cfg.validate()?;
    let plant = PlantInstance::new(cfg)?;
    let model = plant.model();
    let inputs: Vec<_> = (0..cfg.horizon).map(|k| plant.input(k)).collect();
    let outputs = simulate(model, &cfg.x0, &inputs, &cfg.mu_true)?;
    let cost_cfg = BatchCostConfig::default();
    let cost =
        |mu: &nalgebra::DVector<f64>| batch_cost(model, mu, &cfg.x0, &inputs, &outputs, &cost_cfg);
    Ok(gradient_descent(cost, &cfg.rcpe.mu_bar, descent))
}
