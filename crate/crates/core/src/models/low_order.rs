use std::f64::consts::PI;

use nalgebra::DVector;

use super::SystemModel;
use crate::error::{check_dim, Error, Result};

/// Rational second-order plant with three affinely entering parameters:
///
/// ```text
/// x1+ = x2
/// x2+ = (mu1 + mu2 x2 + mu3 x1) / (1 + 0.6 x2 + 1.1 x1) + u
/// y   = x1
/// ```
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LowOrderPlant;

/// Next state of the rational plant.
pub fn low_order_step(x: [f64; 2], u: f64, mu: [f64; 3]) -> Result<[f64; 2]> {
    let den = 1.0 + 0.6 * x[1] + 1.1 * x[0];
    if den == 0.0 || !den.is_finite() {
        return Err(Error::SingularDynamics { denominator: den });
    }
    let num = mu[0] + mu[1] * x[1] + mu[2] * x[0];
    Ok([x[1], num / den + u])
}

/// `u_k = 2 + sum_{i=1}^{15} sin(2 pi i k / 100)`.
pub fn multisine_input(k: usize) -> f64 {
    // Reducing k mod 100 keeps the argument small and the sequence exactly periodic.
    let phase = (k % 100) as f64 / 100.0;
    2.0 + (1..=15)
        .map(|i| (2.0 * PI * i as f64 * phase).sin())
        .sum::<f64>()
}

impl SystemModel for LowOrderPlant {
    fn state_dim(&self) -> usize {
        2
    }
    fn input_dim(&self) -> usize {
        1
    }
    fn output_dim(&self) -> usize {
        1
    }
    fn param_dim(&self) -> usize {
        3
    }

    fn step(&self, x: &DVector<f64>, u: &DVector<f64>, mu: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim("low-order state", 2, x.len())?;
        check_dim("low-order input", 1, u.len())?;
        check_dim("low-order parameter", 3, mu.len())?;
        let next = low_order_step([x[0], x[1]], u[0], [mu[0], mu[1], mu[2]])?;
        Ok(DVector::from_row_slice(&next))
    }

    fn output(
        &self,
        x: &DVector<f64>,
        _u: &DVector<f64>,
        _mu: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        check_dim("low-order state", 2, x.len())?;
        Ok(DVector::from_element(1, x[0]))
    }
}
