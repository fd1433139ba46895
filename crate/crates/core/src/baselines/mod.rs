//! Traditional estimators used as comparison points: simulated batch cost,
//! linear-regression RLS, finite-difference gradient descent and the
//! augmented-state model used by joint state/parameter filters.

mod augmented;
mod gradient;
mod linear_rls;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::models::SystemModel;

pub use augmented::{augment, AugmentedModel};
pub use gradient::{
    fd_gradient, fd_gradient_with_steps, gradient_descent, DescentConfig, DescentTrajectory,
};
pub use linear_rls::{linear_rls, LinearRls};

/// Output weights `W_i` of the batch cost. `None` means identity weights.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BatchCostConfig {
    pub weights: Option<Vec<DMatrix<f64>>>,
}

impl BatchCostConfig {
    pub fn validate(&self, l_y: usize, horizon: usize) -> Result<()> {
        let Some(ws) = &self.weights else {
            return Ok(());
        };
        check_dim("batch cost weights", horizon, ws.len())?;
        for w in ws {
            if w.shape() != (l_y, l_y) {
                return Err(Error::Config(format!(
                    "weight has shape {:?}, expected {l_y}x{l_y}",
                    w.shape()
                )));
            }
            let asym = (w - w.transpose()).amax();
            if asym > 1e-12 * w.amax() || w.clone().cholesky().is_none() {
                return Err(Error::Config(
                    "weights must be symmetric positive definite".into(),
                ));
            }
        }
        Ok(())
    }
}

/// `J(mu_hat) = sum_i (y_i - yhat_i)^T W_i (y_i - yhat_i)` with `yhat` simulated from `x0`.
pub fn batch_cost<M: SystemModel + ?Sized>(
    model: &M,
    mu_hat: &DVector<f64>,
    x0: &DVector<f64>,
    inputs: &[DVector<f64>],
    outputs: &[DVector<f64>],
    cfg: &BatchCostConfig,
) -> Result<f64> {
    check_dim("batch cost sequences", inputs.len(), outputs.len())?;
    cfg.validate(model.output_dim(), outputs.len())?;
    let mut x = x0.clone();
    let mut total = 0.0;
    for (i, (u, y)) in inputs.iter().zip(outputs).enumerate() {
        let e = y - model.output(&x, u, mu_hat)?;
        total += match &cfg.weights {
            Some(ws) => e.dot(&(&ws[i] * &e)),
            None => e.norm_squared(),
        };
        x = model.step(&x, u, mu_hat)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{multisine_input, simulate, LowOrderPlant};

    /// Output-only model `y = x`, `x+ = u`, so outputs equal the inputs shifted by one.
    struct Passthrough;

    impl SystemModel for Passthrough {
        fn state_dim(&self) -> usize {
            1
        }
        fn input_dim(&self) -> usize {
            1
        }
        fn output_dim(&self) -> usize {
            1
        }
        fn param_dim(&self) -> usize {
            1
        }
        fn step(
            &self,
            _x: &DVector<f64>,
            u: &DVector<f64>,
            _mu: &DVector<f64>,
        ) -> Result<DVector<f64>> {
            Ok(u.clone())
        }
        fn output(
            &self,
            x: &DVector<f64>,
            _u: &DVector<f64>,
            _mu: &DVector<f64>,
        ) -> Result<DVector<f64>> {
            Ok(x.clone())
        }
    }

    fn low_order_data(n: usize) -> (DVector<f64>, Vec<DVector<f64>>, Vec<DVector<f64>>) {
        let x0 = DVector::from_vec(vec![10.0, 10.0]);
        let us: Vec<_> = (0..n)
            .map(|k| DVector::from_element(1, multisine_input(k)))
            .collect();
        let mu = DVector::from_vec(vec![0.5, 0.8, 1.0]);
        let ys = simulate(&LowOrderPlant, &x0, &us, &mu).unwrap();
        (x0, us, ys)
    }

    #[test]
    fn perfect_model_has_zero_cost() {
        let (x0, us, ys) = low_order_data(200);
        let mu = DVector::from_vec(vec![0.5, 0.8, 1.0]);
        let j = batch_cost(
            &LowOrderPlant,
            &mu,
            &x0,
            &us,
            &ys,
            &BatchCostConfig::default(),
        )
        .unwrap();
        assert_eq!(j, 0.0);
    }

    #[test]
    fn sum_of_squares() {
        let x0 = DVector::zeros(1);
        let us = vec![DVector::zeros(1), DVector::zeros(1)];
        let ys = vec![
            DVector::from_element(1, 1.0),
            DVector::from_element(1, -2.0),
        ];
        let j = batch_cost(
            &Passthrough,
            &DVector::zeros(1),
            &x0,
            &us,
            &ys,
            &BatchCostConfig::default(),
        )
        .unwrap();
        assert_eq!(j, 5.0);
        let weighted = BatchCostConfig {
            weights: Some(vec![
                DMatrix::from_element(1, 1, 2.0),
                DMatrix::from_element(1, 1, 0.5),
            ]),
        };
        assert_eq!(
            batch_cost(&Passthrough, &DVector::zeros(1), &x0, &us, &ys, &weighted).unwrap(),
            4.0
        );
        let bad = BatchCostConfig {
            weights: Some(vec![DMatrix::from_element(1, 1, -1.0); 2]),
        };
        assert!(batch_cost(&Passthrough, &DVector::zeros(1), &x0, &us, &ys, &bad).is_err());
    }

    #[test]
    fn low_order_cost_matches_straight_loop() {
        let (_, us, ys) = low_order_data(100);
        let mu_hat = [0.6, 0.8, 1.0];
        let mut x = [10.0, 10.0];
        let mut oracle = 0.0;
        for (k, y) in ys.iter().enumerate() {
            let e = y[0] - x[0];
            oracle += e * e;
            let den = 1.0 + 0.6 * x[1] + 1.1 * x[0];
            x = [
                x[1],
                (mu_hat[0] + mu_hat[1] * x[1] + mu_hat[2] * x[0]) / den + multisine_input(k),
            ];
        }
        let j = batch_cost(
            &LowOrderPlant,
            &DVector::from_row_slice(&mu_hat),
            &DVector::from_vec(vec![10.0, 10.0]),
            &us,
            &ys,
            &BatchCostConfig::default(),
        )
        .unwrap();
        assert!(oracle > 0.0);
        assert!((j - oracle).abs() <= 1e-12 * oracle);
    }

    #[test]
    fn cost_is_order_invariant_for_memoryless_terms() {
        // With a passthrough model each term depends only on (u_{i-1}, y_i, W_i);
        // reversing the triples leaves the sum unchanged up to rounding.
        let x0 = DVector::zeros(1);
        let us: Vec<_> = (0..6)
            .map(|i| DVector::from_element(1, i as f64 * 0.3))
            .collect();
        let ys: Vec<_> = (0..6)
            .map(|i| DVector::from_element(1, (i as f64).sin()))
            .collect();
        let ws: Vec<_> = (0..6)
            .map(|i| DMatrix::from_element(1, 1, 1.0 + i as f64))
            .collect();
        let forward = BatchCostConfig {
            weights: Some(ws.clone()),
        };
        let j1 = batch_cost(&Passthrough, &DVector::zeros(1), &x0, &us, &ys, &forward).unwrap();

        let yhat: Vec<f64> = std::iter::once(0.0)
            .chain(us.iter().take(5).map(|u| u[0]))
            .collect();
        let mut terms: Vec<f64> = (0..6)
            .map(|i| ws[i][(0, 0)] * (ys[i][0] - yhat[i]).powi(2))
            .collect();
        terms.reverse();
        let j2: f64 = terms.iter().sum();
        assert!((j1 - j2).abs() <= 1e-12 * j1);
    }
}
