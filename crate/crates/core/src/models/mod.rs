//! Discrete-time plant models `x_{k+1} = f(x_k, u_k, mu)`, `y_k = g(x_k, u_k, mu)`.
//!
//! The same model serves as the truth model (run with the true parameters)
//! and as the estimation model (run with the current estimate).

mod burgers;
mod low_order;

use nalgebra::DVector;

use crate::error::Result;

pub use burgers::{
    burgers_boundary, burgers_measure, burgers_step, cfl_bound, write_snapshots_csv, BurgersGrid,
    BurgersModel, BURGERS_MEASUREMENT_INDEX,
};
pub use low_order::{low_order_step, multisine_input, LowOrderPlant};

/// A deterministic discrete-time plant parameterized by `mu`.
pub trait SystemModel: Send + Sync {
    fn state_dim(&self) -> usize;
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn param_dim(&self) -> usize;

    fn step(&self, x: &DVector<f64>, u: &DVector<f64>, mu: &DVector<f64>) -> Result<DVector<f64>>;

    fn output(&self, x: &DVector<f64>, u: &DVector<f64>, mu: &DVector<f64>)
        -> Result<DVector<f64>>;
}

impl<M: SystemModel + ?Sized> SystemModel for &M {
    fn state_dim(&self) -> usize {
        (**self).state_dim()
    }
    fn input_dim(&self) -> usize {
        (**self).input_dim()
    }
    fn output_dim(&self) -> usize {
        (**self).output_dim()
    }
    fn param_dim(&self) -> usize {
        (**self).param_dim()
    }
    fn step(&self, x: &DVector<f64>, u: &DVector<f64>, mu: &DVector<f64>) -> Result<DVector<f64>> {
        (**self).step(x, u, mu)
    }
    fn output(
        &self,
        x: &DVector<f64>,
        u: &DVector<f64>,
        mu: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        (**self).output(x, u, mu)
    }
}

/// Simulates `model` from `x0` and returns the outputs `y_0..y_{N-1}`.
pub fn simulate<M: SystemModel + ?Sized>(
    model: &M,
    x0: &DVector<f64>,
    inputs: &[DVector<f64>],
    mu: &DVector<f64>,
) -> Result<Vec<DVector<f64>>> {
    let mut x = x0.clone();
    let mut ys = Vec::with_capacity(inputs.len());
    for u in inputs {
        ys.push(model.output(&x, u, mu)?);
        x = model.step(&x, u, mu)?;
    }
    Ok(ys)
}
