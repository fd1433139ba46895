use nalgebra::DVector;

use crate::error::{check_dim, Result};
use crate::models::SystemModel;

/// Augmented-state form `X = [x; mu]` with `F(X, u) = [f(x, u, mu); mu]` and
/// `G(X, u) = g(x, u, mu)`, as used by joint state/parameter filters.
///
/// The augmented model takes no parameters of its own (`param_dim() == 0`).
#[derive(Debug, Clone)]
pub struct AugmentedModel<M> {
    inner: M,
}

pub fn augment<M: SystemModel>(model: M) -> AugmentedModel<M> {
    AugmentedModel { inner: model }
}

impl<M: SystemModel> AugmentedModel<M> {
    pub fn inner(&self) -> &M {
        &self.inner
    }

    /// `pi_1 X`, the plant state block.
    pub fn state_part(&self, big_x: &DVector<f64>) -> DVector<f64> {
        big_x.rows(0, self.inner.state_dim()).into_owned()
    }

    /// `pi_2 X`, the parameter block.
    pub fn param_part(&self, big_x: &DVector<f64>) -> DVector<f64> {
        big_x
            .rows(self.inner.state_dim(), self.inner.param_dim())
            .into_owned()
    }

    pub fn compose(&self, x: &DVector<f64>, mu: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(x.len() + mu.len());
        out.rows_mut(0, x.len()).copy_from(x);
        out.rows_mut(x.len(), mu.len()).copy_from(mu);
        out
    }
}

impl<M: SystemModel> SystemModel for AugmentedModel<M> {
    fn state_dim(&self) -> usize {
        self.inner.state_dim() + self.inner.param_dim()
    }
    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }
    fn output_dim(&self) -> usize {
        self.inner.output_dim()
    }
    fn param_dim(&self) -> usize {
        0
    }

    fn step(&self, x: &DVector<f64>, u: &DVector<f64>, _mu: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim("augmented state", self.state_dim(), x.len())?;
        let mu = self.param_part(x);
        let next = self.inner.step(&self.state_part(x), u, &mu)?;
        Ok(self.compose(&next, &mu))
    }

    fn output(
        &self,
        x: &DVector<f64>,
        u: &DVector<f64>,
        _mu: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        check_dim("augmented state", self.state_dim(), x.len())?;
        self.inner
            .output(&self.state_part(x), u, &self.param_part(x))
    }
}
