use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::permutation::PermutationMatrix;
use crate::error::{Error, Result};

/// Tuning and output-map settings of the retrospective cost estimator.
///
/// The filter coefficients `N_1..N_nf` are `l_y x l_mu` matrices. The
/// regularization `r_theta` seeds the covariance with `P_0 = r_theta^{-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RcpeConfig {
    pub filter_coeffs: Vec<DMatrix<f64>>,
    pub lambda: f64,
    pub r_theta: DMatrix<f64>,
    pub permutation: PermutationMatrix,
    pub mu_bar: DVector<f64>,
    /// Diagonal of the scaling matrix `M`.
    pub scaling: DVector<f64>,
    /// Optional per-component upper bound on the estimate.
    pub saturation: Option<DVector<f64>>,
}

impl RcpeConfig {
    /// Config with `R_theta = beta I`, zero offset, unit scaling and no saturation.
    pub fn new(
        filter_coeffs: Vec<DMatrix<f64>>,
        lambda: f64,
        beta: f64,
        permutation: &[usize],
    ) -> Result<Self> {
        let first = filter_coeffs
            .first()
            .ok_or_else(|| Error::Config("at least one filter coefficient is required".into()))?;
        let (l_y, l_mu) = first.shape();
        let l_theta = l_y * l_mu;
        let cfg = Self {
            filter_coeffs,
            lambda,
            r_theta: DMatrix::identity(l_theta, l_theta) * beta,
            permutation: PermutationMatrix::new(permutation)?,
            mu_bar: DVector::zeros(l_mu),
            scaling: DVector::from_element(l_mu, 1.0),
            saturation: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_mu_bar(mut self, mu_bar: DVector<f64>) -> Result<Self> {
        self.mu_bar = mu_bar;
        self.validate()?;
        Ok(self)
    }

    pub fn with_scaling(mut self, scaling: DVector<f64>) -> Result<Self> {
        self.scaling = scaling;
        self.validate()?;
        Ok(self)
    }

    pub fn with_r_theta(mut self, r_theta: DMatrix<f64>) -> Result<Self> {
        self.r_theta = r_theta;
        self.validate()?;
        Ok(self)
    }

    pub fn with_saturation(mut self, upper: Option<DVector<f64>>) -> Result<Self> {
        self.saturation = upper;
        self.validate()?;
        Ok(self)
    }

    pub fn n_f(&self) -> usize {
        self.filter_coeffs.len()
    }

    pub fn l_y(&self) -> usize {
        self.filter_coeffs[0].nrows()
    }

    pub fn l_mu(&self) -> usize {
        self.filter_coeffs[0].ncols()
    }

    pub fn l_theta(&self) -> usize {
        self.l_y() * self.l_mu()
    }

    /// `N = [N_1 ... N_nf]`, of shape `l_y x (n_f l_mu)`.
    pub fn stacked_filter(&self) -> DMatrix<f64> {
        let (l_y, l_mu) = (self.l_y(), self.l_mu());
        let mut n = DMatrix::zeros(l_y, self.n_f() * l_mu);
        for (i, ni) in self.filter_coeffs.iter().enumerate() {
            n.view_mut((0, i * l_mu), (l_y, l_mu)).copy_from(ni);
        }
        n
    }

    pub fn validate(&self) -> Result<()> {
        let Some(first) = self.filter_coeffs.first() else {
            return Err(Error::Config(
                "at least one filter coefficient is required".into(),
            ));
        };
        let (l_y, l_mu) = first.shape();
        if l_y == 0 || l_mu == 0 {
            return Err(Error::Config(
                "filter coefficients must be non-empty".into(),
            ));
        }
        if let Some((i, _)) = self
            .filter_coeffs
            .iter()
            .enumerate()
            .find(|(_, n)| n.shape() != (l_y, l_mu))
        {
            return Err(Error::Config(format!(
                "filter coefficient N_{} has shape {:?}, expected {:?}",
                i + 1,
                self.filter_coeffs[i].shape(),
                (l_y, l_mu)
            )));
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::Config(format!(
                "forgetting factor {} must lie in (0, 1]",
                self.lambda
            )));
        }
        let l_theta = l_y * l_mu;
        if self.r_theta.shape() != (l_theta, l_theta) {
            return Err(Error::Config(format!(
                "R_theta has shape {:?}, expected {l_theta}x{l_theta}",
                self.r_theta.shape()
            )));
        }
        let sym = (&self.r_theta - self.r_theta.transpose()).amax();
        if sym > 1e-12 * self.r_theta.amax() || self.r_theta.clone().cholesky().is_none() {
            return Err(Error::Config(
                "R_theta must be symmetric positive definite".into(),
            ));
        }
        if self.permutation.dim() != l_mu {
            return Err(Error::Config(format!(
                "permutation has length {}, expected {l_mu}",
                self.permutation.dim()
            )));
        }
        if self.mu_bar.len() != l_mu {
            return Err(Error::Config(format!(
                "mu_bar has length {}, expected {l_mu}",
                self.mu_bar.len()
            )));
        }
        if self.scaling.len() != l_mu || self.scaling.iter().any(|&m| !(m > 0.0)) {
            return Err(Error::Config(format!(
                "scaling must hold {l_mu} positive entries"
            )));
        }
        if let Some(upper) = &self.saturation {
            if upper.len() != l_mu {
                return Err(Error::Config(format!(
                    "saturation bound has length {}, expected {l_mu}",
                    upper.len()
                )));
            }
            if upper.iter().zip(self.mu_bar.iter()).any(|(u, m)| u < m) {
                return Err(Error::Config("saturation bound lies below mu_bar".into()));
            }
        }
        Ok(())
    }
}
