use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};

/// Recursive least squares for `y_k = phi_k mu` with forgetting factor `lambda`.
///
/// Until the accumulated information matrix becomes well conditioned the
/// normal equations are accumulated directly; from then on `P = A^{-1}` is
/// propagated recursively. With `lambda = 1` the estimate equals the batch
/// least-squares solution.
#[derive(Debug, Clone)]
pub struct LinearRls {
    lambda: f64,
    info: DMatrix<f64>,
    rhs: DVector<f64>,
    p: Option<DMatrix<f64>>,
    mu: DVector<f64>,
}

const INIT_CONDITION_LIMIT: f64 = 1e12;

impl LinearRls {
    pub fn new(l_mu: usize, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::Config(format!(
                "forgetting factor {lambda} must lie in (0, 1]"
            )));
        }
        Ok(Self {
            lambda,
            info: DMatrix::zeros(l_mu, l_mu),
            rhs: DVector::zeros(l_mu),
            p: None,
            mu: DVector::zeros(l_mu),
        })
    }

    pub fn update(&mut self, phi: &DMatrix<f64>, y: &DVector<f64>) -> Result<()> {
        check_dim("linear RLS regressor columns", self.mu.len(), phi.ncols())?;
        check_dim("linear RLS measurement", phi.nrows(), y.len())?;
        match &self.p {
            None => {
                self.info = &self.info * self.lambda + phi.transpose() * phi;
                self.rhs = &self.rhs * self.lambda + phi.transpose() * y;
                let sv = self.info.clone().singular_values();
                let (max, min) = (sv.max(), sv.min());
                if min > 0.0 && max / min < INIT_CONDITION_LIMIT {
                    let chol = self.info.clone().cholesky().ok_or(Error::RankDeficient)?;
                    self.mu = chol.solve(&self.rhs);
                    self.p = Some(chol.inverse());
                }
            }
            Some(p) => {
                let l_y = phi.nrows();
                let pht = p * phi.transpose();
                let gamma = DMatrix::identity(l_y, l_y) * self.lambda + phi * &pht;
                let gain = gamma
                    .cholesky()
                    .ok_or(Error::NumericalFailure {
                        step: 0,
                        reason: "singular innovation covariance".into(),
                    })?
                    .solve(&pht.transpose())
                    .transpose();
                let p_next = (p - &gain * phi * p) / self.lambda;
                self.mu += &gain * (y - phi * &self.mu);
                self.p = Some((&p_next + p_next.transpose()) * 0.5);
            }
        }
        Ok(())
    }

    /// Current estimate, or [`Error::RankDeficient`] while the data leaves a direction unexcited.
    pub fn estimate(&self) -> Result<&DVector<f64>> {
        if self.p.is_some() {
            Ok(&self.mu)
        } else {
            Err(Error::RankDeficient)
        }
    }
}

/// Runs [`LinearRls`] over a full data record.
pub fn linear_rls(
    phi_seq: &[DMatrix<f64>],
    y_seq: &[DVector<f64>],
    lambda: f64,
) -> Result<DVector<f64>> {
    check_dim("linear RLS sequences", phi_seq.len(), y_seq.len())?;
    let first = phi_seq.first().ok_or(Error::RankDeficient)?;
    let mut rls = LinearRls::new(first.ncols(), lambda)?;
    for (phi, y) in phi_seq.iter().zip(y_seq) {
        rls.update(phi, y)?;
    }
    rls.estimate().cloned()
}
