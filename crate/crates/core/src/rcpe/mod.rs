//! Retrospective cost parameter estimation.
//!
//! The estimator integrates the output error `z`, forms the pre-estimate
//! `nu_k = R_k phi_k` through an adaptive gain, and maps it to the parameter
//! estimate `mu_bar + O_p |M nu_k|`. The gain is the minimizer of an
//! exponentially forgotten retrospective cost, computed recursively.

mod config;
mod estimator;
mod ops;
mod permutation;

pub use config::RcpeConfig;
pub use estimator::{
    estimator_step, rls_step, stack_history, Estimator, EstimatorState, StepOutput,
    GAMMA_CONDITION_LIMIT,
};
pub use ops::{
    apply_output_map, build_regressor, compute_pre_estimate, gain_from_theta, retrospective_error,
    subspace_residual, update_integrator,
};
pub use permutation::{all_permutations, format_tuple, PermutationMatrix};

/// Filter coefficients `e_i` (rows of the identity) in the given order.
pub fn unit_row_filter(order: &[usize], l_mu: usize) -> Vec<nalgebra::DMatrix<f64>> {
    order
        .iter()
        .map(|&i| {
            let mut m = nalgebra::DMatrix::zeros(1, l_mu);
            m[(0, i - 1)] = 1.0;
            m
        })
        .collect()
}
