//! Building blocks of the estimator: integrator, Kronecker regressor, output
//! map, retrospective error and the filter-subspace diagnostic.

use nalgebra::{DMatrix, DVector};

use super::config::RcpeConfig;
use crate::error::{check_dim, Result};

/// `phi_k = phi_{k-1} + z_{k-1}`.
pub fn update_integrator(phi_prev: &DVector<f64>, z_prev: &DVector<f64>) -> Result<DVector<f64>> {
    check_dim("integrator update", phi_prev.len(), z_prev.len())?;
    Ok(phi_prev + z_prev)
}

/// Regressor `I_{l_mu} (x) phi^T`, an `l_mu x (l_mu l_y)` block-diagonal matrix.
///
/// With `theta` the row-stacking of the gain `R` (`l_mu x l_y`),
/// `build_regressor(phi) * theta == R * phi`.
pub fn build_regressor(phi: &DVector<f64>, l_mu: usize) -> DMatrix<f64> {
    let l_y = phi.len();
    let mut out = DMatrix::zeros(l_mu, l_mu * l_y);
    for j in 0..l_mu {
        for (c, &v) in phi.iter().enumerate() {
            out[(j, j * l_y + c)] = v;
        }
    }
    out
}

/// Pre-estimate `nu = Phi theta`.
pub fn compute_pre_estimate(phi_mat: &DMatrix<f64>, theta: &DVector<f64>) -> Result<DVector<f64>> {
    check_dim("pre-estimate", phi_mat.ncols(), theta.len())?;
    Ok(phi_mat * theta)
}

/// Gain matrix `R` (`l_mu x l_y`) whose row-stacking is `theta`.
pub fn gain_from_theta(theta: &DVector<f64>, l_mu: usize, l_y: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(l_mu, l_y, theta.as_slice())
}

/// Parameter estimate `mu_bar + O_p |M nu|`, applied componentwise.
pub fn apply_output_map(nu: &DVector<f64>, cfg: &RcpeConfig) -> DVector<f64> {
    let scaled_abs = nu.component_mul(&cfg.scaling).abs();
    &cfg.mu_bar + cfg.permutation.apply(&scaled_abs)
}

/// Retrospective error `z + N Phibar theta_hat - N Vbar`.
pub fn retrospective_error(
    z: &DVector<f64>,
    theta_hat: &DVector<f64>,
    phibar: &DMatrix<f64>,
    vbar: &DVector<f64>,
    n: &DMatrix<f64>,
) -> Result<DVector<f64>> {
    check_dim("retrospective error (N rows)", z.len(), n.nrows())?;
    check_dim("retrospective error (N cols)", phibar.nrows(), n.ncols())?;
    check_dim("retrospective error (Vbar)", phibar.nrows(), vbar.len())?;
    check_dim(
        "retrospective error (theta)",
        phibar.ncols(),
        theta_hat.len(),
    )?;
    Ok(z + n * (phibar * theta_hat - vbar))
}

/// Distance from `nu` to the column space of `[N_1^T ... N_nf^T]`.
pub fn subspace_residual(nu: &DVector<f64>, filter_coeffs: &[DMatrix<f64>]) -> f64 {
    if filter_coeffs.is_empty() {
        return nu.norm();
    }
    let l_mu = nu.len();
    let cols: usize = filter_coeffs.iter().map(|n| n.nrows()).sum();
    let mut span = DMatrix::zeros(l_mu, cols);
    let mut c = 0;
    for ni in filter_coeffs {
        let t = ni.transpose();
        span.view_mut((0, c), (l_mu, t.ncols())).copy_from(&t);
        c += t.ncols();
    }
    let svd = span.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.max();
    let tol = smax * (l_mu.max(cols) as f64) * f64::EPSILON;
    let mut projection = DVector::zeros(l_mu);
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > tol {
            let ui = u.column(i);
            projection += ui * ui.dot(nu);
        }
    }
    (nu - projection).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn row(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(1, v.len(), v)
    }

    #[test]
    fn integrator_adds_error() {
        let zero = DVector::from_vec(vec![0.0]);
        assert_eq!(update_integrator(&zero, &zero).unwrap(), zero);
        let phi = update_integrator(
            &DVector::from_vec(vec![1.5]),
            &DVector::from_vec(vec![-0.5]),
        )
        .unwrap();
        assert_eq!(phi[0], 1.0);
        let mut phi = DVector::zeros(1);
        for _ in 0..3 {
            phi = update_integrator(&phi, &DVector::from_vec(vec![1.0])).unwrap();
        }
        assert_eq!(phi[0], 3.0);
        assert!(update_integrator(&DVector::zeros(2), &DVector::zeros(1)).is_err());
    }

    #[test]
    fn regressor_matches_kronecker_definition() {
        let phi = DVector::from_vec(vec![3.0]);
        assert_eq!(
            build_regressor(&phi, 2),
            DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 3.0])
        );
        let phi = DVector::from_vec(vec![1.0, 2.0]);
        let expected = DMatrix::from_row_slice(2, 4, &[1., 2., 0., 0., 0., 0., 1., 2.]);
        assert_eq!(build_regressor(&phi, 2), expected);
        let kron = DMatrix::<f64>::identity(2, 2).kronecker(&phi.transpose());
        assert_eq!(build_regressor(&phi, 2), kron);
    }

    #[test]
    fn regressor_vec_identity() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let gain = DMatrix::from_fn(2, 3, |_, _| rng.random_range(-2.0..2.0));
            let phi = DVector::from_fn(3, |_, _| rng.random_range(-2.0..2.0));
            let theta = DVector::from_row_slice(gain.transpose().as_slice());
            let nu = compute_pre_estimate(&build_regressor(&phi, 2), &theta).unwrap();
            assert!((nu - &gain * &phi).amax() <= 1e-14);
            assert_eq!(gain_from_theta(&theta, 2, 3), gain);
        }
    }

    #[test]
    fn pre_estimate_cases() {
        let phi_mat = build_regressor(&DVector::from_vec(vec![2.0]), 2);
        assert_eq!(
            compute_pre_estimate(&phi_mat, &DVector::zeros(2)).unwrap(),
            DVector::zeros(2)
        );
        let nu = compute_pre_estimate(&phi_mat, &DVector::from_vec(vec![0.5, -0.3])).unwrap();
        assert_eq!(nu, DVector::from_vec(vec![1.0, -0.6]));
        assert!(compute_pre_estimate(&phi_mat, &DVector::zeros(3)).is_err());
    }

    fn cfg(rows: Vec<DMatrix<f64>>, p: &[usize]) -> RcpeConfig {
        RcpeConfig::new(rows, 0.9999, 1e6, p).unwrap()
    }

    #[test]
    fn output_map_cases() {
        let c = cfg(vec![row(&[1., 0.]), row(&[0., 1.])], &[2, 1])
            .with_mu_bar(DVector::from_vec(vec![1.0, 0.01]))
            .unwrap();
        assert_eq!(
            apply_output_map(&DVector::zeros(2), &c),
            DVector::from_vec(vec![1.0, 0.01])
        );

        let c = cfg(
            vec![row(&[1., 0., 0.]), row(&[0., 1., 0.]), row(&[0., 0., 1.])],
            &[2, 1, 3],
        );
        let mu = apply_output_map(&DVector::from_vec(vec![-0.8, 0.5, 1.0]), &c);
        assert_eq!(mu, DVector::from_vec(vec![0.5, 0.8, 1.0]));

        let c = cfg(
            vec![row(&[1., 0., 0.]), row(&[0., 1., 0.]), row(&[0., 0., 1.])],
            &[1, 2, 3],
        )
        .with_scaling(DVector::from_vec(vec![1.0, 1.0, 1000.0]))
        .unwrap();
        let mu = apply_output_map(&DVector::from_vec(vec![0.0, 0.0, 3e-4]), &c);
        assert!((mu - DVector::from_vec(vec![0.0, 0.0, 0.3])).amax() < 1e-15);
    }

    #[test]
    fn retrospective_error_cases() {
        let n = DMatrix::from_row_slice(1, 4, &[1.0, 0.0, 0.0, 1.0]);
        let z = DVector::from_vec(vec![0.7]);
        let zero = retrospective_error(
            &z,
            &DVector::from_vec(vec![1.0, 2.0]),
            &DMatrix::zeros(4, 2),
            &DVector::zeros(4),
            &n,
        )
        .unwrap();
        assert_eq!(zero, z);

        let phibar = DMatrix::from_row_slice(4, 2, &[1., 0., 0., 1., 2., 0., 0., 2.]);
        let theta = DVector::from_vec(vec![0.3, -0.1]);
        let vbar = &phibar * &theta;
        let same = retrospective_error(&z, &theta, &phibar, &vbar, &n).unwrap();
        assert!((same - &z).amax() < 1e-15);
    }

    #[test]
    fn retrospective_error_matches_tap_sum() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let (l_mu, l_y, n_f) = (3, 2, 3);
            let taps: Vec<DMatrix<f64>> = (0..n_f)
                .map(|_| DMatrix::from_fn(l_y, l_mu, |_, _| rng.random_range(-1.0..1.0)))
                .collect();
            let phis: Vec<DMatrix<f64>> = (0..n_f)
                .map(|_| {
                    build_regressor(
                        &DVector::from_fn(l_y, |_, _| rng.random_range(-1.0..1.0)),
                        l_mu,
                    )
                })
                .collect();
            let nus: Vec<DVector<f64>> = (0..n_f)
                .map(|_| DVector::from_fn(l_mu, |_, _| rng.random_range(-1.0..1.0)))
                .collect();
            let theta = DVector::from_fn(l_mu * l_y, |_, _| rng.random_range(-1.0..1.0));
            let z = DVector::from_fn(l_y, |_, _| rng.random_range(-1.0..1.0));

            let mut tap_sum = z.clone();
            for i in 0..n_f {
                tap_sum += &taps[i] * (&phis[i] * &theta - &nus[i]);
            }

            let mut phibar = DMatrix::zeros(n_f * l_mu, l_mu * l_y);
            let mut vbar = DVector::zeros(n_f * l_mu);
            let mut n = DMatrix::zeros(l_y, n_f * l_mu);
            for i in 0..n_f {
                phibar
                    .view_mut((i * l_mu, 0), (l_mu, l_mu * l_y))
                    .copy_from(&phis[i]);
                vbar.rows_mut(i * l_mu, l_mu).copy_from(&nus[i]);
                n.view_mut((0, i * l_mu), (l_y, l_mu)).copy_from(&taps[i]);
            }
            let z_hat = retrospective_error(&z, &theta, &phibar, &vbar, &n).unwrap();
            assert!((z_hat - tap_sum).amax() <= 1e-13);
        }
    }

    #[test]
    fn subspace_residual_cases() {
        let taps = vec![row(&[1., 0., 0.])];
        assert_eq!(subspace_residual(&DVector::zeros(3), &taps), 0.0);
        assert!(
            (subspace_residual(&DVector::from_vec(vec![0., 1., 0.]), &taps) - 1.0).abs() < 1e-15
        );
        let full = vec![row(&[1., 0., 0.]), row(&[0., 1., 0.]), row(&[0., 0., 1.])];
        assert!(subspace_residual(&DVector::from_vec(vec![0.3, -2.0, 5.0]), &full) < 1e-14);
        let diag = vec![row(&[1., 1., 0.])];
        let r = subspace_residual(&DVector::from_vec(vec![1., -1., 0.]), &diag);
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }
}
