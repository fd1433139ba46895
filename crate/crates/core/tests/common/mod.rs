//! Oracles shared by the integration tests. Nothing here calls back into the
//! estimator internals; every quantity is rebuilt from logged data.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rcpe::rcpe::{estimator_step, EstimatorState, RcpeConfig};

/// Everything the estimator saw and produced during an open-loop run.
pub struct Trace {
    pub cfg: RcpeConfig,
    /// `phis[j]` is the regressor `Phi_j`, `nus[j]` the pre-estimate `nu_j`.
    pub phis: Vec<DMatrix<f64>>,
    pub nus: Vec<DVector<f64>>,
    pub zs: Vec<DVector<f64>>,
    /// `thetas[j]` is `theta_j`.
    pub thetas: Vec<DVector<f64>>,
    pub ps: Vec<DMatrix<f64>>,
}

/// Drives the estimator with a fixed sequence of output errors.
pub fn drive(cfg: &RcpeConfig, zs: &[DVector<f64>]) -> rcpe::Result<Trace> {
    let mut state = EstimatorState::new(cfg)?;
    let mut trace = Trace {
        cfg: cfg.clone(),
        phis: vec![state.regressor()],
        nus: vec![state.nu.clone()],
        zs: Vec::new(),
        thetas: vec![state.theta.clone()],
        ps: vec![state.p.clone()],
    };
    for z in zs {
        estimator_step(&mut state, z, cfg)?;
        trace.zs.push(z.clone());
        trace.phis.push(state.regressor());
        trace.nus.push(state.nu.clone());
        trace.thetas.push(state.theta.clone());
        trace.ps.push(state.p.clone());
    }
    Ok(trace)
}

/// Regressor for `theta = vec(R)` stacked by rows: `Phi = I kron phi^T`.
pub fn kron_regressor(phi: &DVector<f64>, l_mu: usize) -> DMatrix<f64> {
    DMatrix::<f64>::identity(l_mu, l_mu).kronecker(&phi.transpose())
}

fn padded<T: Clone>(seq: &[T], idx: isize, zero: T) -> T {
    if idx < 0 {
        zero
    } else {
        seq[idx as usize].clone()
    }
}

/// Minimizer of the retrospective cost accumulated over steps `1..=k`,
/// obtained by solving the normal equations of the quadratic form directly.
pub fn batch_theta(trace: &Trace, k: usize) -> DVector<f64> {
    let cfg = &trace.cfg;
    let (l_mu, l_theta) = (cfg.l_mu(), cfg.l_theta());
    let lambda = cfg.lambda;
    let mut a = &cfg.r_theta * lambda.powi(k as i32);
    let mut b = DVector::zeros(l_theta);
    for i in 1..=k {
        let mut h = DMatrix::zeros(cfg.l_y(), l_theta);
        let mut nv = DVector::zeros(cfg.l_y());
        for (tap, n_tap) in cfg.filter_coeffs.iter().enumerate() {
            let j = i as isize - 1 - tap as isize;
            h += n_tap * padded(&trace.phis, j, DMatrix::zeros(l_mu, l_theta));
            nv += n_tap * padded(&trace.nus, j, DVector::zeros(l_mu));
        }
        let w = lambda.powi((k - i) as i32);
        a += h.transpose() * &h * w;
        b += h.transpose() * (&trace.zs[i] - nv) * w;
    }
    -a.lu()
        .solve(&b)
        .expect("regularized normal matrix is invertible")
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn rand_matrix(rng: &mut StdRng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
}

pub fn rand_vector(rng: &mut StdRng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

/// Filter whose coefficient rows all lie in a random `rank`-dimensional subspace.
pub fn low_rank_filter(
    rng: &mut StdRng,
    l_y: usize,
    l_mu: usize,
    n_f: usize,
    rank: usize,
) -> Vec<DMatrix<f64>> {
    let basis = rand_matrix(rng, rank, l_mu);
    (0..n_f)
        .map(|_| rand_matrix(rng, l_y, rank) * &basis)
        .collect()
}

/// Random open-loop estimator problem of the size used by the RLS checks.
pub struct RandomProblem {
    pub cfg: RcpeConfig,
    pub zs: Vec<DVector<f64>>,
}

pub fn random_problem(rng: &mut StdRng, rank_deficient: bool) -> RandomProblem {
    let l_mu = rng.random_range(1..=3);
    let l_y = rng.random_range(1..=3);
    let n_f = rng.random_range(1..=3);
    let steps = rng.random_range(2..=100);
    let lambda = if rng.random_bool(0.5) { 1.0 } else { 0.999 };
    let beta = 10f64.powf(rng.random_range(-1.0..1.0));
    let filter = if rank_deficient && l_mu > 1 {
        let rank = rng.random_range(1..l_mu);
        low_rank_filter(rng, l_y, l_mu, n_f, rank)
    } else {
        (0..n_f).map(|_| rand_matrix(rng, l_y, l_mu)).collect()
    };
    let mut perm: Vec<usize> = (1..=l_mu).collect();
    for i in (1..l_mu).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let cfg = RcpeConfig::new(filter, lambda, beta, &perm).expect("random config is valid");
    let zs = (0..steps).map(|_| rand_vector(rng, l_y)).collect();
    RandomProblem { cfg, zs }
}

/// Relative residual of `nu` after projecting onto the row space of the filter.
pub fn span_ratio(nu: &DVector<f64>, filter: &[DMatrix<f64>]) -> f64 {
    rcpe::rcpe::subspace_residual(nu, filter) / (1.0 + nu.norm())
}
