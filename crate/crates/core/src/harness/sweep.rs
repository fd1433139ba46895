//! Permutation and filter-sign sweeps over independent closed-loop runs.

use nalgebra::DVector;
use rayon::prelude::*;

use super::closed_loop::{run_closed_loop_with, RunSummary};
use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::rcpe::{all_permutations, format_tuple, unit_row_filter, PermutationMatrix, RcpeConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Converged,
    Diverged,
    /// Finished the horizon without meeting the convergence threshold.
    NotConverged,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Converged => "converged",
            Verdict::Diverged => "diverged",
            Verdict::NotConverged => "not_converged",
        }
    }

    pub fn classify(summary: &RunSummary, eps_conv: f64) -> Self {
        if summary.diverged() {
            Verdict::Diverged
        } else if summary.final_muerr() < eps_conv {
            Verdict::Converged
        } else {
            Verdict::NotConverged
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCase {
    pub case_id: String,
    pub permutation: Vec<usize>,
    /// Filter sign multipliers, empty for permutation sweeps.
    pub signs: Vec<i8>,
    pub verdict: Verdict,
    pub final_muerr: f64,
    pub diverge_step: Option<usize>,
    /// Pre-estimate at the last logged step.
    pub nu_limit: DVector<f64>,
    /// Distance from `nu_limit` to the nearest point of the attractor set.
    pub attractor_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub cases: Vec<SweepCase>,
}

impl SweepReport {
    pub fn converged(&self) -> impl Iterator<Item = &SweepCase> {
        self.cases
            .iter()
            .filter(|c| c.verdict == Verdict::Converged)
    }
}

/// Coefficient order and matching permutation for the six unit-row filters
/// of the three-parameter example.
pub const FILTER_CASES: [([usize; 3], [usize; 3]); 6] = [
    ([1, 2, 3], [2, 1, 3]),
    ([1, 3, 2], [3, 1, 2]),
    ([2, 1, 3], [1, 2, 3]),
    ([2, 3, 1], [3, 2, 1]),
    ([3, 2, 1], [2, 3, 1]),
    ([3, 1, 2], [1, 3, 2]),
];

/// Sign multipliers `sigma` for filters `G_f1..G_f8`.
pub const SIGN_PATTERNS: [[i8; 3]; 8] = [
    [1, 1, 1],
    [-1, 1, 1],
    [1, -1, 1],
    [1, 1, -1],
    [-1, -1, 1],
    [1, -1, -1],
    [-1, 1, -1],
    [-1, -1, -1],
];

/// Distance from `nu` to `{s : mu_bar + O_p |M s| = mu}`.
///
/// The nearest point keeps the sign of each component of `nu`, so the
/// distance is `| |nu| - |O_p^T (mu - mu_bar)| / M |`.
pub fn attractor_distance(nu: &DVector<f64>, rcpe: &RcpeConfig, mu: &DVector<f64>) -> f64 {
    let target = rcpe
        .permutation
        .apply_transpose(&(mu - &rcpe.mu_bar))
        .abs()
        .component_div(&rcpe.scaling);
    (nu.abs() - target).norm()
}

fn make_case(
    cfg: &ExperimentConfig,
    case_id: String,
    signs: Vec<i8>,
    summary: RunSummary,
) -> SweepCase {
    let nu_limit = summary
        .last
        .as_ref()
        .map_or_else(|| DVector::zeros(cfg.rcpe.l_mu()), |r| r.nu.clone());
    SweepCase {
        case_id,
        permutation: cfg.rcpe.permutation.indices().to_vec(),
        signs,
        verdict: Verdict::classify(&summary, cfg.eps_conv),
        final_muerr: summary.final_muerr(),
        diverge_step: summary.diverge_step,
        attractor_distance: attractor_distance(&nu_limit, &cfg.rcpe, &cfg.mu_true),
        nu_limit,
    }
}

fn run_case(cfg: &ExperimentConfig, case_id: String, signs: Vec<i8>) -> Result<SweepCase> {
    let summary = run_closed_loop_with(cfg, |_| {})?;
    Ok(make_case(cfg, case_id, signs, summary))
}

/// Runs the base configuration once per permutation of `(1..l_mu)`.
pub fn permutation_sweep(cfg: &ExperimentConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let configs: Vec<ExperimentConfig> = all_permutations(cfg.rcpe.l_mu())
        .into_iter()
        .map(|p| {
            let mut c = cfg.clone();
            c.rcpe.permutation = PermutationMatrix::new(&p)?;
            Ok(c)
        })
        .collect::<Result<_>>()?;
    let cases = configs
        .par_iter()
        .map(|c| {
            run_case(
                c,
                format!("p{}", format_tuple(c.rcpe.permutation.indices())),
                Vec::new(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport { cases })
}

/// Runs the 6 coefficient assignments times 8 sign patterns of the
/// three-parameter, single-output construction.
pub fn filter_sign_sweep(cfg: &ExperimentConfig) -> Result<SweepReport> {
    cfg.validate()?;
    if cfg.rcpe.l_mu() != 3 || cfg.rcpe.l_y() != 1 {
        return Err(Error::Config(format!(
            "filter sign sweep needs 3 parameters and 1 output, got {} and {}",
            cfg.rcpe.l_mu(),
            cfg.rcpe.l_y()
        )));
    }
    let mut jobs = Vec::with_capacity(48);
    for (case, (order, perm)) in FILTER_CASES.iter().enumerate() {
        for (f, sigma) in SIGN_PATTERNS.iter().enumerate() {
            let mut c = cfg.clone();
            c.rcpe.filter_coeffs = unit_row_filter(order, 3)
                .into_iter()
                .zip(sigma)
                .map(|(n, &s)| n * f64::from(s))
                .collect();
            c.rcpe.permutation = PermutationMatrix::new(perm)?;
            jobs.push((c, format!("case{}_Gf{}", case + 1, f + 1), sigma.to_vec()));
        }
    }
    let cases = jobs
        .into_par_iter()
        .map(|(c, id, signs)| run_case(&c, id, signs))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport { cases })
}
