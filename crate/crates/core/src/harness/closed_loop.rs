use nalgebra::DVector;

use super::config::{ExperimentConfig, Plant};
use crate::error::{Error, Result};
use crate::models::{multisine_input, BurgersModel, LowOrderPlant, SystemModel};
use crate::rcpe::Estimator;

/// One logged step of a closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesRecord {
    pub k: usize,
    pub y: DVector<f64>,
    pub yhat: DVector<f64>,
    /// `z_k = yhat_k - y_k`.
    pub z: DVector<f64>,
    pub znorm: f64,
    pub nu: DVector<f64>,
    pub mu_hat: DVector<f64>,
    pub muerr: f64,
    pub theta: DVector<f64>,
    pub diverged: bool,
    pub saturated: bool,
}

/// Records of one run plus how it ended.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub records: Vec<TimeSeriesRecord>,
    /// Step at which the run halted early, if it did.
    pub diverge_step: Option<usize>,
    /// Error that halted the run, when one did (thresholds produce none).
    pub failure: Option<Error>,
}

impl RunOutcome {
    pub fn diverged(&self) -> bool {
        self.diverge_step.is_some()
    }

    pub fn last(&self) -> Option<&TimeSeriesRecord> {
        self.records.last()
    }

    /// `|mu_hat - mu|` at the last logged step.
    pub fn final_muerr(&self) -> f64 {
        self.last().map_or(f64::NAN, |r| r.muerr)
    }
}

/// Plant instance plus its input sequence.
pub enum PlantInstance {
    LowOrder(LowOrderPlant),
    Burgers(BurgersModel),
}

impl PlantInstance {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        Ok(match cfg.plant {
            Plant::LowOrder => PlantInstance::LowOrder(LowOrderPlant),
            Plant::Burgers => PlantInstance::Burgers(BurgersModel::new(
                cfg.burgers.grid_points,
                cfg.burgers.dt,
                cfg.burgers.c_max,
            )?),
        })
    }

    pub fn model(&self) -> &dyn SystemModel {
        match self {
            PlantInstance::LowOrder(m) => m,
            PlantInstance::Burgers(m) => m,
        }
    }

    pub fn input(&self, k: usize) -> DVector<f64> {
        match self {
            PlantInstance::LowOrder(_) => DVector::from_element(1, multisine_input(k)),
            PlantInstance::Burgers(m) => m.input(k),
        }
    }
}

/// Runs truth model, estimation model and estimator in closed loop and keeps every record.
///
/// At step `k` both models see `u_k`; the truth model uses `mu` and the
/// estimation model `mu_hat_k`. The estimator consumes `z_k` and returns
/// `mu_hat_{k+1}`. The run halts when `|z_k|` exceeds `z_max`, a value turns
/// non-finite, or the estimation model or estimator fails.
pub fn run_closed_loop(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let mut records = Vec::with_capacity(cfg.horizon);
    let summary = run_closed_loop_with(cfg, |r| records.push(r.clone()))?;
    Ok(RunOutcome {
        records,
        diverge_step: summary.diverge_step,
        failure: summary.failure,
    })
}

/// How a run ended, without the per-step records.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub last: Option<TimeSeriesRecord>,
    pub steps: usize,
    pub diverge_step: Option<usize>,
    pub failure: Option<Error>,
}

impl RunSummary {
    pub fn diverged(&self) -> bool {
        self.diverge_step.is_some()
    }

    pub fn final_muerr(&self) -> f64 {
        self.last.as_ref().map_or(f64::NAN, |r| r.muerr)
    }
}

/// Closed loop that hands each record to `observe` instead of storing it.
pub fn run_closed_loop_with<F>(cfg: &ExperimentConfig, mut observe: F) -> Result<RunSummary>
where
    F: FnMut(&TimeSeriesRecord),
{
    cfg.validate()?;
    let plant = PlantInstance::new(cfg)?;
    let model = plant.model();
    let mut estimator = Estimator::new(cfg.rcpe.clone())?;

    let mut x = cfg.x0.clone();
    let mut xhat = cfg.xhat0.clone();
    let mut mu_hat = estimator.estimate();
    let mut saturated = false;
    let mut summary = RunSummary {
        last: None,
        steps: 0,
        diverge_step: None,
        failure: None,
    };
    for k in 0..cfg.horizon {
        let u = plant.input(k);
        let y = model.output(&x, &u, &cfg.mu_true)?;
        let yhat_res = model.output(&xhat, &u, &mu_hat);
        let state = estimator.state();
        let mut rec = TimeSeriesRecord {
            k,
            y: y.clone(),
            yhat: DVector::from_element(y.len(), f64::NAN),
            z: DVector::from_element(y.len(), f64::NAN),
            znorm: f64::NAN,
            nu: state.nu.clone(),
            mu_hat: mu_hat.clone(),
            muerr: (&mu_hat - &cfg.mu_true).norm(),
            theta: state.theta.clone(),
            diverged: false,
            saturated,
        };
        let yhat = match yhat_res {
            Ok(v) => v,
            Err(e) => {
                halt(rec, Some(e), &mut summary, &mut observe);
                return Ok(summary);
            }
        };
        let z = &yhat - &y;
        rec.znorm = z.norm();
        rec.yhat = yhat;
        rec.z = z.clone();
        if !(rec.znorm <= cfg.z_max) {
            halt(rec, None, &mut summary, &mut observe);
            return Ok(summary);
        }

        let out = match estimator.step(&z) {
            Ok(out) => out,
            Err(e) => {
                halt(rec, Some(e), &mut summary, &mut observe);
                return Ok(summary);
            }
        };
        x = model.step(&x, &u, &cfg.mu_true)?;
        match model.step(&xhat, &u, &mu_hat) {
            Ok(next) => xhat = next,
            Err(e) => {
                halt(rec, Some(e), &mut summary, &mut observe);
                return Ok(summary);
            }
        }
        observe(&rec);
        summary.last = Some(rec);
        summary.steps = k + 1;
        mu_hat = out.mu_hat;
        saturated = out.saturated;
    }
    Ok(summary)
}

fn halt<F: FnMut(&TimeSeriesRecord)>(
    mut rec: TimeSeriesRecord,
    failure: Option<Error>,
    summary: &mut RunSummary,
    observe: &mut F,
) {
    rec.diverged = true;
    summary.diverge_step = Some(rec.k);
    summary.failure = failure;
    summary.steps = rec.k + 1;
    observe(&rec);
    summary.last = Some(rec);
}
