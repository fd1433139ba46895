//! Online estimation of unknown physical parameters in nonlinear simulation
//! models by retrospective cost optimization, together with two test plants,
//! traditional baseline estimators and an experiment harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod harness;
pub mod models;
pub mod rcpe;

pub use error::{Error, Result};
