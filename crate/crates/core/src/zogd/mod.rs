//! Zeroth-order gradient descent for quadratics behind a noisy value
//! oracle.
//!
//! The gradient is reconstructed from two function values per step,
//! `g = (d / 2 tau) * (f(x + tau e) - f(x - tau e)) * e`, where `e` is
//! uniform on the unit sphere and the two evaluations see *independent*
//! noise realizations (one-point feedback). Distance-proportional oracle
//! noise keeps the estimator's error shrinking as the iterates approach the
//! solution, which is what makes a linear rate possible; [`rate`] holds the
//! step-size/smoothing schedule that realizes it and the one-step expected
//! squared-distance bound used to validate runs.

mod descent;
mod estimator;
mod rate;

pub use descent::{zogd_run, StepRecord, ZogdSummary, ZogdTrace};
pub use estimator::{grad_estimate, grad_estimate_along, sample_sphere};
pub use rate::{one_step_bound, recommended_schedule, RateParams};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracles::OracleError;

#[derive(Debug, Error)]
pub enum ZogdError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("iterate diverged at step {step}: |x| = {norm:e}")]
    Diverged { step: usize, norm: f64 },
    #[error("oracle returned a non-finite value at {point:?}")]
    NonFiniteValue { point: Vec<f64> },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// A per-step parameter: either one constant or an explicit per-step list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepSchedule {
    Constant(f64),
    PerStep(Vec<f64>),
}

impl StepSchedule {
    pub fn at(&self, step: usize) -> f64 {
        match self {
            Self::Constant(v) => *v,
            Self::PerStep(values) => values[step],
        }
    }

    fn validate(&self, steps: usize, name: &str) -> Result<(), ZogdError> {
        match self {
            Self::Constant(v) if v.is_finite() && *v > 0.0 => Ok(()),
            Self::Constant(v) => Err(ZogdError::InvalidConfig(format!(
                "{name} must be positive and finite, got {v}"
            ))),
            Self::PerStep(values) if values.len() < steps => Err(ZogdError::InvalidConfig(
                format!("{name} schedule has {} entries for {steps} steps", values.len()),
            )),
            Self::PerStep(values) => match values[..steps]
                .iter()
                .find(|v| !(v.is_finite() && **v > 0.0))
            {
                Some(v) => Err(ZogdError::InvalidConfig(format!(
                    "{name} schedule contains a non-positive entry {v}"
                ))),
                None => Ok(()),
            },
        }
    }
}

impl From<f64> for StepSchedule {
    fn from(v: f64) -> Self {
        Self::Constant(v)
    }
}

/// Run parameters for [`zogd_run`]: step count `K`, step sizes `gamma_k`,
/// smoothing radii `tau_k`, and the seed of the direction stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZogdConfig {
    pub steps: usize,
    pub gamma: StepSchedule,
    pub tau: StepSchedule,
    pub seed: u64,
}

impl ZogdConfig {
    pub fn new(steps: usize, gamma: f64, tau: f64, seed: u64) -> Self {
        Self {
            steps,
            gamma: gamma.into(),
            tau: tau.into(),
            seed,
        }
    }

    pub(crate) fn validate(&self) -> Result<(), ZogdError> {
        self.gamma.validate(self.steps, "gamma")?;
        self.tau.validate(self.steps, "tau")
    }
}
