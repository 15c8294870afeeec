//! Objective functions, noise models, call accounting, and function-class
//! verification.
//!
//! Solvers never see a bare closure: every evaluation goes through an
//! [`OracleHandle`], which owns the objective's RNG streams, counts calls,
//! and enforces one-point-feedback semantics (two evaluations at the same
//! point see independent stochastic noise, while the deterministic ripple
//! `delta(x)` is memoized per point so the objective is a well-defined
//! function).
//!
//! A handle is stateful and single-owner. Parallel evaluation must either
//! shard work through per-worker handles derived with distinct seeds (noisy
//! objectives) or wrap a deterministic spec per worker; this crate's solvers
//! evaluate serially.

mod class;
mod handle;
mod objective;

pub use class::{
    verify_good_class, verify_good_class_sampled, verify_very_good_class,
    verify_very_good_class_sampled, ClassReport, ClassViolation,
};
pub use handle::OracleHandle;
pub use objective::{AnalyticFn, NoiseModel, ObjectiveSpec};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::GeometryError;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not symmetric: |a[{i}][{j}] - a[{j}][{i}]| = {diff:e}")]
    NotSymmetric { i: usize, j: usize, diff: f64 },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("class verification needs a deterministic objective (sigma = 0)")]
    NoisyObjective,
    #[error("verification grid has {points} points (cap {cap}); use the sampled variant")]
    GridTooLarge { points: u64, cap: u64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Curvatures of the two parabolas that sandwich a "good"-class function:
/// `(mu/2)|x-x*|^2 <= f(x) - f(x*) <= (big_l/2)|x-x*|^2` on the search box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoodClassParams {
    pub mu: f64,
    pub big_l: f64,
}

impl GoodClassParams {
    pub fn new(mu: f64, big_l: f64) -> Result<Self, OracleError> {
        if !(mu > 0.0) || !big_l.is_finite() {
            return Err(OracleError::InvalidParameter(format!(
                "need 0 < mu <= big_l, got mu = {mu}, big_l = {big_l}"
            )));
        }
        if big_l < mu {
            return Err(OracleError::InvalidParameter(format!(
                "big_l = {big_l} must be at least mu = {mu}"
            )));
        }
        Ok(Self { mu, big_l })
    }

    /// Condition number `big_l / mu`.
    pub fn ratio(&self) -> f64 {
        self.big_l / self.mu
    }
}

/// Parameters of the "very good" class: `f(x) - f(x*)` equals
/// `(big_m/2 + delta(x)) |x-x*|^2` with `|delta(x)| <= delta_bound` and the
/// ripple cap pinned to `big_m / (16 (d-1))`. Defined for `d >= 2` only;
/// one-dimensional problems belong to the plain good class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VeryGoodClassParams {
    pub big_m: f64,
    pub dim: usize,
    pub delta_bound: f64,
}

impl VeryGoodClassParams {
    pub fn new(big_m: f64, dim: usize) -> Result<Self, OracleError> {
        if !(big_m > 0.0) {
            return Err(OracleError::InvalidParameter(format!(
                "need big_m > 0, got {big_m}"
            )));
        }
        if dim < 2 {
            return Err(OracleError::InvalidParameter(
                "the very good class is defined for dimension >= 2".into(),
            ));
        }
        Ok(Self {
            big_m,
            dim,
            delta_bound: big_m / (16.0 * (dim as f64 - 1.0)),
        })
    }

    /// Good-class constants implied by the ripple bound: the ratio
    /// `(f - f*) / |x-x*|^2` lies in `[big_m/2 - delta_bound, big_m/2 + delta_bound]`,
    /// i.e. `mu = big_m - 2*delta_bound` and `big_l = big_m + 2*delta_bound`.
    pub fn as_good_class(&self) -> GoodClassParams {
        GoodClassParams {
            mu: self.big_m - 2.0 * self.delta_bound,
            big_l: self.big_m + 2.0 * self.delta_bound,
        }
    }
}
