//! Convergence-rate bookkeeping: the recommended `(gamma, tau)` schedule
//! and the one-step expected squared-distance bound it is derived from.

use serde::{Deserialize, Serialize};

use super::ZogdError;

/// With `sigma = 0` the central difference is exact on quadratics for any
/// positive radius, so the schedule's lower bound on `tau` is vacuous; this
/// floor just keeps the difference quotient away from catastrophic
/// cancellation at float precision.
const TAU_FLOOR: f64 = 1e-3;

/// Problem and step parameters entering [`one_step_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    pub dim: usize,
    pub mu: f64,
    pub big_l: f64,
    pub sigma: f64,
    pub delta_bound: f64,
    pub gamma: f64,
    pub tau: f64,
}

impl RateParams {
    pub fn new(
        dim: usize,
        mu: f64,
        big_l: f64,
        sigma: f64,
        delta_bound: f64,
        gamma: f64,
        tau: f64,
    ) -> Result<Self, ZogdError> {
        if dim == 0 {
            return Err(ZogdError::InvalidConfig("dimension must be positive".into()));
        }
        if !(mu > 0.0 && big_l >= mu) {
            return Err(ZogdError::InvalidConfig(format!(
                "need 0 < mu <= big_l, got mu = {mu}, big_l = {big_l}"
            )));
        }
        if !(sigma >= 0.0 && delta_bound >= 0.0 && gamma >= 0.0 && tau > 0.0) {
            return Err(ZogdError::InvalidConfig(format!(
                "need sigma >= 0, delta_bound >= 0, gamma >= 0, tau > 0; got \
                 sigma = {sigma}, delta_bound = {delta_bound}, gamma = {gamma}, tau = {tau}"
            )));
        }
        Ok(Self {
            dim,
            mu,
            big_l,
            sigma,
            delta_bound,
            gamma,
            tau,
        })
    }
}

/// Upper bound on `E |x_{k+1} - x*|^2` after one descent step, given the
/// current expected squared distance and expected distance:
///
/// ```text
/// (1 - gamma*mu + 5 d^2 gamma^2 (delta^2 + sigma^2) / tau^2) * dist_sq
///   + (2 d gamma delta / tau) * dist
///   + 2 d gamma delta
///   + 5 d^2 gamma^2 (delta^2 + sigma^2)
/// ```
///
/// Valid for `gamma <= 1/(5 d big_l)`. Both moments are supplied by the
/// caller; the evaluator never estimates them.
pub fn one_step_bound(dist_sq: f64, dist: f64, p: &RateParams) -> f64 {
    let d = p.dim as f64;
    let noise2 = p.delta_bound * p.delta_bound + p.sigma * p.sigma;
    let contraction =
        1.0 - p.gamma * p.mu + 5.0 * d * d * p.gamma * p.gamma * noise2 / (p.tau * p.tau);
    contraction * dist_sq
        + 2.0 * d * p.gamma * p.delta_bound / p.tau * dist
        + 2.0 * d * p.gamma * p.delta_bound
        + 5.0 * d * d * p.gamma * p.gamma * noise2
}

/// The `(gamma, tau)` pair that yields the linear-plus-noise-floor rate for
/// a `steps`-iteration run on a clean-ripple problem (`delta = 0`):
///
/// * `gamma = min( 1/(5 d big_l), 2 ln(max(2, mu^2 dist0_sq K / (20 d^2 sigma^2))) / (mu K) )`
/// * `tau   = max( sqrt(2 d sigma^2 / (mu big_l)), 1e-3 )`
///
/// At `sigma = 0` the log term degenerates (its argument is unbounded), and
/// the binding constraint is the cap: the schedule returns
/// `gamma = 1/(5 d big_l)` with `tau` at its floor.
pub fn recommended_schedule(
    dim: usize,
    big_l: f64,
    mu: f64,
    sigma: f64,
    steps: usize,
    dist0_sq: f64,
) -> (f64, f64) {
    assert!(dim >= 1 && steps >= 1, "need dim >= 1 and steps >= 1");
    assert!(
        mu > 0.0 && big_l >= mu && sigma >= 0.0 && dist0_sq >= 0.0,
        "need 0 < mu <= big_l, sigma >= 0, dist0_sq >= 0"
    );
    let d = dim as f64;
    let gamma_cap = 1.0 / (5.0 * d * big_l);
    if sigma == 0.0 {
        return (gamma_cap, TAU_FLOOR);
    }
    let k = steps as f64;
    let log_arg = (mu * mu * dist0_sq * k / (20.0 * d * d * sigma * sigma)).max(2.0);
    let gamma = gamma_cap.min(2.0 * log_arg.ln() / (mu * k));
    let tau = (2.0 * d * sigma * sigma / (mu * big_l)).sqrt().max(TAU_FLOOR);
    (gamma, tau)
}
