//! One-point-feedback gradient estimation.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::oracles::OracleHandle;

use super::ZogdError;

/// Draws a vector uniformly distributed on the unit sphere in `dim`
/// dimensions (normalized standard Gaussian; for `dim = 1` this is a fair
/// coin over ±1).
///
/// Panics if `dim` is 0.
pub fn sample_sphere(dim: usize, rng: &mut impl Rng) -> Vec<f64> {
    assert!(dim >= 1, "the sphere needs at least one dimension");
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
        // astronomically unlikely; resample rather than divide by ~0
    }
}

/// Two-evaluation gradient estimate `(d / 2 tau) * (f(x + tau e) - f(x - tau e)) * e`
/// along a freshly sampled sphere direction. The two oracle calls see
/// independent noise (one-point feedback). Exactly 2 calls per invocation.
pub fn grad_estimate(
    handle: &mut OracleHandle,
    x: &[f64],
    tau: f64,
    rng: &mut impl Rng,
) -> Result<Vec<f64>, ZogdError> {
    let e = sample_sphere(x.len(), rng);
    grad_estimate_along(handle, x, tau, &e)
}

/// [`grad_estimate`] with the direction supplied by the caller, for
/// deterministic checks of the finite-difference arithmetic. Production
/// paths always sample the direction.
pub fn grad_estimate_along(
    handle: &mut OracleHandle,
    x: &[f64],
    tau: f64,
    e: &[f64],
) -> Result<Vec<f64>, ZogdError> {
    if e.len() != x.len() {
        return Err(ZogdError::DimensionMismatch {
            expected: x.len(),
            got: e.len(),
        });
    }
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(ZogdError::InvalidConfig(format!(
            "tau must be positive and finite, got {tau}"
        )));
    }

    let plus: Vec<f64> = x.iter().zip(e).map(|(xi, ei)| xi + tau * ei).collect();
    let minus: Vec<f64> = x.iter().zip(e).map(|(xi, ei)| xi - tau * ei).collect();
    let f_plus = handle.eval(&plus)?;
    let f_minus = handle.eval(&minus)?;
    if !f_plus.is_finite() {
        return Err(ZogdError::NonFiniteValue { point: plus });
    }
    if !f_minus.is_finite() {
        return Err(ZogdError::NonFiniteValue { point: minus });
    }

    let scale = x.len() as f64 / (2.0 * tau) * (f_plus - f_minus);
    Ok(e.iter().map(|ei| scale * ei).collect())
}
