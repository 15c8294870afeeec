//! Runtime verification of the parabola-sandwich function classes.
//!
//! The checks evaluate the class inequalities pointwise, either on the
//! uniform grid drawn by [`build_grid`] (exhaustive for low dimensions) or
//! on a seeded uniform sample of the box (the `_sampled` variants, for
//! dimensions where the grid would explode). Reports carry signed margins,
//! not just booleans, so callers can quantify how badly a constant fails.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{build_grid, Bounds};

use super::{GoodClassParams, OracleError, OracleHandle, VeryGoodClassParams};

/// Largest grid the exhaustive checks will enumerate.
const GRID_CAP: u64 = 10_000_000;

/// Points closer to `x_star` than this are excluded from the ratio check
/// (the ratio `(f - f*) / |x-x*|^2` is numerically meaningless there).
const CENTER_EXCLUSION: f64 = 1e-9;

/// A grid or sample point where a class inequality failed, with the signed
/// distances to the two class boundaries (negative = violated side).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassViolation {
    pub point: Vec<f64>,
    pub lower_margin: f64,
    pub upper_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    /// True iff no checked point violated either inequality.
    pub holds: bool,
    pub points_checked: u64,
    pub violations: Vec<ClassViolation>,
    /// Smallest margin seen anywhere (negative when `holds` is false).
    pub worst_margin: f64,
}

impl ClassReport {
    fn from_checks(points_checked: u64, violations: Vec<ClassViolation>, worst: f64) -> Self {
        Self {
            holds: violations.is_empty(),
            points_checked,
            violations,
            worst_margin: worst,
        }
    }
}

/// Checks `(mu/2)|x-x*|^2 <= f(x) - f(x*) <= (big_l/2)|x-x*|^2` at every
/// point of the uniform grid over `bounds` with resolution `grid_n`.
///
/// Requires a deterministic objective (`sigma = 0` or a noise-free variant);
/// for user-supplied black boxes this is sampling evidence, not a proof.
pub fn verify_good_class(
    handle: &mut OracleHandle,
    bounds: &Bounds,
    params: &GoodClassParams,
    x_star: &[f64],
    grid_n: usize,
) -> Result<ClassReport, OracleError> {
    let points = grid_points(handle, bounds, x_star, grid_n)?;
    check_good(handle, points, params, x_star)
}

/// [`verify_good_class`] on `n_samples` uniform points from `bounds`
/// instead of a grid; for dimensions where grids are intractable.
pub fn verify_good_class_sampled(
    handle: &mut OracleHandle,
    bounds: &Bounds,
    params: &GoodClassParams,
    x_star: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<ClassReport, OracleError> {
    let points = sampled_points(handle, bounds, x_star, n_samples, seed)?;
    check_good(handle, points, params, x_star)
}

/// Checks `|(f(x) - f(x*)) / |x-x*|^2 - big_m/2| <= delta_bound` at grid
/// points with `|x-x*| > 1e-9`.
pub fn verify_very_good_class(
    handle: &mut OracleHandle,
    bounds: &Bounds,
    params: &VeryGoodClassParams,
    x_star: &[f64],
    grid_n: usize,
) -> Result<ClassReport, OracleError> {
    let points = grid_points(handle, bounds, x_star, grid_n)?;
    check_very_good(handle, points, params, x_star)
}

/// [`verify_very_good_class`] on a seeded uniform sample of the box.
pub fn verify_very_good_class_sampled(
    handle: &mut OracleHandle,
    bounds: &Bounds,
    params: &VeryGoodClassParams,
    x_star: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<ClassReport, OracleError> {
    let points = sampled_points(handle, bounds, x_star, n_samples, seed)?;
    check_very_good(handle, points, params, x_star)
}

fn precheck(
    handle: &OracleHandle,
    bounds: &Bounds,
    x_star: &[f64],
) -> Result<(), OracleError> {
    if handle.spec().has_stochastic_noise() {
        return Err(OracleError::NoisyObjective);
    }
    if bounds.dim() != handle.dim() {
        return Err(OracleError::DimensionMismatch {
            expected: handle.dim(),
            got: bounds.dim(),
        });
    }
    if x_star.len() != handle.dim() {
        return Err(OracleError::DimensionMismatch {
            expected: handle.dim(),
            got: x_star.len(),
        });
    }
    Ok(())
}

fn grid_points(
    handle: &OracleHandle,
    bounds: &Bounds,
    x_star: &[f64],
    grid_n: usize,
) -> Result<Vec<Vec<f64>>, OracleError> {
    precheck(handle, bounds, x_star)?;
    let grid = build_grid(bounds, grid_n)?;
    match grid.num_points() {
        Some(points) if points <= GRID_CAP => {}
        Some(points) => {
            return Err(OracleError::GridTooLarge {
                points,
                cap: GRID_CAP,
            })
        }
        None => {
            return Err(OracleError::GridTooLarge {
                points: u64::MAX,
                cap: GRID_CAP,
            })
        }
    }
    Ok(grid.indices().map(|ix| grid.point(&ix)).collect())
}

fn sampled_points(
    handle: &OracleHandle,
    bounds: &Bounds,
    x_star: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, OracleError> {
    precheck(handle, bounds, x_star)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n_samples)
        .map(|_| {
            (0..bounds.dim())
                .map(|j| {
                    let u: f64 = rng.random();
                    bounds.lower()[j] + u * bounds.edge(j)
                })
                .collect()
        })
        .collect();
    Ok(points)
}

fn check_good(
    handle: &mut OracleHandle,
    points: Vec<Vec<f64>>,
    params: &GoodClassParams,
    x_star: &[f64],
) -> Result<ClassReport, OracleError> {
    let f_star = handle.eval(x_star)?;
    let mut violations = Vec::new();
    let mut worst = f64::INFINITY;
    let mut checked = 0u64;
    for p in points {
        let diff = handle.eval(&p)? - f_star;
        let r2 = sq_distance(&p, x_star);
        let lower_margin = diff - 0.5 * params.mu * r2;
        let upper_margin = 0.5 * params.big_l * r2 - diff;
        checked += 1;
        worst = worst.min(lower_margin).min(upper_margin);
        let slack = equality_slack(diff, 0.5 * params.big_l * r2);
        if lower_margin < -slack || upper_margin < -slack {
            violations.push(ClassViolation {
                point: p,
                lower_margin,
                upper_margin,
            });
        }
    }
    Ok(ClassReport::from_checks(checked, violations, worst))
}

fn check_very_good(
    handle: &mut OracleHandle,
    points: Vec<Vec<f64>>,
    params: &VeryGoodClassParams,
    x_star: &[f64],
) -> Result<ClassReport, OracleError> {
    let f_star = handle.eval(x_star)?;
    let mut violations = Vec::new();
    let mut worst = f64::INFINITY;
    let mut checked = 0u64;
    for p in points {
        let r2 = sq_distance(&p, x_star);
        if r2.sqrt() <= CENTER_EXCLUSION {
            continue;
        }
        let ratio = (handle.eval(&p)? - f_star) / r2;
        let lower_margin = ratio - (0.5 * params.big_m - params.delta_bound);
        let upper_margin = (0.5 * params.big_m + params.delta_bound) - ratio;
        checked += 1;
        worst = worst.min(lower_margin).min(upper_margin);
        let slack = equality_slack(ratio, 0.5 * params.big_m);
        if lower_margin < -slack || upper_margin < -slack {
            violations.push(ClassViolation {
                point: p,
                lower_margin,
                upper_margin,
            });
        }
    }
    Ok(ClassReport::from_checks(checked, violations, worst))
}

// Tolerance so the exact equality case (mu = big_l and f the matching
// quadratic) never reports a rounding-level violation.
fn equality_slack(a: f64, b: f64) -> f64 {
    1e-12 * (1.0 + a.abs() + b.abs())
}

fn sq_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}
