//! Coordinate-wise box-shrinking search.

use crate::geometry::{shrink_edge, Bounds};
use crate::oracles::OracleHandle;

use super::{DirectionBbsConfig, IterationRecord, RunTrace, SolverError};

/// Minimizes over an axis-aligned box one coordinate line at a time.
///
/// The solver keeps a moving midpoint `m` (initialized to the box center).
/// Each outer iteration performs `d` inner steps; an inner step on
/// coordinate `i` evaluates the objective at the `n + 1` points obtained by
/// sweeping coordinate `i` uniformly across `[b_i, B_i]` while every other
/// coordinate stays at its current `m_j`, moves `m_i` to the winning
/// abscissa (smallest grid index on ties), and clips edge `i` to
/// `[m_i - R/3, m_i + R/3]`, where `R` is the longest edge at the start of
/// that inner step. With the default fixed sweep the coordinates are
/// visited in order `1..d`; with `longest_edge_first` each of the `d` inner
/// steps instead picks the currently longest edge.
///
/// Either way every outer iteration spends exactly `d * (n + 1)` oracle
/// calls and contracts the longest edge by at least 3/2. The loop runs
/// while the box diameter exceeds `2 * epsilon`; the final point is the
/// last box's center.
pub fn direction_bbs(
    handle: &mut OracleHandle,
    bounds: &Bounds,
    config: &DirectionBbsConfig,
) -> Result<RunTrace, SolverError> {
    config.validate()?;
    let dim = handle.dim();
    if dim < 2 {
        return Err(SolverError::DimensionTooSmall { dim });
    }
    if bounds.dim() != dim {
        return Err(SolverError::Oracle(
            crate::oracles::OracleError::DimensionMismatch {
                expected: dim,
                got: bounds.dim(),
            },
        ));
    }
    let n = config.n_points;

    let mut lower = bounds.lower().to_vec();
    let mut upper = bounds.upper().to_vec();
    let mut midpoint = bounds.center();
    let mut iterations = Vec::new();
    let mut total_calls = 0u64;

    loop {
        let current = Bounds::new(lower.clone(), upper.clone()).expect("box stays valid");
        if current.diameter() <= 2.0 * config.epsilon {
            break;
        }

        let mut last_value = f64::INFINITY;
        for sweep in 0..dim {
            let axis = if config.longest_edge_first {
                longest_axis(&lower, &upper)
            } else {
                sweep
            };
            let radius = max_edge(&lower, &upper) / 3.0;
            let (lo, hi) = (lower[axis], upper[axis]);
            let step = (hi - lo) / n as f64;

            let mut best_j = 0usize;
            let mut best_value = f64::INFINITY;
            for j in 0..=n {
                midpoint[axis] = lo + j as f64 * step;
                let value = handle.eval(&midpoint)?;
                if !value.is_finite() {
                    return Err(SolverError::NonFiniteValue {
                        point: midpoint.clone(),
                        value,
                    });
                }
                if value < best_value {
                    best_value = value;
                    best_j = j;
                }
            }
            midpoint[axis] = lo + best_j as f64 * step;
            let (new_lo, new_hi) = shrink_edge(lo, hi, midpoint[axis], radius);
            lower[axis] = new_lo;
            upper[axis] = new_hi;
            last_value = best_value;
        }

        let calls = dim as u64 * (n as u64 + 1);
        total_calls += calls;
        iterations.push(IterationRecord {
            index: iterations.len() + 1,
            box_before: current,
            box_after: Bounds::new(lower.clone(), upper.clone()).expect("box stays valid"),
            incumbent: midpoint.clone(),
            incumbent_value: last_value,
            oracle_calls: calls,
        });
    }

    let final_box = Bounds::new(lower, upper).expect("box stays valid");
    Ok(RunTrace {
        iterations,
        final_point: final_box.center(),
        total_calls,
    })
}

fn max_edge(lower: &[f64], upper: &[f64]) -> f64 {
    lower
        .iter()
        .zip(upper)
        .map(|(lo, hi)| hi - lo)
        .fold(0.0, f64::max)
}

fn longest_axis(lower: &[f64], upper: &[f64]) -> usize {
    let mut best = 0;
    let mut best_len = upper[0] - lower[0];
    for i in 1..lower.len() {
        let len = upper[i] - lower[i];
        if len > best_len {
            best = i;
            best_len = len;
        }
    }
    best
}
