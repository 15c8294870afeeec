//! Full-grid box-shrinking search in d dimensions.

use crate::geometry::{build_grid, shrink_edge, Bounds};
use crate::oracles::OracleHandle;

use super::{IterationRecord, MultiBbsConfig, RunTrace, SolverError};

/// Minimizes over an axis-aligned box by exhaustive grid search with
/// per-iteration box shrinking.
///
/// Each iteration draws the uniform grid of step `r = max_edge / n`
/// (`n = ceil(alpha * ceil(sqrt(d * big_l / mu)))`), so grid cells are cubes
/// and variables with a large spread get optimized first. The box is then
/// clipped, coordinate by coordinate and from the pre-update snapshot, to a
/// half-width of `n/(2*alpha)` grid steps around the argmin point (ties
/// break to the lexicographically smallest index). The longest edge
/// therefore contracts by at least `alpha` per iteration; the loop runs
/// while the box diameter exceeds `epsilon` and the final point is the last
/// box's center.
///
/// The per-iteration grid has `prod_j (counts_j + 1) <= (n+1)^d` points, so
/// this solver is intended for low dimensions; iterations that would push
/// the total past `config.max_oracle_calls` abort with
/// [`SolverError::BudgetExceeded`].
pub fn multi_bbs(
    handle: &mut OracleHandle,
    bounds: &Bounds,
    config: &MultiBbsConfig,
) -> Result<RunTrace, SolverError> {
    config.validate()?;
    let dim = handle.dim();
    if bounds.dim() != dim {
        return Err(SolverError::Oracle(
            crate::oracles::OracleError::DimensionMismatch {
                expected: dim,
                got: bounds.dim(),
            },
        ));
    }
    let n = config.grid_n(dim);

    let mut current = bounds.clone();
    let mut iterations = Vec::new();
    let mut total_calls = 0u64;

    while current.diameter() > config.epsilon {
        let grid = build_grid(&current, n)?;
        let points = grid
            .num_points()
            .filter(|&p| total_calls.checked_add(p).is_some_and(|t| t <= config.max_oracle_calls))
            .ok_or(SolverError::BudgetExceeded {
                calls: total_calls,
                needed: grid.num_points().unwrap_or(u64::MAX),
                cap: config.max_oracle_calls,
            })?;

        let mut best_index: Option<Vec<usize>> = None;
        let mut best_value = f64::INFINITY;
        for ix in grid.indices() {
            let point = grid.point(&ix);
            let value = handle.eval(&point)?;
            if !value.is_finite() {
                return Err(SolverError::NonFiniteValue { point, value });
            }
            if value < best_value {
                best_value = value;
                best_index = Some(ix);
            }
        }
        let incumbent = grid.point(best_index.as_ref().expect("grid is never empty"));

        let half_width = n as f64 / (2.0 * config.alpha) * grid.step();
        let mut new_lower = Vec::with_capacity(dim);
        let mut new_upper = Vec::with_capacity(dim);
        for j in 0..dim {
            let (lo, hi) = shrink_edge(
                current.lower()[j],
                current.upper()[j],
                incumbent[j],
                half_width,
            );
            new_lower.push(lo);
            new_upper.push(hi);
        }
        let shrunk = Bounds::new(new_lower, new_upper).expect("clipped box stays valid");

        total_calls += points;
        iterations.push(IterationRecord {
            index: iterations.len() + 1,
            box_before: current.clone(),
            box_after: shrunk.clone(),
            incumbent,
            incumbent_value: best_value,
            oracle_calls: points,
        });
        current = shrunk;
    }

    Ok(RunTrace {
        iterations,
        final_point: current.center(),
        total_calls,
    })
}
