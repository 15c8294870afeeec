//! One-dimensional grid-shrinking search.

use crate::geometry::{shrink_edge, Bounds};
use crate::oracles::OracleHandle;

use super::{BbsConfig, IterationRecord, RunTrace, SolverError};

/// Minimizes a one-dimensional objective over `[lo, hi]`.
///
/// Each iteration evaluates the `n + 1` points `b + i*(B-b)/n` with
/// `n = 2 * ceil(sqrt(big_l / mu))`, takes the argmin (smallest `i` on
/// ties), and clips the interval to a half-width of `n/4` grid steps around
/// it; both new endpoints are computed from the interval as it stood at the
/// start of the iteration. The loop runs while the interval is longer than
/// `2 * epsilon` and the returned point is the final midpoint, so
/// `|final - x*| <= epsilon` whenever the class condition holds with the
/// supplied constants.
pub fn bbs_1d(
    handle: &mut OracleHandle,
    lo: f64,
    hi: f64,
    config: &BbsConfig,
) -> Result<RunTrace, SolverError> {
    config.validate()?;
    if !lo.is_finite() || !hi.is_finite() || !(lo < hi) {
        return Err(SolverError::InvalidInterval { lo, hi });
    }
    let n = config.grid_n();

    let mut b = lo;
    let mut big_b = hi;
    let mut iterations = Vec::new();
    let mut total_calls = 0u64;

    while big_b - b > 2.0 * config.epsilon {
        let step = (big_b - b) / n as f64;
        let mut best_i = 0usize;
        let mut best_value = f64::INFINITY;
        for i in 0..=n {
            let x = b + i as f64 * step;
            let value = handle.eval(&[x])?;
            if !value.is_finite() {
                return Err(SolverError::NonFiniteValue {
                    point: vec![x],
                    value,
                });
            }
            if value < best_value {
                best_value = value;
                best_i = i;
            }
        }
        let incumbent = b + best_i as f64 * step;
        let half_width = (n as f64 / 4.0) * step;
        let (new_b, new_big_b) = shrink_edge(b, big_b, incumbent, half_width);

        total_calls += n as u64 + 1;
        iterations.push(IterationRecord {
            index: iterations.len() + 1,
            box_before: Bounds::new(vec![b], vec![big_b]).expect("valid interval"),
            box_after: Bounds::new(vec![new_b], vec![new_big_b]).expect("shrunken interval"),
            incumbent: vec![incumbent],
            incumbent_value: best_value,
            oracle_calls: n as u64 + 1,
        });
        b = new_b;
        big_b = new_big_b;
    }

    Ok(RunTrace {
        iterations,
        final_point: vec![0.5 * (b + big_b)],
        total_calls,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{GoodClassParams, ObjectiveSpec};

    fn shifted_parabola() -> OracleHandle {
        let spec = ObjectiveSpec::user_analytic(
            1,
            |x: &[f64]| (x[0] - 2.0) * (x[0] - 2.0),
            Some(vec![2.0]),
        )
        .unwrap();
        OracleHandle::new(spec)
    }

    #[test]
    fn symmetric_parabola_first_shrink_and_convergence() {
        let mut h = shifted_parabola();
        let config = BbsConfig::new(1e-6, GoodClassParams::new(2.0, 2.0).unwrap());
        assert_eq!(config.grid_n(), 2);
        let trace = bbs_1d(&mut h, 0.0, 4.0, &config).unwrap();

        // grid {0, 2, 4} -> argmin at the midpoint, interval clips to [1, 3]
        let first = &trace.iterations[0];
        assert_eq!(first.incumbent, vec![2.0]);
        assert_eq!(first.box_after.lower(), &[1.0]);
        assert_eq!(first.box_after.upper(), &[3.0]);

        assert!((trace.final_point[0] - 2.0).abs() <= 1e-6);
        assert_eq!(trace.total_calls, handle_calls(&h));
    }

    fn handle_calls(h: &OracleHandle) -> u64 {
        h.call_count()
    }

    #[test]
    fn oscillating_parabola_with_adequate_class_constants() {
        let mut h = OracleHandle::new(ObjectiveSpec::OscillatingParabola);
        let config = BbsConfig::new(1e-6, GoodClassParams::new(10.0, 1200.0).unwrap());
        let trace = bbs_1d(&mut h, 0.0, 6.5, &config).unwrap();
        assert!(
            (trace.final_point[0] - 2.0).abs() <= 1.01e-6,
            "final point {} missed the minimizer",
            trace.final_point[0]
        );
    }

    #[test]
    fn loose_epsilon_means_zero_iterations() {
        let mut h = shifted_parabola();
        let config = BbsConfig::new(2.0, GoodClassParams::new(2.0, 2.0).unwrap());
        let trace = bbs_1d(&mut h, 0.0, 4.0, &config).unwrap();
        assert!(trace.iterations.is_empty());
        assert_eq!(trace.final_point, vec![2.0]);
        assert_eq!(trace.total_calls, 0);
    }

    #[test]
    fn invalid_interval_rejected() {
        let mut h = shifted_parabola();
        let config = BbsConfig::new(1e-6, GoodClassParams::new(1.0, 1.0).unwrap());
        assert!(matches!(
            bbs_1d(&mut h, 4.0, 0.0, &config),
            Err(SolverError::InvalidInterval { .. })
        ));
        assert!(matches!(
            bbs_1d(&mut h, 2.0, 2.0, &config),
            Err(SolverError::InvalidInterval { .. })
        ));
    }

    #[test]
    fn non_finite_oracle_value_detected() {
        let spec = ObjectiveSpec::user_analytic(1, |_x: &[f64]| f64::NAN, None).unwrap();
        let mut h = OracleHandle::new(spec);
        let config = BbsConfig::new(1e-3, GoodClassParams::new(1.0, 1.0).unwrap());
        assert!(matches!(
            bbs_1d(&mut h, 0.0, 1.0, &config),
            Err(SolverError::NonFiniteValue { .. })
        ));
    }

    #[test]
    fn boxes_shrink_monotonically() {
        let mut h = OracleHandle::new(ObjectiveSpec::OscillatingParabola);
        let config = BbsConfig::new(1e-4, GoodClassParams::new(10.0, 1200.0).unwrap());
        let trace = bbs_1d(&mut h, 0.0, 6.5, &config).unwrap();
        for rec in &trace.iterations {
            assert!(rec.box_after.is_subset_of(&rec.box_before, 0.0));
            // half-width n/4 out of n steps halves the interval at minimum
            assert!(crate::solvers::contraction_holds(
                &rec.box_before,
                &rec.box_after,
                2.0
            ));
        }
    }
}
