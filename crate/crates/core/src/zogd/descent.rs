//! The zeroth-order gradient descent loop.

use std::io;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::oracles::OracleHandle;

use super::estimator::grad_estimate;
use super::{ZogdConfig, ZogdError};

/// Iterates whose norm passes this limit abort the run with
/// [`ZogdError::Diverged`] instead of silently overflowing to inf/NaN.
const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub grad_norm: f64,
    /// Always 2: one evaluation on each side of the central difference.
    pub oracle_calls: u64,
}

/// Full trace of a descent run: the `steps + 1` iterates, one record per
/// step, and squared distances to `x_star` when the minimizer is known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZogdTrace {
    pub points: Vec<Vec<f64>>,
    pub steps: Vec<StepRecord>,
    pub distances_sq: Option<Vec<f64>>,
    pub total_calls: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZogdSummary {
    pub final_point: Vec<f64>,
    pub total_calls: u64,
    pub steps: usize,
}

impl ZogdTrace {
    pub fn final_point(&self) -> &[f64] {
        self.points.last().expect("trace always holds x0")
    }

    pub fn summary(&self) -> ZogdSummary {
        ZogdSummary {
            final_point: self.final_point().to_vec(),
            total_calls: self.total_calls,
            steps: self.steps.len(),
        }
    }

    /// Writes one CSV row per iterate with columns
    /// `step, distance_sq, grad_norm, cumulative_calls`.
    ///
    /// Row `k` holds the squared distance of iterate `x_k` and the norm of
    /// the gradient estimate that produced it (empty for `k = 0`, as is
    /// `distance_sq` throughout when the minimizer is unknown).
    pub fn write_csv<W: io::Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["step", "distance_sq", "grad_norm", "cumulative_calls"])?;
        for (k, _point) in self.points.iter().enumerate() {
            let distance = self
                .distances_sq
                .as_ref()
                .map(|d| d[k].to_string())
                .unwrap_or_default();
            let grad_norm = if k == 0 {
                String::new()
            } else {
                self.steps[k - 1].grad_norm.to_string()
            };
            w.write_record([
                k.to_string(),
                distance,
                grad_norm,
                (2 * k as u64).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs `steps` iterations of `x <- x - gamma_k * g(x, xi, tau_k, e_k)`
/// from `x0`, with a fresh direction and fresh noise every step. The
/// problem is unconstrained: no projection is applied. Supplying `x_star`
/// records squared distances in the trace.
pub fn zogd_run(
    handle: &mut OracleHandle,
    x0: &[f64],
    config: &ZogdConfig,
    x_star: Option<&[f64]>,
) -> Result<ZogdTrace, ZogdError> {
    config.validate()?;
    let dim = handle.dim();
    if x0.len() != dim {
        return Err(ZogdError::DimensionMismatch {
            expected: dim,
            got: x0.len(),
        });
    }
    if let Some(xs) = x_star {
        if xs.len() != dim {
            return Err(ZogdError::DimensionMismatch {
                expected: dim,
                got: xs.len(),
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut x = x0.to_vec();
    let mut points = Vec::with_capacity(config.steps + 1);
    let mut steps = Vec::with_capacity(config.steps);
    let mut distances = x_star.map(|_| Vec::with_capacity(config.steps + 1));

    let record_distance = |distances: &mut Option<Vec<f64>>, x: &[f64]| {
        if let (Some(list), Some(xs)) = (distances.as_mut(), x_star) {
            list.push(
                x.iter()
                    .zip(xs)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>(),
            );
        }
    };

    points.push(x.clone());
    record_distance(&mut distances, &x);

    for k in 0..config.steps {
        let gamma = config.gamma.at(k);
        let tau = config.tau.at(k);
        let g = grad_estimate(handle, &x, tau, &mut rng)?;
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi -= gamma * gi;
        }

        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm > DIVERGENCE_LIMIT {
            return Err(ZogdError::Diverged { step: k + 1, norm });
        }

        steps.push(StepRecord {
            grad_norm: g.iter().map(|v| v * v).sum::<f64>().sqrt(),
            oracle_calls: 2,
        });
        points.push(x.clone());
        record_distance(&mut distances, &x);
    }

    Ok(ZogdTrace {
        points,
        steps,
        distances_sq: distances,
        total_calls: 2 * config.steps as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::ObjectiveSpec;

    fn identity_quadratic(d: usize, sigma: f64, seed: u64) -> OracleHandle {
        let a = (0..d)
            .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let spec = ObjectiveSpec::noisy_quadratic(a, vec![0.0; d], sigma, 0.0, seed).unwrap();
        OracleHandle::new(spec)
    }

    #[test]
    fn zero_steps_trace_is_just_x0() {
        let mut h = identity_quadratic(2, 0.0, 0);
        let config = ZogdConfig::new(0, 0.1, 1.0, 0);
        let trace = zogd_run(&mut h, &[1.0, 2.0], &config, Some(&[0.0, 0.0])).unwrap();
        assert_eq!(trace.points, vec![vec![1.0, 2.0]]);
        assert!(trace.steps.is_empty());
        assert_eq!(trace.total_calls, 0);
        assert_eq!(trace.distances_sq, Some(vec![5.0]));
    }

    #[test]
    fn trace_shape_and_call_accounting() {
        let mut h = identity_quadratic(3, 0.5, 7);
        let k = 50;
        let config = ZogdConfig::new(k, 1.0 / (5.0 * 3.0), 1.0, 3);
        let trace = zogd_run(&mut h, &[5.0, -5.0, 2.0], &config, None).unwrap();
        assert_eq!(trace.points.len(), k + 1);
        assert_eq!(trace.steps.len(), k);
        assert_eq!(trace.total_calls, 2 * k as u64);
        assert_eq!(h.call_count(), 2 * k as u64);
        assert!(trace.steps.iter().all(|s| s.oracle_calls == 2));
        assert!(trace.distances_sq.is_none());
    }

    #[test]
    fn noiseless_contraction_beats_corollary_bound() {
        // sigma = 0, A = I, gamma = 1/(5 d L) = 0.1: the mean squared
        // distance after K steps stays under (1 - gamma mu / 2)^K * dist0^2;
        // the frozen bound 100 * 0.9^200 is stricter still and also holds.
        let k = 200;
        let gamma = 0.1;
        let n_seeds = 100;
        let mut total = 0.0;
        for seed in 0..n_seeds {
            let mut h = identity_quadratic(2, 0.0, seed);
            let config = ZogdConfig::new(k, gamma, 1e-3, seed ^ 0xABCD);
            let trace = zogd_run(&mut h, &[10.0, 0.0], &config, Some(&[0.0, 0.0])).unwrap();
            total += trace.distances_sq.as_ref().unwrap()[k];
        }
        let mean = total / n_seeds as f64;
        let corollary = (1.0 - gamma * 1.0 / 2.0).powi(k as i32) * 100.0;
        let frozen = 100.0 * 0.9f64.powi(200);
        assert!(mean <= frozen, "mean {mean} vs frozen bound {frozen}");
        assert!(mean <= corollary, "mean {mean} vs bound {corollary}");
    }

    #[test]
    fn per_sample_monotone_on_isotropic_quadratic() {
        // On A = I with sigma = delta = 0 and gamma <= 1/(5 d L), each step
        // is a damped projection of the true gradient: the distance to the
        // minimizer never increases along a single trajectory. (Not true for
        // anisotropic A, where only the averaged contraction holds.)
        let d = 5;
        let mut h = identity_quadratic(d, 0.0, 0);
        let config = ZogdConfig::new(500, 1.0 / (5.0 * d as f64), 1e-3, 11);
        let trace = zogd_run(&mut h, &[3.0, -1.0, 2.0, 0.5, -4.0], &config, Some(&[0.0; 5]))
            .unwrap();
        let d2 = trace.distances_sq.unwrap();
        for w in d2.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "distance grew: {w:?}");
        }
    }

    #[test]
    fn divergence_guard_trips() {
        let mut h = identity_quadratic(2, 0.0, 0);
        let config = ZogdConfig::new(10, 1e15, 1.0, 0);
        assert!(matches!(
            zogd_run(&mut h, &[1.0, 1.0], &config, None),
            Err(ZogdError::Diverged { .. })
        ));
    }

    #[test]
    fn identical_seeds_identical_traces() {
        let config = ZogdConfig::new(100, 0.05, 1.0, 99);
        let mut h1 = identity_quadratic(2, 1.0, 5);
        let mut h2 = identity_quadratic(2, 1.0, 5);
        let t1 = zogd_run(&mut h1, &[4.0, 4.0], &config, Some(&[0.0, 0.0])).unwrap();
        let t2 = zogd_run(&mut h2, &[4.0, 4.0], &config, Some(&[0.0, 0.0])).unwrap();
        assert_eq!(t1, t2);
    }

    #[test]
    fn csv_layout() {
        let mut h = identity_quadratic(2, 0.0, 0);
        let config = ZogdConfig::new(2, 0.1, 1.0, 1);
        let trace = zogd_run(&mut h, &[1.0, 0.0], &config, Some(&[0.0, 0.0])).unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "step,distance_sq,grad_norm,cumulative_calls");
        assert!(lines[1].starts_with("0,1,,0"));
        assert_eq!(lines.len(), 4);
    }
}
