//! Seeded, call-counting oracle evaluation.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::objective::{NoiseModel, ObjectiveSpec};
use super::OracleError;

// Substream salts: the spec seed is XORed with a fixed role constant so the
// fresh-per-call noise stream and the memoized ripple stream are independent.
const XI_STREAM_SALT: u64 = 0x9E37_79B9_7F4A_7C15;
const DELTA_STREAM_SALT: u64 = 0xD1B5_4A32_D192_ED03;

/// Evaluator wrapping an [`ObjectiveSpec`].
///
/// The handle owns all evaluation state: the call counter, the stochastic
/// noise stream (fresh `xi` per call — one-point feedback), and the memo of
/// realized `delta(x)` values keyed by the exact bit pattern of the query
/// coordinates. Two handles built from the same spec produce bit-identical
/// value sequences for identical query sequences.
///
/// The `delta` memo is unbounded: objectives with `delta_bound > 0` grow it
/// by one entry per distinct query point, so very long runs on such
/// objectives hold the full query history in memory.
#[derive(Debug)]
pub struct OracleHandle {
    spec: ObjectiveSpec,
    quadratic: Option<FlatQuadratic>,
    call_count: u64,
    xi_rng: ChaCha8Rng,
    delta_rng: ChaCha8Rng,
    delta_memo: HashMap<Vec<u64>, f64>,
}

/// Row-major copy of the quadratic's matrix for evaluation without nested
/// indexing.
#[derive(Debug)]
struct FlatQuadratic {
    dim: usize,
    a: Vec<f64>,
}

impl FlatQuadratic {
    /// `(1/2) s^T A s` for `s = x - x_star`.
    fn half_quadratic_form(&self, s: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            let row = &self.a[i * self.dim..(i + 1) * self.dim];
            let mut inner = 0.0;
            for (aij, sj) in row.iter().zip(s) {
                inner += aij * sj;
            }
            acc += s[i] * inner;
        }
        0.5 * acc
    }
}

impl OracleHandle {
    pub fn new(spec: ObjectiveSpec) -> Self {
        let seed = spec.seed().unwrap_or(0);
        let quadratic = match &spec {
            ObjectiveSpec::NoisyQuadratic { matrix_a, .. } => Some(FlatQuadratic {
                dim: matrix_a.len(),
                a: matrix_a.iter().flatten().copied().collect(),
            }),
            _ => None,
        };
        Self {
            spec,
            quadratic,
            call_count: 0,
            xi_rng: ChaCha8Rng::seed_from_u64(seed ^ XI_STREAM_SALT),
            delta_rng: ChaCha8Rng::seed_from_u64(seed ^ DELTA_STREAM_SALT),
            delta_memo: HashMap::new(),
        }
    }

    pub fn spec(&self) -> &ObjectiveSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    /// Number of evaluations performed so far.
    pub fn call_count(&self) -> u64 {
        self.call_count
    }

    /// Resets the call counter (RNG streams and the ripple memo are kept).
    pub fn reset_counter(&mut self) {
        self.call_count = 0;
    }

    /// Evaluates the objective, incrementing the call counter by exactly 1.
    pub fn eval(&mut self, x: &[f64]) -> Result<f64, OracleError> {
        let expected = self.spec.dim();
        if x.len() != expected {
            return Err(OracleError::DimensionMismatch {
                expected,
                got: x.len(),
            });
        }
        self.call_count += 1;

        let Self {
            spec,
            quadratic,
            xi_rng,
            delta_rng,
            delta_memo,
            ..
        } = self;

        let value = match spec {
            ObjectiveSpec::OscillatingParabola => {
                let t = x[0] - 2.0;
                10.0 * t * t - 4.0 * (17.0 * t).cos() + 4.0
            }
            ObjectiveSpec::Levy2D => {
                let (a, b) = (x[0], x[1]);
                let s1 = (3.0 * std::f64::consts::PI * (a - 2.7)).sin();
                let s2 = (3.0 * std::f64::consts::PI * (b - 0.3)).sin();
                let s3 = (2.0 * std::f64::consts::PI * (b - 0.3)).sin();
                s1 * s1
                    + (a - 3.7) * (a - 3.7) * (1.0 + s2 * s2)
                    + (b - 1.3) * (b - 1.3) * (1.0 + s3 * s3)
            }
            ObjectiveSpec::SyntheticVeryGood {
                big_m,
                x_star,
                delta_bound,
                ..
            } => {
                let r2 = sq_distance(x, x_star);
                let delta = memoized_delta(delta_memo, delta_rng, x, *delta_bound);
                (0.5 * *big_m + delta) * r2
            }
            ObjectiveSpec::NoisyQuadratic {
                x_star,
                sigma,
                delta_bound,
                noise,
                ..
            } => {
                let s: Vec<f64> = x.iter().zip(x_star.iter()).map(|(xi, xs)| xi - xs).collect();
                let quad = quadratic
                    .as_ref()
                    .expect("quadratic spec always carries a flattened matrix")
                    .half_quadratic_form(&s);
                let dist = s.iter().map(|v| v * v).sum::<f64>().sqrt();
                let xi = if *sigma > 0.0 {
                    draw_xi(xi_rng, *noise, *sigma)
                } else {
                    0.0
                };
                let delta = if *delta_bound > 0.0 {
                    memoized_delta(delta_memo, delta_rng, x, *delta_bound)
                } else {
                    0.0
                };
                quad + (xi + delta) * dist
            }
            ObjectiveSpec::UserAnalytic { f, .. } => f.call(x),
        };
        Ok(value)
    }
}

fn sq_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
}

fn draw_xi(rng: &mut ChaCha8Rng, noise: NoiseModel, sigma: f64) -> f64 {
    match noise {
        NoiseModel::Gaussian => {
            let z: f64 = rng.sample(StandardNormal);
            sigma * z
        }
        NoiseModel::Uniform => {
            let u: f64 = rng.random();
            (2.0 * u - 1.0) * sigma * 3f64.sqrt()
        }
    }
}

/// Realized ripple at `x`: drawn uniformly from `[-bound, bound]` on first
/// visit, bit-identical afterwards.
fn memoized_delta(
    memo: &mut HashMap<Vec<u64>, f64>,
    rng: &mut ChaCha8Rng,
    x: &[f64],
    bound: f64,
) -> f64 {
    let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
    *memo.entry(key).or_insert_with(|| {
        let u: f64 = rng.random();
        (2.0 * u - 1.0) * bound
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn oscillating_parabola_minimum_is_zero() {
        let mut h = OracleHandle::new(ObjectiveSpec::OscillatingParabola);
        assert_eq!(h.eval(&[2.0]).unwrap(), 0.0);
    }

    #[test]
    fn oscillating_parabola_at_cosine_trough() {
        // x = 2 + pi/17 puts the cosine at -1: f = 10 (pi/17)^2 + 8.
        let mut h = OracleHandle::new(ObjectiveSpec::OscillatingParabola);
        let x = 2.0 + std::f64::consts::PI / 17.0;
        let expected = 10.0 * (std::f64::consts::PI / 17.0).powi(2) + 8.0;
        assert_relative_eq!(h.eval(&[x]).unwrap(), expected, max_relative = 1e-9);
    }

    #[test]
    fn levy_minimum_is_zero() {
        let mut h = OracleHandle::new(ObjectiveSpec::Levy2D);
        let v = h.eval(&[3.7, 1.3]).unwrap();
        assert!(v.abs() < 1e-12, "expected ~0, got {v}");
    }

    #[test]
    fn clean_quadratic_value() {
        let a = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let spec = ObjectiveSpec::noisy_quadratic(a, vec![0.0, 0.0], 0.0, 0.0, 7).unwrap();
        let mut h = OracleHandle::new(spec);
        assert_eq!(h.eval(&[3.0, 4.0]).unwrap(), 12.5);
    }

    #[test]
    fn call_count_accumulates_and_resets() {
        let mut h = OracleHandle::new(ObjectiveSpec::OscillatingParabola);
        assert_eq!(h.call_count(), 0);
        for _ in 0..16 {
            h.eval(&[1.0]).unwrap();
        }
        assert_eq!(h.call_count(), 16);
        h.reset_counter();
        assert_eq!(h.call_count(), 0);
    }

    #[test]
    fn dimension_mismatch_detected() {
        let mut h = OracleHandle::new(ObjectiveSpec::Levy2D);
        assert!(matches!(
            h.eval(&[1.0]),
            Err(OracleError::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn synthetic_ripple_is_memoized() {
        let spec =
            ObjectiveSpec::synthetic_very_good(20.0, vec![1.43, 3.69], 20.0 / 16.0, 99).unwrap();
        let mut h = OracleHandle::new(spec);
        let x = [0.123456, -7.654321];
        let v1 = h.eval(&x).unwrap();
        let v2 = h.eval(&x).unwrap();
        assert_eq!(v1.to_bits(), v2.to_bits());
        assert_eq!(h.call_count(), 2);
    }

    #[test]
    fn one_point_feedback_sees_fresh_noise() {
        let a = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let spec = ObjectiveSpec::noisy_quadratic(a, vec![0.0, 0.0], 1.0, 0.0, 42).unwrap();
        let mut h = OracleHandle::new(spec);
        for _ in 0..100 {
            let v1 = h.eval(&[1.0, 1.0]).unwrap();
            let v2 = h.eval(&[1.0, 1.0]).unwrap();
            assert_ne!(v1, v2);
        }
    }

    #[test]
    fn identical_specs_give_identical_sequences() {
        let a = vec![vec![2.0, 0.0], vec![0.0, 1.0]];
        let spec =
            ObjectiveSpec::noisy_quadratic(a, vec![0.5, -0.5], 2.0, 0.1, 2024).unwrap();
        let mut h1 = OracleHandle::new(spec.clone());
        let mut h2 = OracleHandle::new(spec);
        let queries = [[0.0, 0.0], [1.0, 2.0], [1.0, 2.0], [-3.0, 4.0]];
        for q in &queries {
            let v1 = h1.eval(q).unwrap();
            let v2 = h2.eval(q).unwrap();
            assert_eq!(v1.to_bits(), v2.to_bits());
        }
    }

    #[test]
    fn zero_noise_quadratic_matches_exact_form() {
        let a = vec![vec![3.0, 1.0], vec![1.0, 2.0]];
        let x_star = vec![0.25, -1.5];
        let spec = ObjectiveSpec::noisy_quadratic(a.clone(), x_star.clone(), 0.0, 0.0, 5).unwrap();
        let mut h = OracleHandle::new(spec);
        for x in [[0.0, 0.0], [1.0, 1.0], [-2.0, 3.0], [10.0, -10.0]] {
            let s = [x[0] - x_star[0], x[1] - x_star[1]];
            let exact = 0.5
                * (s[0] * (a[0][0] * s[0] + a[0][1] * s[1])
                    + s[1] * (a[1][0] * s[0] + a[1][1] * s[1]));
            assert_relative_eq!(h.eval(&x).unwrap(), exact, epsilon = 1e-12);
        }
    }

    #[test]
    fn stochastic_noise_has_zero_mean() {
        // Recover xi from the evaluation and check |mean| <= 4 sigma / sqrt(N).
        let a = vec![vec![1.0]];
        let sigma = 2.0;
        let spec = ObjectiveSpec::noisy_quadratic(a, vec![0.0], sigma, 0.0, 31337).unwrap();
        let mut h = OracleHandle::new(spec);
        let x = [3.0];
        let exact = 0.5 * 9.0;
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let v = h.eval(&x).unwrap();
            sum += (v - exact) / 3.0;
        }
        let mean = sum / n as f64;
        let limit = 4.0 * sigma / (n as f64).sqrt();
        assert!(
            mean.abs() <= limit,
            "sample mean {mean} exceeds {limit}"
        );
    }

    #[test]
    fn uniform_noise_model_differs_but_reproduces() {
        let a = vec![vec![1.0]];
        let spec = ObjectiveSpec::noisy_quadratic_with(
            a,
            vec![0.0],
            1.0,
            0.0,
            NoiseModel::Uniform,
            7,
        )
        .unwrap();
        let mut h1 = OracleHandle::new(spec.clone());
        let mut h2 = OracleHandle::new(spec);
        let v1 = h1.eval(&[1.0]).unwrap();
        assert_eq!(v1.to_bits(), h2.eval(&[1.0]).unwrap().to_bits());
        // uniform noise is bounded by sigma * sqrt(3) * |x - x_star|
        for _ in 0..1000 {
            let v = h1.eval(&[1.0]).unwrap();
            assert!((v - 0.5).abs() <= 3f64.sqrt() + 1e-12);
        }
    }
}
