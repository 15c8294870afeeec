//! Declarative objective descriptions.
//!
//! An [`ObjectiveSpec`] is pure data (plus an opaque callable for
//! user-supplied functions); evaluation state lives in
//! [`super::OracleHandle`]. Specs serialize to a JSON envelope
//! `{"variant": ..., "params": {...}, "seed": ...}` with matrices as
//! row-major nested arrays.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::de::Error as _;
use serde::ser::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::OracleError;

/// Symmetry tolerance for noisy-quadratic matrices.
const SYMMETRY_TOL: f64 = 1e-10;

/// Distribution of the stochastic oracle noise `xi` (zero mean, second
/// moment `sigma^2` either way).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    /// `xi ~ N(0, sigma^2)`.
    #[default]
    Gaussian,
    /// `xi` uniform on `[-sigma*sqrt(3), sigma*sqrt(3)]`.
    Uniform,
}

/// An opaque user-supplied objective.
#[derive(Clone)]
pub struct AnalyticFn(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>);

impl AnalyticFn {
    pub fn new(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }

    pub fn call(&self, x: &[f64]) -> f64 {
        (self.0)(x)
    }
}

impl fmt::Debug for AnalyticFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("AnalyticFn(..)")
    }
}

/// Description of a test function plus its noise model; the only way
/// solvers see an objective.
#[derive(Debug, Clone)]
pub enum ObjectiveSpec {
    /// `f(x) = 10 (x-2)^2 - 4 cos(17 (x-2)) + 4` on one variable; global
    /// minimum `f(2) = 0`.
    OscillatingParabola,
    /// Two-dimensional Levy-style function with global minimum
    /// `f(3.7, 1.3) = 0`.
    Levy2D,
    /// `f(x) = (big_m/2 + delta(x)) |x - x_star|^2`, where `delta(x)` is
    /// drawn uniformly from `[-delta_bound, delta_bound]` independently at
    /// every distinct query point, then memoized so the objective is a
    /// function. Realizations are generated only at queried points.
    SyntheticVeryGood {
        big_m: f64,
        x_star: Vec<f64>,
        delta_bound: f64,
        seed: u64,
    },
    /// `f(x, xi) = (1/2)(x-x_star)^T A (x-x_star) + (xi + delta(x)) |x - x_star|`
    /// with `A` symmetric positive definite, `xi` fresh on every call
    /// (one-point feedback) and `delta(x)` memoized per point.
    NoisyQuadratic {
        matrix_a: Vec<Vec<f64>>,
        x_star: Vec<f64>,
        sigma: f64,
        delta_bound: f64,
        noise: NoiseModel,
        seed: u64,
    },
    /// Trusted black box. Not JSON-serializable; class verification for
    /// these is sampling-based evidence, never a proof.
    UserAnalytic {
        dim: usize,
        f: AnalyticFn,
        known_x_star: Option<Vec<f64>>,
    },
}

impl ObjectiveSpec {
    pub fn oscillating_parabola() -> Self {
        Self::OscillatingParabola
    }

    pub fn levy_2d() -> Self {
        Self::Levy2D
    }

    pub fn synthetic_very_good(
        big_m: f64,
        x_star: Vec<f64>,
        delta_bound: f64,
        seed: u64,
    ) -> Result<Self, OracleError> {
        if !(big_m > 0.0) {
            return Err(OracleError::InvalidParameter(format!(
                "need big_m > 0, got {big_m}"
            )));
        }
        if x_star.is_empty() {
            return Err(OracleError::InvalidParameter("x_star is empty".into()));
        }
        if !(delta_bound >= 0.0) {
            return Err(OracleError::InvalidParameter(format!(
                "need delta_bound >= 0, got {delta_bound}"
            )));
        }
        let d = x_star.len();
        if d >= 2 {
            let cap = big_m / (16.0 * (d as f64 - 1.0));
            if delta_bound > cap * (1.0 + 1e-12) {
                return Err(OracleError::InvalidParameter(format!(
                    "delta_bound = {delta_bound} exceeds big_m/(16(d-1)) = {cap}"
                )));
            }
        } else if delta_bound >= big_m / 2.0 {
            return Err(OracleError::InvalidParameter(
                "delta_bound must stay below big_m/2".into(),
            ));
        }
        Ok(Self::SyntheticVeryGood {
            big_m,
            x_star,
            delta_bound,
            seed,
        })
    }

    pub fn noisy_quadratic(
        matrix_a: Vec<Vec<f64>>,
        x_star: Vec<f64>,
        sigma: f64,
        delta_bound: f64,
        seed: u64,
    ) -> Result<Self, OracleError> {
        Self::noisy_quadratic_with(matrix_a, x_star, sigma, delta_bound, NoiseModel::default(), seed)
    }

    pub fn noisy_quadratic_with(
        matrix_a: Vec<Vec<f64>>,
        x_star: Vec<f64>,
        sigma: f64,
        delta_bound: f64,
        noise: NoiseModel,
        seed: u64,
    ) -> Result<Self, OracleError> {
        let d = x_star.len();
        if d == 0 {
            return Err(OracleError::InvalidParameter("x_star is empty".into()));
        }
        if matrix_a.len() != d || matrix_a.iter().any(|row| row.len() != d) {
            return Err(OracleError::DimensionMismatch {
                expected: d,
                got: matrix_a.len(),
            });
        }
        if !(sigma >= 0.0) || !(delta_bound >= 0.0) {
            return Err(OracleError::InvalidParameter(format!(
                "need sigma >= 0 and delta_bound >= 0, got sigma = {sigma}, delta_bound = {delta_bound}"
            )));
        }
        for i in 0..d {
            for j in (i + 1)..d {
                let diff = (matrix_a[i][j] - matrix_a[j][i]).abs();
                if diff > SYMMETRY_TOL {
                    return Err(OracleError::NotSymmetric { i, j, diff });
                }
            }
        }
        let dense = DMatrix::from_fn(d, d, |i, j| matrix_a[i][j]);
        if dense.cholesky().is_none() {
            return Err(OracleError::NotPositiveDefinite);
        }
        Ok(Self::NoisyQuadratic {
            matrix_a,
            x_star,
            sigma,
            delta_bound,
            noise,
            seed,
        })
    }

    pub fn user_analytic(
        dim: usize,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        known_x_star: Option<Vec<f64>>,
    ) -> Result<Self, OracleError> {
        if dim == 0 {
            return Err(OracleError::InvalidParameter(
                "dimension must be at least 1".into(),
            ));
        }
        if let Some(xs) = &known_x_star {
            if xs.len() != dim {
                return Err(OracleError::DimensionMismatch {
                    expected: dim,
                    got: xs.len(),
                });
            }
        }
        Ok(Self::UserAnalytic {
            dim,
            f: AnalyticFn::new(f),
            known_x_star,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::OscillatingParabola => 1,
            Self::Levy2D => 2,
            Self::SyntheticVeryGood { x_star, .. } => x_star.len(),
            Self::NoisyQuadratic { x_star, .. } => x_star.len(),
            Self::UserAnalytic { dim, .. } => *dim,
        }
    }

    /// The global minimizer, when the spec knows it.
    pub fn known_x_star(&self) -> Option<Vec<f64>> {
        match self {
            Self::OscillatingParabola => Some(vec![2.0]),
            Self::Levy2D => Some(vec![3.7, 1.3]),
            Self::SyntheticVeryGood { x_star, .. } => Some(x_star.clone()),
            Self::NoisyQuadratic { x_star, .. } => Some(x_star.clone()),
            Self::UserAnalytic { known_x_star, .. } => known_x_star.clone(),
        }
    }

    /// True when repeated evaluation at the same point can return different
    /// values (stochastic noise present).
    pub fn has_stochastic_noise(&self) -> bool {
        matches!(self, Self::NoisyQuadratic { sigma, .. } if *sigma > 0.0)
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Self::SyntheticVeryGood { seed, .. } | Self::NoisyQuadratic { seed, .. } => Some(*seed),
            _ => None,
        }
    }

    /// Returns a copy with the RNG seed replaced (no-op for deterministic
    /// variants that carry no seed).
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut out = self.clone();
        match &mut out {
            Self::SyntheticVeryGood { seed: s, .. } | Self::NoisyQuadratic { seed: s, .. } => {
                *s = seed
            }
            _ => {}
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    variant: String,
    #[serde(default)]
    params: serde_json::Value,
    #[serde(default)]
    seed: u64,
}

#[derive(Serialize, Deserialize)]
struct SyntheticParams {
    big_m: f64,
    x_star: Vec<f64>,
    delta_bound: f64,
}

#[derive(Serialize, Deserialize)]
struct QuadraticParams {
    matrix_a: Vec<Vec<f64>>,
    x_star: Vec<f64>,
    sigma: f64,
    delta_bound: f64,
    #[serde(default)]
    noise: NoiseModel,
}

impl Serialize for ObjectiveSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let envelope = match self {
            Self::OscillatingParabola => Envelope {
                variant: "oscillating_parabola".into(),
                params: serde_json::Value::Object(Default::default()),
                seed: 0,
            },
            Self::Levy2D => Envelope {
                variant: "levy2d".into(),
                params: serde_json::Value::Object(Default::default()),
                seed: 0,
            },
            Self::SyntheticVeryGood {
                big_m,
                x_star,
                delta_bound,
                seed,
            } => Envelope {
                variant: "synthetic_very_good".into(),
                params: serde_json::to_value(SyntheticParams {
                    big_m: *big_m,
                    x_star: x_star.clone(),
                    delta_bound: *delta_bound,
                })
                .map_err(S::Error::custom)?,
                seed: *seed,
            },
            Self::NoisyQuadratic {
                matrix_a,
                x_star,
                sigma,
                delta_bound,
                noise,
                seed,
            } => Envelope {
                variant: "noisy_quadratic".into(),
                params: serde_json::to_value(QuadraticParams {
                    matrix_a: matrix_a.clone(),
                    x_star: x_star.clone(),
                    sigma: *sigma,
                    delta_bound: *delta_bound,
                    noise: *noise,
                })
                .map_err(S::Error::custom)?,
                seed: *seed,
            },
            Self::UserAnalytic { .. } => {
                return Err(S::Error::custom(
                    "user_analytic objectives hold a callable and cannot be serialized",
                ))
            }
        };
        envelope.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ObjectiveSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let envelope = Envelope::deserialize(deserializer)?;
        match envelope.variant.as_str() {
            "oscillating_parabola" => Ok(Self::OscillatingParabola),
            "levy2d" => Ok(Self::Levy2D),
            "synthetic_very_good" => {
                let p: SyntheticParams =
                    serde_json::from_value(envelope.params).map_err(D::Error::custom)?;
                Self::synthetic_very_good(p.big_m, p.x_star, p.delta_bound, envelope.seed)
                    .map_err(D::Error::custom)
            }
            "noisy_quadratic" => {
                let p: QuadraticParams =
                    serde_json::from_value(envelope.params).map_err(D::Error::custom)?;
                Self::noisy_quadratic_with(
                    p.matrix_a,
                    p.x_star,
                    p.sigma,
                    p.delta_bound,
                    p.noise,
                    envelope.seed,
                )
                .map_err(D::Error::custom)
            }
            "user_analytic" => Err(D::Error::custom(
                "user_analytic objectives cannot be constructed from JSON",
            )),
            other => Err(D::Error::custom(format!("unknown objective variant `{other}`"))),
        }
    }
}
