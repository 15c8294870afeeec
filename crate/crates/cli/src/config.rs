//! JSON experiment configuration.
//!
//! An experiment document looks like
//!
//! ```json
//! {
//!   "objective": {"variant": "oscillating_parabola", "params": {}, "seed": 0},
//!   "solver": {
//!     "kind": "multibbs",
//!     "epsilon": 1e-6, "mu": 10.0, "big_l": 600.0, "alpha": 2.0,
//!     "bounds": {"lower": [0.0], "upper": [6.5]}
//!   },
//!   "output_path": "runs",
//!   "seed": 42,
//!   "repeats": 1
//! }
//! ```
//!
//! `seed` drives harness-level randomness (replica seeding); the objective's
//! own noise streams are seeded inside the `objective` document. For
//! stochastic descent runs, `repeats > 1` executes replicas with seeds
//! `seed, seed+1, ...` (objective seeds shifted the same way) and appends a
//! seed-averaged squared-distance column to the CSV.

use serde::{Deserialize, Serialize};

use parabox::zogd::StepSchedule;
use parabox::{Bounds, ObjectiveSpec};

use crate::HarnessError;

fn default_repeats() -> u32 {
    1
}

fn default_n_points() -> usize {
    15
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub objective: ObjectiveSpec,
    pub solver: SolverSpec,
    /// Output directory; overridable by `--out` and the `PARABOX_OUT`
    /// environment variable (flag > config > env > current directory).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_repeats")]
    pub repeats: u32,
    /// Allow the exhaustive grid solver on dimensions above 3, where its
    /// per-iteration cost `(n+1)^d` explodes.
    #[serde(default)]
    pub force: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SolverSpec {
    Bbs {
        epsilon: f64,
        mu: f64,
        big_l: f64,
        lo: f64,
        hi: f64,
    },
    MultiBbs {
        epsilon: f64,
        mu: f64,
        big_l: f64,
        alpha: f64,
        bounds: Bounds,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_oracle_calls: Option<u64>,
    },
    DirBbs {
        epsilon: f64,
        bounds: Bounds,
        #[serde(default = "default_n_points")]
        n_points: usize,
        #[serde(default)]
        longest_edge_first: bool,
        /// Central curvature of the intended function class; enables the
        /// ripple class check on the run report when present.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        big_m: Option<f64>,
    },
    Zogd {
        steps: usize,
        gamma: StepSchedule,
        tau: StepSchedule,
        x0: Vec<f64>,
    },
}

impl SolverSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Bbs { .. } => "bbs",
            Self::MultiBbs { .. } => "multibbs",
            Self::DirBbs { .. } => "dirbbs",
            Self::Zogd { .. } => "zogd",
        }
    }
}

impl ExperimentConfig {
    /// Parses without compatibility validation, so command-line overrides
    /// (`--force`, `--seed`) can be applied before [`Self::validate`] runs.
    pub fn parse_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let config = Self::parse_json(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Solver/objective compatibility rules.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let dim = self.objective.dim();
        let err = |msg: String| Err(HarnessError::Config(msg));

        if self.repeats == 0 {
            return err("repeats must be at least 1".into());
        }
        if self.repeats > 1 && !matches!(self.solver, SolverSpec::Zogd { .. }) {
            return err("repeats > 1 only applies to the zogd solver".into());
        }

        match &self.solver {
            SolverSpec::Bbs { lo, hi, .. } => {
                if dim != 1 {
                    return err(format!("bbs is one-dimensional; objective has dimension {dim}"));
                }
                if !(lo < hi) {
                    return err(format!("bbs needs lo < hi, got [{lo}, {hi}]"));
                }
                self.reject_stochastic()
            }
            SolverSpec::MultiBbs { bounds, .. } => {
                if bounds.dim() != dim {
                    return err(format!(
                        "bounds dimension {} does not match objective dimension {dim}",
                        bounds.dim()
                    ));
                }
                if dim > 3 && !self.force {
                    return err(format!(
                        "multibbs on dimension {dim} enumerates (n+1)^{dim} grid points per \
                         iteration; pass --force to run it anyway"
                    ));
                }
                self.reject_stochastic()
            }
            SolverSpec::DirBbs { bounds, .. } => {
                if dim < 2 {
                    return err("dirbbs needs dimension >= 2".into());
                }
                if bounds.dim() != dim {
                    return err(format!(
                        "bounds dimension {} does not match objective dimension {dim}",
                        bounds.dim()
                    ));
                }
                self.reject_stochastic()
            }
            SolverSpec::Zogd { x0, .. } => {
                if x0.len() != dim {
                    return err(format!(
                        "x0 dimension {} does not match objective dimension {dim}",
                        x0.len()
                    ));
                }
                match &self.objective {
                    ObjectiveSpec::NoisyQuadratic { .. } | ObjectiveSpec::UserAnalytic { .. } => {
                        Ok(())
                    }
                    _ => err("zogd requires a noisy_quadratic or user_analytic objective".into()),
                }
            }
        }
    }

    fn reject_stochastic(&self) -> Result<(), HarnessError> {
        if self.objective.has_stochastic_noise() {
            return Err(HarnessError::Config(
                "box-shrinking solvers need a deterministic objective (sigma = 0)".into(),
            ));
        }
        Ok(())
    }
}
