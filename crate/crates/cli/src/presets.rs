//! Bundled experiment presets.
//!
//! Each preset expands to one or more experiment configurations with fixed
//! objectives and solver settings, so the library's reference experiments
//! can be reproduced with a single command. The `theorem-suite` entry is
//! special: it runs the cross-cutting invariant checks (Monte-Carlo sphere
//! identities, descent-rate bounds, retention spot checks) instead of a
//! solver run.

use parabox::zogd::StepSchedule;
use parabox::{Bounds, ObjectiveSpec};

use crate::config::{ExperimentConfig, SolverSpec};
use crate::HarnessError;

pub const DEFAULT_SEED: u64 = 2024;

#[derive(Debug, Clone, Copy)]
pub struct PresetInfo {
    pub name: &'static str,
    pub description: &'static str,
    pub runs: usize,
    /// Soft wall-clock budget on desk hardware, seconds.
    pub budget_seconds: u64,
}

pub const PRESETS: &[PresetInfo] = &[
    PresetInfo {
        name: "fig3a",
        description: "1-D oscillating parabola on [0, 6.5], exhaustive grid solver at \
                      contraction targets alpha = 1.5, 2, 3, 4",
        runs: 4,
        budget_seconds: 1,
    },
    PresetInfo {
        name: "fig3b",
        description: "2-D Levy-style function on [-10, 10]^2, exhaustive grid solver at \
                      alpha = 2",
        runs: 1,
        budget_seconds: 60,
    },
    PresetInfo {
        name: "fig4",
        description: "2-D synthetic bounded-ripple quadratic, coordinate-sweep solver",
        runs: 1,
        budget_seconds: 10,
    },
    PresetInfo {
        name: "fig5a",
        description: "10-D synthetic bounded-ripple quadratic, coordinate-sweep solver",
        runs: 1,
        budget_seconds: 10,
    },
    PresetInfo {
        name: "fig5b",
        description: "100-D synthetic bounded-ripple quadratic, coordinate-sweep solver",
        runs: 1,
        budget_seconds: 10,
    },
    PresetInfo {
        name: "fig7",
        description: "50-D noisy quadratic, zeroth-order gradient descent across noise \
                      levels sigma = 1, 2, 5, 10, 20, 100; 50 seed-averaged replicas each",
        runs: 6,
        budget_seconds: 120,
    },
    PresetInfo {
        name: "theorem-suite",
        description: "runs every cross-cutting invariant check and reports pass/fail",
        runs: 1,
        budget_seconds: 120,
    },
];

pub fn list_presets() -> &'static [PresetInfo] {
    PRESETS
}

#[derive(Debug, Clone)]
pub struct NamedConfig {
    pub name: String,
    pub config: ExperimentConfig,
}

/// What a preset name expands to.
pub enum PresetPlan {
    Experiments(Vec<NamedConfig>),
    TheoremSuite,
}

pub fn expand_preset(
    name: &str,
    seed: Option<u64>,
    force: bool,
) -> Result<PresetPlan, HarnessError> {
    let seed = seed.unwrap_or(DEFAULT_SEED);
    match name {
        "fig3a" => Ok(PresetPlan::Experiments(oscillating_sweep(seed, force))),
        "fig3b" => Ok(PresetPlan::Experiments(vec![levy_run(seed, force)])),
        "fig4" => Ok(PresetPlan::Experiments(vec![synthetic_run(
            "fig4",
            vec![1.43, 3.69],
            1e-5,
            seed,
        )])),
        "fig5a" => Ok(PresetPlan::Experiments(vec![synthetic_run(
            "fig5a",
            vec![1.0; 10],
            1e-4,
            seed,
        )])),
        "fig5b" => Ok(PresetPlan::Experiments(vec![synthetic_run(
            "fig5b",
            vec![1.0; 100],
            1e-4,
            seed,
        )])),
        "fig7" => Ok(PresetPlan::Experiments(noise_sweep(seed))),
        "theorem-suite" => Ok(PresetPlan::TheoremSuite),
        other => Err(HarnessError::Config(format!(
            "unknown preset `{other}`; run `parabox list-presets`"
        ))),
    }
}

fn oscillating_sweep(seed: u64, force: bool) -> Vec<NamedConfig> {
    [1.5, 2.0, 3.0, 4.0]
        .iter()
        .map(|&alpha| NamedConfig {
            name: format!("fig3a_alpha{alpha}"),
            config: ExperimentConfig {
                objective: ObjectiveSpec::OscillatingParabola,
                solver: SolverSpec::MultiBbs {
                    epsilon: 1e-6,
                    mu: 10.0,
                    big_l: 600.0,
                    alpha,
                    bounds: Bounds::new(vec![0.0], vec![6.5]).expect("static bounds"),
                    max_oracle_calls: None,
                },
                output_path: None,
                seed,
                repeats: 1,
                force,
            },
        })
        .collect()
}

fn levy_run(seed: u64, force: bool) -> NamedConfig {
    NamedConfig {
        name: "fig3b".into(),
        config: ExperimentConfig {
            objective: ObjectiveSpec::Levy2D,
            solver: SolverSpec::MultiBbs {
                epsilon: 1e-4,
                mu: 1.0,
                big_l: 150.0,
                alpha: 2.0,
                bounds: Bounds::cube(2, -10.0, 10.0).expect("static bounds"),
                max_oracle_calls: None,
            },
            output_path: None,
            seed,
            repeats: 1,
            force,
        },
    }
}

const RIPPLE_CURVATURE: f64 = 20.0;

fn synthetic_run(name: &str, x_star: Vec<f64>, epsilon: f64, seed: u64) -> NamedConfig {
    let dim = x_star.len();
    let delta_bound = RIPPLE_CURVATURE / (16.0 * (dim as f64 - 1.0));
    NamedConfig {
        name: name.into(),
        config: ExperimentConfig {
            objective: ObjectiveSpec::synthetic_very_good(
                RIPPLE_CURVATURE,
                x_star,
                delta_bound,
                seed,
            )
            .expect("static objective"),
            solver: SolverSpec::DirBbs {
                epsilon,
                bounds: Bounds::cube(dim, -10.0, 10.0).expect("static bounds"),
                n_points: 15,
                longest_edge_first: false,
                big_m: Some(RIPPLE_CURVATURE),
            },
            output_path: None,
            seed,
            repeats: 1,
            force: false,
        },
    }
}

/// Reference noisy-quadratic run: d = 50, spectrum log-spaced on [1, 100].
pub fn reference_quadratic_matrix(dim: usize, lambda_min: f64, lambda_max: f64) -> Vec<Vec<f64>> {
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| {
                    if i == j {
                        lambda_min
                            * (lambda_max / lambda_min).powf(i as f64 / (dim as f64 - 1.0))
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

pub const NOISE_LEVELS: [f64; 6] = [1.0, 2.0, 5.0, 10.0, 20.0, 100.0];

fn noise_sweep(seed: u64) -> Vec<NamedConfig> {
    let dim = 50;
    let big_l = 100.0;
    let mu = 1.0;
    let steps = 50_000;
    let gamma = 1.0 / (dim as f64 * big_l);
    // start at squared distance 1e4, spread evenly over the coordinates
    let x0 = vec![(1e4 / dim as f64).sqrt(); dim];

    NOISE_LEVELS
        .iter()
        .map(|&sigma| {
            let tau = (2.0 * dim as f64 * sigma * sigma / (mu * big_l)).sqrt();
            NamedConfig {
                name: format!("fig7_sigma{sigma}"),
                config: ExperimentConfig {
                    objective: ObjectiveSpec::noisy_quadratic(
                        reference_quadratic_matrix(dim, mu, big_l),
                        vec![0.0; dim],
                        sigma,
                        0.0,
                        seed,
                    )
                    .expect("static objective"),
                    solver: SolverSpec::Zogd {
                        steps,
                        gamma: StepSchedule::Constant(gamma),
                        tau: StepSchedule::Constant(tau),
                        x0: x0.clone(),
                    },
                    output_path: None,
                    seed,
                    repeats: 50,
                    force: false,
                },
            }
        })
        .collect()
}
