//! Class verification command and the cross-cutting invariant suite.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use parabox::oracles::{
    verify_good_class, verify_good_class_sampled, verify_very_good_class,
    verify_very_good_class_sampled, ClassReport, GoodClassParams, VeryGoodClassParams,
};
use parabox::zogd::{
    grad_estimate, one_step_bound, recommended_schedule, sample_sphere, zogd_run, RateParams,
    ZogdConfig,
};
use parabox::{
    contraction_holds, direction_bbs, multi_bbs, Bounds, DirectionBbsConfig, MultiBbsConfig,
    ObjectiveSpec, OracleHandle,
};

use crate::experiment::InvariantCheck;
use crate::presets::reference_quadratic_matrix;
use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassKind {
    Good,
    VeryGood,
}

/// Configuration document for `parabox verify-class`.
///
/// ```json
/// {
///   "objective": {"variant": "oscillating_parabola"},
///   "class": "good",
///   "bounds": {"lower": [0.0], "upper": [6.5]},
///   "mu": 10.0, "big_l": 600.0,
///   "grid_n": 1000
/// }
/// ```
///
/// For `"class": "very_good"` supply `big_m` instead of `mu`/`big_l`.
/// `x_star` defaults to the objective's known minimizer. Setting
/// `samples` switches to the seeded uniform-sample check (the default for
/// dimensions above 3, where grids are intractable).
#[derive(Debug, Deserialize)]
pub struct VerifyClassConfig {
    pub objective: ObjectiveSpec,
    pub class: ClassKind,
    pub bounds: Bounds,
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default)]
    pub big_l: Option<f64>,
    #[serde(default)]
    pub big_m: Option<f64>,
    #[serde(default)]
    pub x_star: Option<Vec<f64>>,
    #[serde(default)]
    pub grid_n: Option<usize>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl VerifyClassConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }
}

fn default_grid_n(dim: usize) -> Option<usize> {
    match dim {
        1 => Some(1000),
        2 => Some(200),
        3 => Some(60),
        _ => None,
    }
}

pub fn verify_class(config: &VerifyClassConfig) -> Result<ClassReport, HarnessError> {
    let dim = config.objective.dim();
    let x_star = match &config.x_star {
        Some(xs) => xs.clone(),
        None => config.objective.known_x_star().ok_or_else(|| {
            HarnessError::Config("objective has no known minimizer; supply x_star".into())
        })?,
    };
    let mut handle = OracleHandle::new(config.objective.clone());

    let grid_n = config.grid_n.or_else(|| default_grid_n(dim));
    let report = match config.class {
        ClassKind::Good => {
            let (mu, big_l) = match (config.mu, config.big_l) {
                (Some(mu), Some(big_l)) => (mu, big_l),
                _ => {
                    return Err(HarnessError::Config(
                        "good-class verification needs both mu and big_l".into(),
                    ))
                }
            };
            let params = GoodClassParams::new(mu, big_l)?;
            match (config.samples, grid_n) {
                (Some(samples), _) => verify_good_class_sampled(
                    &mut handle,
                    &config.bounds,
                    &params,
                    &x_star,
                    samples,
                    config.seed,
                )?,
                (None, Some(n)) => {
                    verify_good_class(&mut handle, &config.bounds, &params, &x_star, n)?
                }
                (None, None) => verify_good_class_sampled(
                    &mut handle,
                    &config.bounds,
                    &params,
                    &x_star,
                    10_000,
                    config.seed,
                )?,
            }
        }
        ClassKind::VeryGood => {
            let big_m = config.big_m.ok_or_else(|| {
                HarnessError::Config("very-good-class verification needs big_m".into())
            })?;
            let params = VeryGoodClassParams::new(big_m, dim)?;
            match (config.samples, grid_n) {
                (Some(samples), _) => verify_very_good_class_sampled(
                    &mut handle,
                    &config.bounds,
                    &params,
                    &x_star,
                    samples,
                    config.seed,
                )?,
                (None, Some(n)) => {
                    verify_very_good_class(&mut handle, &config.bounds, &params, &x_star, n)?
                }
                (None, None) => verify_very_good_class_sampled(
                    &mut handle,
                    &config.bounds,
                    &params,
                    &x_star,
                    10_000,
                    config.seed,
                )?,
            }
        }
    };
    Ok(report)
}

fn check(name: &str, passed: bool, margin: Option<f64>, detail: String) -> InvariantCheck {
    InvariantCheck {
        name: name.into(),
        passed,
        margin,
        detail,
    }
}

/// Runs every cross-cutting invariant check at reduced (seconds-scale)
/// sample sizes. The acceptance test suite runs the same checks at the full
/// sample sizes.
pub fn theorem_suite(seed: u64) -> Vec<InvariantCheck> {
    let mut checks = Vec::new();
    checks.push(sphere_mean_identity(seed, 200_000));
    checks.push(sphere_second_moment(seed ^ 1, 1_000_000));
    checks.push(estimator_unbiasedness(seed ^ 2, 100_000));
    checks.push(one_step_bound_dominates(seed ^ 3, 10_000));
    checks.push(noiseless_descent_contraction(seed ^ 4, 100));
    checks.push(schedule_formulas());
    checks.extend(retention_spot_checks(seed ^ 5));
    checks
}

/// `E[d <s, e> e] = s`, componentwise within 5 standard errors.
pub fn sphere_mean_identity(seed: u64, draws: usize) -> InvariantCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for dim in [2usize, 10, 50] {
        let s: Vec<f64> = (0..dim).map(|i| ((i % 7) as f64) - 3.0 + 0.5).collect();
        let mut sum = vec![0.0; dim];
        let mut sum_sq = vec![0.0; dim];
        for _ in 0..draws {
            let e = sample_sphere(dim, &mut rng);
            let dot: f64 = s.iter().zip(&e).map(|(a, b)| a * b).sum();
            for j in 0..dim {
                let v = dim as f64 * dot * e[j];
                sum[j] += v;
                sum_sq[j] += v * v;
            }
        }
        for j in 0..dim {
            let mean = sum[j] / draws as f64;
            let var = (sum_sq[j] / draws as f64 - mean * mean).max(0.0);
            let se = (var / draws as f64).sqrt().max(1e-300);
            worst = worst.max((mean - s[j]).abs() / se);
        }
    }
    check(
        "sphere_mean_identity",
        worst <= 5.0,
        Some(5.0 - worst),
        format!("worst deviation {worst:.2} standard errors across d in {{2, 10, 50}}"),
    )
}

/// `E[<s, e>^2] = |s|^2 / d`, within 1% relative.
pub fn sphere_second_moment(seed: u64, draws: usize) -> InvariantCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for dim in [2usize, 10, 50] {
        let s: Vec<f64> = (0..dim).map(|i| 1.0 + (i as f64) * 0.3).collect();
        let s_norm_sq: f64 = s.iter().map(|v| v * v).sum();
        let mut sum = 0.0;
        for _ in 0..draws {
            let e = sample_sphere(dim, &mut rng);
            let dot: f64 = s.iter().zip(&e).map(|(a, b)| a * b).sum();
            sum += dot * dot;
        }
        let ratio = sum / draws as f64 * dim as f64 / s_norm_sq;
        worst = worst.max((ratio - 1.0).abs());
    }
    check(
        "sphere_second_moment",
        worst <= 0.01,
        Some(0.01 - worst),
        format!("worst relative deviation {worst:.4} across d in {{2, 10, 50}}"),
    )
}

/// With zero ripple the estimator's mean is the true gradient `A (x - x*)`.
pub fn estimator_unbiasedness(seed: u64, draws: usize) -> InvariantCheck {
    let dim = 10;
    let spec = ObjectiveSpec::noisy_quadratic(
        reference_quadratic_matrix(dim, 1.0, 100.0),
        vec![0.0; dim],
        1.0,
        0.0,
        seed,
    )
    .expect("static objective");
    let mut handle = OracleHandle::new(spec);
    let a = reference_quadratic_matrix(dim, 1.0, 100.0);
    let x: Vec<f64> = (0..dim).map(|i| (i as f64 * 0.7).sin() * 3.0).collect();
    let expected: Vec<f64> = (0..dim).map(|i| a[i][i] * x[i]).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xFACE);
    let mut sum = vec![0.0; dim];
    let mut sum_sq = vec![0.0; dim];
    for _ in 0..draws {
        let g = grad_estimate(&mut handle, &x, 1.0, &mut rng).expect("estimate");
        for j in 0..dim {
            sum[j] += g[j];
            sum_sq[j] += g[j] * g[j];
        }
    }
    let mut worst: f64 = 0.0;
    for j in 0..dim {
        let mean = sum[j] / draws as f64;
        let var = (sum_sq[j] / draws as f64 - mean * mean).max(0.0);
        let se = (var / draws as f64).sqrt().max(1e-300);
        worst = worst.max((mean - expected[j]).abs() / se);
    }
    check(
        "estimator_unbiasedness",
        worst <= 5.0,
        Some(5.0 - worst),
        format!("worst deviation {worst:.2} standard errors over {draws} draws"),
    )
}

/// Empirical one-step `E |x' - x*|^2` stays below `1.05 *` the bound, at
/// distances 0.1, 1, 10 on the reference 50-D configuration.
pub fn one_step_bound_dominates(seed: u64, trials: usize) -> InvariantCheck {
    let dim = 50;
    let (mu, big_l, sigma) = (1.0, 100.0, 1.0);
    let gamma = 1.0 / (5.0 * dim as f64 * big_l);
    let tau = (2.0 * dim as f64 * sigma * sigma / (mu * big_l)).sqrt();
    let params = RateParams::new(dim, mu, big_l, sigma, 0.0, gamma, tau).expect("valid params");

    let mut worst_ratio: f64 = 0.0;
    for &dist in &[0.1, 1.0, 10.0] {
        let x: Vec<f64> = vec![dist / (dim as f64).sqrt(); dim];
        let bound = one_step_bound(dist * dist, dist, &params);

        let spec = ObjectiveSpec::noisy_quadratic(
            reference_quadratic_matrix(dim, mu, big_l),
            vec![0.0; dim],
            sigma,
            0.0,
            seed,
        )
        .expect("static objective");
        let mut handle = OracleHandle::new(spec);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xBEEF);
        let mut total = 0.0;
        for _ in 0..trials {
            let g = grad_estimate(&mut handle, &x, tau, &mut rng).expect("estimate");
            let next_sq: f64 = x
                .iter()
                .zip(&g)
                .map(|(xi, gi)| {
                    let v = xi - gamma * gi;
                    v * v
                })
                .sum();
            total += next_sq;
        }
        let mean = total / trials as f64;
        worst_ratio = worst_ratio.max(mean / bound);
    }
    check(
        "one_step_bound",
        worst_ratio <= 1.05,
        Some(1.05 - worst_ratio),
        format!("worst empirical/bound ratio {worst_ratio:.4} at distances 0.1, 1, 10"),
    )
}

/// With sigma = 0 and gamma = 1/(5 d L), seed-averaged squared distance
/// after K steps stays below `(1 - gamma mu / 2)^K * dist0^2`.
pub fn noiseless_descent_contraction(seed: u64, seeds: u64) -> InvariantCheck {
    let dim = 2;
    let steps = 200;
    let gamma = 1.0 / (5.0 * dim as f64);
    let spec_base = ObjectiveSpec::noisy_quadratic(
        reference_quadratic_matrix(dim, 1.0, 1.0),
        vec![0.0; dim],
        0.0,
        0.0,
        0,
    )
    .expect("static objective");

    let mut total = 0.0;
    for i in 0..seeds {
        let mut handle = OracleHandle::new(spec_base.with_seed(i));
        let config = ZogdConfig::new(steps, gamma, 1e-3, seed.wrapping_add(i));
        let trace = zogd_run(&mut handle, &[10.0, 0.0], &config, Some(&[0.0, 0.0]))
            .expect("descent run");
        total += trace.distances_sq.as_ref().expect("known minimizer")[steps];
    }
    let mean = total / seeds as f64;
    let bound = (1.0 - gamma / 2.0).powi(steps as i32) * 100.0;
    check(
        "noiseless_descent_contraction",
        mean <= bound,
        Some(bound - mean),
        format!("mean final squared distance {mean:.3e} against bound {bound:.3e}"),
    )
}

/// Closed-form spot checks of the schedule and bound evaluators.
pub fn schedule_formulas() -> InvariantCheck {
    let (_, tau) = recommended_schedule(50, 100.0, 1.0, 1.0, 1000, 1.0);
    let (gamma0, tau0) = recommended_schedule(2, 1.0, 1.0, 0.0, 100, 1.0);
    let p = RateParams::new(50, 1.0, 100.0, 1.0, 0.0, 2e-4, 1.0).expect("valid params");
    let bound = one_step_bound(100.0, 10.0, &p);
    let expected = (1.0 - 2e-4 + 5.0 * 2500.0 * 4e-8) * 100.0 + 5.0 * 2500.0 * 4e-8;
    let ok = tau == 1.0
        && gamma0 == 0.1
        && tau0 == 1e-3
        && (bound - expected).abs() <= 1e-9 * expected;
    check(
        "schedule_formulas",
        ok,
        None,
        "closed-form schedule and one-step bound values".into(),
    )
}

/// Small randomized retention runs: in-class instances must keep the true
/// minimizer inside every shrunken box.
pub fn retention_spot_checks(seed: u64) -> Vec<InvariantCheck> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut retained_all = true;
    let mut contracted_all = true;
    let mut detail = String::new();

    // three bounded-ripple instances through the exhaustive grid solver
    for i in 0..3 {
        let dim = 1 + (i % 2);
        let x_star: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * 8.0 - 4.0).collect();
        let curvature = 1.0 + rng.random::<f64>() * 10.0;
        let ripple = 0.1 + rng.random::<f64>() * 0.4;
        let omega = 1.0 + rng.random::<f64>() * 4.0;
        let (mu, big_l) = (curvature * (1.0 - ripple), curvature * (1.0 + ripple));
        let xs = x_star.clone();
        let spec = ObjectiveSpec::user_analytic(
            dim,
            move |x: &[f64]| {
                let r2: f64 = x.iter().zip(&xs).map(|(a, b)| (a - b) * (a - b)).sum();
                let phase: f64 = x.iter().sum();
                0.5 * curvature * (1.0 + ripple * (omega * phase).sin()) * r2
            },
            Some(x_star.clone()),
        )
        .expect("analytic spec");
        let mut handle = OracleHandle::new(spec);
        let bounds = Bounds::cube(dim, -6.0, 6.0).expect("static bounds");
        let config = MultiBbsConfig::new(
            1e-5,
            GoodClassParams::new(mu, big_l).expect("valid params"),
            2.0,
        );
        let trace = multi_bbs(&mut handle, &bounds, &config).expect("solver run");
        for rec in &trace.iterations {
            retained_all &= rec.box_after.contains(&x_star, 0.0);
            contracted_all &= contraction_holds(&rec.box_before, &rec.box_after, 2.0);
        }
    }

    // three synthetic bounded-ripple instances through the coordinate solver
    for i in 0..3 {
        let dim = 2 + 2 * i;
        let x_star: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * 16.0 - 8.0).collect();
        let big_m = 1.0 + rng.random::<f64>() * 30.0;
        let delta = big_m / (16.0 * (dim as f64 - 1.0));
        let spec = ObjectiveSpec::synthetic_very_good(big_m, x_star.clone(), delta, seed + i as u64)
            .expect("synthetic spec");
        let mut handle = OracleHandle::new(spec);
        let bounds = Bounds::cube(dim, -10.0, 10.0).expect("static bounds");
        let trace = direction_bbs(&mut handle, &bounds, &DirectionBbsConfig::new(1e-4))
            .expect("solver run");
        for rec in &trace.iterations {
            retained_all &= rec.box_after.contains(&x_star, 0.0);
            contracted_all &= contraction_holds(&rec.box_before, &rec.box_after, 1.5);
        }
    }

    detail.push_str("6 randomized in-class instances");
    vec![
        check("solution_retention", retained_all, None, detail),
        check(
            "contraction",
            contracted_all,
            None,
            "guaranteed contraction factors on the same instances".into(),
        ),
    ]
}
