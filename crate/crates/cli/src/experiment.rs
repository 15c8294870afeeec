//! Experiment execution: run the configured solver, write the CSV trace and
//! JSON summary, and attach post-run invariant checks.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use parabox::oracles::{
    verify_good_class, verify_good_class_sampled, verify_very_good_class,
    verify_very_good_class_sampled, ClassReport, GoodClassParams, VeryGoodClassParams,
};
use parabox::zogd::{zogd_run, ZogdConfig, ZogdTrace};
use parabox::{
    bbs_1d, build_grid, contraction_holds, direction_bbs, multi_bbs, required_iterations,
    BbsConfig, Bounds, DirectionBbsConfig, MultiBbsConfig, OracleHandle, RunTrace,
};

use crate::config::{ExperimentConfig, SolverSpec};
use crate::HarnessError;

/// Result of one post-run invariant check. A failing check is data, not an
/// error: the run still completes and the summary records the failure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub name: String,
    pub passed: bool,
    /// Signed slack where meaningful (negative = violated by that much).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    /// Summary format version.
    pub schema: u32,
    pub name: String,
    pub solver: String,
    pub final_point: Vec<f64>,
    pub final_value: f64,
    pub total_oracle_calls: u64,
    pub iterations: usize,
    pub wall_time_ms: u64,
    pub csv_path: String,
    pub invariant_checks: Vec<InvariantCheck>,
}

impl RunSummary {
    pub fn all_checks_pass(&self) -> bool {
        self.invariant_checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&InvariantCheck> {
        self.invariant_checks.iter().find(|c| c.name == name)
    }
}

/// The raw trace behind a summary, for callers driving the harness as a
/// library.
#[derive(Debug, Clone)]
pub enum TraceData {
    Boxes(RunTrace),
    Descent {
        base: ZogdTrace,
        /// Present for repeated runs with a known minimizer: entry `k` is
        /// the squared distance at step `k` averaged over the replicas.
        mean_distance_sq: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub summary: RunSummary,
    pub trace: TraceData,
}

/// Executes one experiment, writing `<name>.csv` and `<name>.json` under
/// `out_dir`.
pub fn run_experiment(
    config: &ExperimentConfig,
    out_dir: &Path,
    name: &str,
) -> Result<ExperimentOutcome, HarnessError> {
    config.validate()?;
    fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join(format!("{name}.csv"));
    let json_path = out_dir.join(format!("{name}.json"));
    let started = Instant::now();

    let outcome = match &config.solver {
        SolverSpec::Bbs {
            epsilon,
            mu,
            big_l,
            lo,
            hi,
        } => {
            let params = GoodClassParams::new(*mu, *big_l)?;
            let solver_config = BbsConfig::new(*epsilon, params);
            let mut handle = OracleHandle::new(config.objective.clone());
            let trace = bbs_1d(&mut handle, *lo, *hi, &solver_config)?;
            let run_calls = handle.call_count();
            let initial = Bounds::new(vec![*lo], vec![*hi]).expect("validated interval");
            let mut checks = box_checks(
                &trace,
                &initial,
                run_calls,
                2.0,
                2.0 * epsilon,
                BoxCallModel::FixedPerIteration(solver_config.grid_n() as u64 + 1),
                config.objective.known_x_star().as_deref(),
            );
            checks.push(good_class_check(&mut handle, &initial, &params, config));
            finish_boxes(config, trace, checks, &csv_path, started)?
        }
        SolverSpec::MultiBbs {
            epsilon,
            mu,
            big_l,
            alpha,
            bounds,
            max_oracle_calls,
        } => {
            let params = GoodClassParams::new(*mu, *big_l)?;
            let mut solver_config = MultiBbsConfig::new(*epsilon, params, *alpha);
            if let Some(cap) = max_oracle_calls {
                solver_config = solver_config.with_call_cap(*cap);
            }
            let mut handle = OracleHandle::new(config.objective.clone());
            let trace = multi_bbs(&mut handle, bounds, &solver_config)?;
            let run_calls = handle.call_count();
            let mut checks = box_checks(
                &trace,
                bounds,
                run_calls,
                *alpha,
                *epsilon,
                BoxCallModel::Grid(solver_config.grid_n(bounds.dim())),
                config.objective.known_x_star().as_deref(),
            );
            checks.push(good_class_check(&mut handle, bounds, &params, config));
            finish_boxes(config, trace, checks, &csv_path, started)?
        }
        SolverSpec::DirBbs {
            epsilon,
            bounds,
            n_points,
            longest_edge_first,
            big_m,
        } => {
            let mut solver_config = DirectionBbsConfig::new(*epsilon)
                .with_n_points(*n_points)
                .with_longest_edge_first(*longest_edge_first);
            if let Some(m) = big_m {
                solver_config =
                    solver_config.with_class_params(VeryGoodClassParams::new(*m, bounds.dim())?);
            }
            let mut handle = OracleHandle::new(config.objective.clone());
            let trace = direction_bbs(&mut handle, bounds, &solver_config)?;
            let run_calls = handle.call_count();
            let per_iteration = bounds.dim() as u64 * (*n_points as u64 + 1);
            let mut checks = box_checks(
                &trace,
                bounds,
                run_calls,
                1.5,
                2.0 * epsilon,
                BoxCallModel::FixedPerIteration(per_iteration),
                config.objective.known_x_star().as_deref(),
            );
            if let Some(params) = solver_config.class_params {
                checks.push(very_good_class_check(&mut handle, bounds, &params, config));
            }
            finish_boxes(config, trace, checks, &csv_path, started)?
        }
        SolverSpec::Zogd {
            steps,
            gamma,
            tau,
            x0,
        } => run_descent(config, *steps, gamma, tau, x0, &csv_path, started)?,
    };

    let mut outcome = ExperimentOutcome {
        summary: RunSummary {
            schema: 1,
            name: name.to_string(),
            solver: config.solver.kind().to_string(),
            csv_path: csv_path.display().to_string(),
            ..outcome.summary
        },
        trace: outcome.trace,
    };
    outcome.summary.wall_time_ms = started.elapsed().as_millis() as u64;

    let json = File::create(&json_path)?;
    serde_json::to_writer_pretty(BufWriter::new(json), &outcome.summary)
        .map_err(|e| HarnessError::Config(format!("cannot write summary: {e}")))?;
    Ok(outcome)
}

enum BoxCallModel {
    /// Every iteration costs the same number of evaluations.
    FixedPerIteration(u64),
    /// Iteration cost is the point count of the grid over `box_before` at
    /// this resolution.
    Grid(usize),
}

fn box_checks(
    trace: &RunTrace,
    initial: &Bounds,
    handle_calls: u64,
    factor: f64,
    threshold: f64,
    call_model: BoxCallModel,
    x_star: Option<&[f64]>,
) -> Vec<InvariantCheck> {
    let mut checks = Vec::new();

    let nested = trace
        .iterations
        .iter()
        .all(|r| r.box_after.is_subset_of(&r.box_before, 0.0));
    checks.push(InvariantCheck {
        name: "boxes_nested".into(),
        passed: nested,
        margin: None,
        detail: "every shrunken box is contained in its predecessor".into(),
    });

    let mut min_ratio = f64::INFINITY;
    let mut contraction = true;
    for r in &trace.iterations {
        min_ratio = min_ratio.min(r.box_before.max_edge() / r.box_after.max_edge());
        contraction &= contraction_holds(&r.box_before, &r.box_after, factor);
    }
    checks.push(InvariantCheck {
        name: "contraction".into(),
        passed: contraction,
        margin: (!trace.iterations.is_empty()).then_some(min_ratio - factor),
        detail: format!("longest edge shrinks by at least {factor} per iteration"),
    });

    let mut calls_ok = trace.total_calls == handle_calls
        && trace.total_calls == trace.iterations.iter().map(|r| r.oracle_calls).sum::<u64>();
    match call_model {
        BoxCallModel::FixedPerIteration(per) => {
            calls_ok &= trace.iterations.iter().all(|r| r.oracle_calls == per);
        }
        BoxCallModel::Grid(n) => {
            calls_ok &= trace.iterations.iter().all(|r| {
                build_grid(&r.box_before, n)
                    .ok()
                    .and_then(|g| g.num_points())
                    == Some(r.oracle_calls)
            });
        }
    }
    checks.push(InvariantCheck {
        name: "call_accounting".into(),
        passed: calls_ok,
        margin: None,
        detail: format!("{} oracle calls across {} iterations", trace.total_calls, trace.iterations.len()),
    });

    let budget = required_iterations(initial, threshold, factor);
    checks.push(InvariantCheck {
        name: "iteration_budget".into(),
        passed: trace.iterations.len() <= budget,
        margin: Some(budget as f64 - trace.iterations.len() as f64),
        detail: format!("{} iterations against an a-priori bound of {budget}", trace.iterations.len()),
    });

    if let Some(xs) = x_star {
        let mut margin = f64::INFINITY;
        let mut retained = true;
        for r in &trace.iterations {
            for j in 0..r.box_after.dim() {
                margin = margin
                    .min(xs[j] - r.box_after.lower()[j])
                    .min(r.box_after.upper()[j] - xs[j]);
            }
            retained &= r.box_after.contains(xs, 0.0);
        }
        checks.push(InvariantCheck {
            name: "solution_retention".into(),
            passed: retained,
            margin: (margin.is_finite()).then_some(margin),
            detail: "the known minimizer stays inside every shrunken box".into(),
        });
    }

    checks
}

// Exhaustive grids stay tractable through dimension 3; beyond that the
// class check falls back to a seeded uniform sample.
fn class_check_resolution(dim: usize) -> Option<usize> {
    match dim {
        1 => Some(1000),
        2 => Some(200),
        3 => Some(60),
        _ => None,
    }
}

const CLASS_CHECK_SAMPLES: usize = 10_000;

fn class_report_to_check(
    name: &str,
    report: Result<ClassReport, parabox::OracleError>,
    what: &str,
) -> InvariantCheck {
    match report {
        Ok(report) => InvariantCheck {
            name: name.into(),
            passed: report.holds,
            margin: Some(report.worst_margin),
            detail: format!(
                "{what}: {} of {} checked points violate",
                report.violations.len(),
                report.points_checked
            ),
        },
        Err(e) => InvariantCheck {
            name: name.into(),
            passed: false,
            margin: None,
            detail: format!("{what}: check failed to run: {e}"),
        },
    }
}

fn good_class_check(
    handle: &mut OracleHandle,
    bounds: &Bounds,
    params: &GoodClassParams,
    config: &ExperimentConfig,
) -> InvariantCheck {
    let Some(x_star) = config.objective.known_x_star() else {
        return InvariantCheck {
            name: "class_check".into(),
            passed: true,
            margin: None,
            detail: "skipped: minimizer unknown".into(),
        };
    };
    let report = match class_check_resolution(bounds.dim()) {
        Some(n) => verify_good_class(handle, bounds, params, &x_star, n),
        None => verify_good_class_sampled(
            handle,
            bounds,
            params,
            &x_star,
            CLASS_CHECK_SAMPLES,
            config.seed,
        ),
    };
    class_report_to_check(
        "class_check",
        report,
        &format!("parabola sandwich with mu={}, big_l={}", params.mu, params.big_l),
    )
}

fn very_good_class_check(
    handle: &mut OracleHandle,
    bounds: &Bounds,
    params: &VeryGoodClassParams,
    config: &ExperimentConfig,
) -> InvariantCheck {
    let Some(x_star) = config.objective.known_x_star() else {
        return InvariantCheck {
            name: "class_check".into(),
            passed: true,
            margin: None,
            detail: "skipped: minimizer unknown".into(),
        };
    };
    let report = match class_check_resolution(bounds.dim()) {
        Some(n) if bounds.dim() >= 2 => verify_very_good_class(handle, bounds, params, &x_star, n),
        _ => verify_very_good_class_sampled(
            handle,
            bounds,
            params,
            &x_star,
            CLASS_CHECK_SAMPLES,
            config.seed,
        ),
    };
    class_report_to_check(
        "class_check",
        report,
        &format!(
            "quadratic ripple within big_m={} +/- {}",
            params.big_m, params.delta_bound
        ),
    )
}

fn finish_boxes(
    config: &ExperimentConfig,
    trace: RunTrace,
    checks: Vec<InvariantCheck>,
    csv_path: &Path,
    started: Instant,
) -> Result<ExperimentOutcome, HarnessError> {
    let x_star = config.objective.known_x_star();
    let file = File::create(csv_path)?;
    trace.write_csv(BufWriter::new(file), x_star.as_deref())?;

    let mut probe = OracleHandle::new(config.objective.clone());
    let final_value = probe.eval(&trace.final_point)?;

    Ok(ExperimentOutcome {
        summary: RunSummary {
            schema: 1,
            name: String::new(),
            solver: String::new(),
            final_point: trace.final_point.clone(),
            final_value,
            total_oracle_calls: trace.total_calls,
            iterations: trace.iterations.len(),
            wall_time_ms: started.elapsed().as_millis() as u64,
            csv_path: String::new(),
            invariant_checks: checks,
        },
        trace: TraceData::Boxes(trace),
    })
}

struct Replica {
    distances: Option<Vec<f64>>,
    total_calls: u64,
    handle_calls: u64,
    trace: Option<ZogdTrace>,
}

fn run_descent(
    config: &ExperimentConfig,
    steps: usize,
    gamma: &parabox::zogd::StepSchedule,
    tau: &parabox::zogd::StepSchedule,
    x0: &[f64],
    csv_path: &Path,
    started: Instant,
) -> Result<ExperimentOutcome, HarnessError> {
    let x_star = config.objective.known_x_star();
    let objective_seed = config.objective.seed().unwrap_or(0);

    // Replicas are independent descent runs on seeds seed, seed+1, ...;
    // every replica gets its own oracle handle so noise streams never
    // interleave, and collection order is fixed, so results do not depend
    // on scheduling.
    let replicas: Vec<Replica> = (0..config.repeats as u64)
        .into_par_iter()
        .map(|i| -> Result<Replica, HarnessError> {
            let spec = config.objective.with_seed(objective_seed.wrapping_add(i));
            let mut handle = OracleHandle::new(spec);
            let run_config = ZogdConfig {
                steps,
                gamma: gamma.clone(),
                tau: tau.clone(),
                seed: config.seed.wrapping_add(i),
            };
            let trace = zogd_run(&mut handle, x0, &run_config, x_star.as_deref())?;
            Ok(Replica {
                distances: trace.distances_sq.clone(),
                total_calls: trace.total_calls,
                handle_calls: handle.call_count(),
                trace: (i == 0).then_some(trace),
            })
        })
        .collect::<Result<_, _>>()?;

    let base = replicas[0]
        .trace
        .clone()
        .expect("replica 0 keeps its trace");

    let mean_distance_sq = if config.repeats > 1 && replicas.iter().all(|r| r.distances.is_some())
    {
        let mut mean = vec![0.0; steps + 1];
        for r in &replicas {
            for (m, d) in mean.iter_mut().zip(r.distances.as_ref().unwrap()) {
                *m += d;
            }
        }
        let count = config.repeats as f64;
        mean.iter_mut().for_each(|m| *m /= count);
        Some(mean)
    } else {
        None
    };

    write_descent_csv(csv_path, &base, mean_distance_sq.as_deref())?;

    let calls_ok = replicas
        .iter()
        .all(|r| r.total_calls == 2 * steps as u64 && r.handle_calls == r.total_calls);
    let total: u64 = replicas.iter().map(|r| r.total_calls).sum();
    let checks = vec![InvariantCheck {
        name: "call_accounting".into(),
        passed: calls_ok,
        margin: None,
        detail: format!(
            "2 oracle calls per step: {} calls across {} replicas of {} steps",
            total, config.repeats, steps
        ),
    }];

    let mut probe = OracleHandle::new(config.objective.clone());
    let final_value = probe.eval(base.final_point())?;

    Ok(ExperimentOutcome {
        summary: RunSummary {
            schema: 1,
            name: String::new(),
            solver: String::new(),
            final_point: base.final_point().to_vec(),
            final_value,
            total_oracle_calls: total,
            iterations: steps,
            wall_time_ms: started.elapsed().as_millis() as u64,
            csv_path: String::new(),
            invariant_checks: checks,
        },
        trace: TraceData::Descent {
            base,
            mean_distance_sq,
        },
    })
}

fn write_descent_csv(
    path: &Path,
    base: &ZogdTrace,
    mean_distance_sq: Option<&[f64]>,
) -> Result<(), HarnessError> {
    let file = File::create(path)?;
    match mean_distance_sq {
        None => base.write_csv(BufWriter::new(file))?,
        Some(mean) => {
            let mut w = csv::Writer::from_writer(BufWriter::new(file));
            w.write_record([
                "step",
                "distance_sq",
                "grad_norm",
                "cumulative_calls",
                "mean_distance_sq",
            ])?;
            for k in 0..base.points.len() {
                let distance = base
                    .distances_sq
                    .as_ref()
                    .map(|d| d[k].to_string())
                    .unwrap_or_default();
                let grad_norm = if k == 0 {
                    String::new()
                } else {
                    base.steps[k - 1].grad_norm.to_string()
                };
                w.write_record([
                    k.to_string(),
                    distance,
                    grad_norm,
                    (2 * k as u64).to_string(),
                    mean[k].to_string(),
                ])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Path precedence for experiment artifacts: explicit flag, then the config
/// document, then `PARABOX_OUT`, then the current directory.
pub fn resolve_out_dir(flag: Option<PathBuf>, config_path: Option<&str>) -> PathBuf {
    flag.or_else(|| config_path.map(PathBuf::from))
        .or_else(|| std::env::var_os("PARABOX_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}
