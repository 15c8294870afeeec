//! Command-line front end.
//!
//! Subcommands:
//! * `run <config.json>` — execute one experiment document.
//! * `preset <name>` — execute a bundled preset (see `list-presets`).
//! * `verify-class <config.json>` — check a class condition on a grid or
//!   sample and print the violation report.
//! * `list-presets` — show the preset registry.
//!
//! Exit codes: 0 on success, 1 on solver/runtime errors, 2 on
//! configuration errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use parabox_cli::config::ExperimentConfig;
use parabox_cli::experiment::{resolve_out_dir, run_experiment, InvariantCheck};
use parabox_cli::presets::{expand_preset, list_presets, PresetPlan, DEFAULT_SEED};
use parabox_cli::verify::{theorem_suite, verify_class, VerifyClassConfig};
use parabox_cli::HarnessError;

#[derive(Parser)]
#[command(
    name = "parabox",
    about = "Derivative-free global minimization toolkit",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a JSON configuration document.
    Run {
        config: PathBuf,
        /// Output directory (overrides the config and PARABOX_OUT).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the harness seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Allow the exhaustive grid solver above dimension 3.
        #[arg(long)]
        force: bool,
    },
    /// Run a bundled experiment preset.
    Preset {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        force: bool,
    },
    /// Check a function-class condition and print the violation report.
    VerifyClass { config: PathBuf },
    /// List the bundled presets.
    ListPresets,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Run {
            config,
            out,
            seed,
            force,
        } => {
            let text = fs::read_to_string(&config)?;
            let mut experiment = ExperimentConfig::parse_json(&text)?;
            if let Some(seed) = seed {
                experiment.seed = seed;
            }
            experiment.force |= force;
            let name = config
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "run".into());
            let out_dir = resolve_out_dir(out, experiment.output_path.as_deref());
            let outcome = run_experiment(&experiment, &out_dir, &name)?;
            print_summary_line(&outcome.summary.name, &outcome.summary);
            Ok(())
        }
        Command::Preset {
            name,
            out,
            seed,
            force,
        } => match expand_preset(&name, seed, force)? {
            PresetPlan::Experiments(runs) => {
                let out_dir = resolve_out_dir(out, None);
                for run in runs {
                    let outcome = run_experiment(&run.config, &out_dir, &run.name)?;
                    print_summary_line(&run.name, &outcome.summary);
                }
                Ok(())
            }
            PresetPlan::TheoremSuite => {
                let out_dir = resolve_out_dir(out, None);
                fs::create_dir_all(&out_dir)?;
                let checks = theorem_suite(seed.unwrap_or(DEFAULT_SEED));
                for c in &checks {
                    print_check(c);
                }
                let report = serde_json::json!({"schema": 1, "name": "theorem-suite", "checks": checks});
                fs::write(
                    out_dir.join("theorem-suite.json"),
                    serde_json::to_string_pretty(&report)
                        .map_err(|e| HarnessError::Config(e.to_string()))?,
                )?;
                if checks.iter().all(|c| c.passed) {
                    Ok(())
                } else {
                    Err(HarnessError::ChecksFailed)
                }
            }
        },
        Command::VerifyClass { config } => {
            let text = fs::read_to_string(&config)?;
            let config = VerifyClassConfig::from_json(&text)?;
            let report = verify_class(&config)?;
            println!(
                "holds: {} ({} points checked, {} violations, worst margin {:.6e})",
                report.holds,
                report.points_checked,
                report.violations.len(),
                report.worst_margin
            );
            for v in report.violations.iter().take(10) {
                println!(
                    "  violation at {:?}: lower margin {:.6e}, upper margin {:.6e}",
                    v.point, v.lower_margin, v.upper_margin
                );
            }
            if report.violations.len() > 10 {
                println!("  ... and {} more", report.violations.len() - 10);
            }
            Ok(())
        }
        Command::ListPresets => {
            for p in list_presets() {
                println!(
                    "{:14} {:>2} run(s), ~{:>3}s budget  {}",
                    p.name, p.runs, p.budget_seconds, p.description
                );
            }
            Ok(())
        }
    }
}

fn print_summary_line(name: &str, summary: &parabox_cli::RunSummary) {
    let checks_passed = summary.invariant_checks.iter().filter(|c| c.passed).count();
    println!(
        "{name}: final {:?} (value {:.6e}), {} oracle calls, {} iterations, {} ms, checks {}/{}",
        summary.final_point.iter().take(4).collect::<Vec<_>>(),
        summary.final_value,
        summary.total_oracle_calls,
        summary.iterations,
        summary.wall_time_ms,
        checks_passed,
        summary.invariant_checks.len()
    );
    for c in summary.invariant_checks.iter().filter(|c| !c.passed) {
        println!("  [check failed] {}: {}", c.name, c.detail);
    }
}

fn print_check(c: &InvariantCheck) {
    println!(
        "[{}] {}: {}",
        if c.passed { "PASS" } else { "FAIL" },
        c.name,
        c.detail
    );
}
