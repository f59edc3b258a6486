//! Implementations of the four subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use folqr::closed_loop::{
    early_control_effort, peak_deviation_after, simulate, state_trajectories, Fopid, SimResult,
};
use folqr::cost_index::{objective_breakdown, DEFAULT_PENALTY};
use folqr::ga_tuner::{tune_direct_mode, tune_lqr_mode, GaConfig, TuningMode, TuningResult};
use folqr::validate;

use crate::config::RunConfig;
use crate::svg::{line_chart, Series};
use crate::CliError;

/// Window over which the early control effort metric is integrated.
const EARLY_EFFORT_WINDOW: f64 = 1.0;

fn runtime<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn json_string<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::Runtime(format!("json serialization failed: {e}")))
}

fn nan_to_none(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Simulation artifacts (CSV + plots) for one controller run.
fn emit_run_artifacts(
    dir: &Path,
    prefix: &str,
    run: &SimResult,
    controller: &Fopid,
    plots: bool,
) -> Result<(), CliError> {
    write_artifact(dir, &format!("{prefix}response.csv"), &run.to_csv())?;
    if !run.diverged {
        let states =
            state_trajectories(run, controller.lambda(), controller.mu()).map_err(runtime)?;
        write_artifact(
            dir,
            &format!("{prefix}states.csv"),
            &run.to_csv_with_states(&states),
        )?;
        if plots {
            let chart = line_chart(
                "closed-loop response",
                "t [s]",
                "signal",
                &[
                    Series {
                        label: "r",
                        x: &run.t,
                        y: &run.r,
                    },
                    Series {
                        label: "y",
                        x: &run.t,
                        y: &run.y,
                    },
                    Series {
                        label: "u",
                        x: &run.t,
                        y: &run.u,
                    },
                ],
            );
            write_artifact(dir, &format!("{prefix}response.svg"), &chart)?;
            let chart = line_chart(
                "error differ-integral state trajectories",
                "t [s]",
                "state",
                &[
                    Series {
                        label: "x1",
                        x: &run.t,
                        y: &states.x1,
                    },
                    Series {
                        label: "x2",
                        x: &run.t,
                        y: &states.x2,
                    },
                    Series {
                        label: "x3",
                        x: &run.t,
                        y: &states.x3,
                    },
                ],
            );
            write_artifact(dir, &format!("{prefix}states.svg"), &chart)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct RunMetrics {
    diverged: bool,
    itae: Option<f64>,
    isco: Option<f64>,
    objective: f64,
    objective_run: &'static str,
    early_control_effort_1s: Option<f64>,
    peak_post_disturbance_deviation: Option<f64>,
}

fn compute_metrics(
    config: &RunConfig,
    controller: &Fopid,
) -> Result<(SimResult, RunMetrics), CliError> {
    let full = simulate(&config.plant, controller, &config.sim).map_err(runtime)?;
    let breakdown = objective_breakdown(&full, &config.cost, DEFAULT_PENALTY).map_err(runtime)?;

    // the objective may be defined over the set-point-only run
    let objective_sim = config.objective_sim();
    let (objective, objective_run) = if objective_sim == config.sim {
        (breakdown.total, "with_disturbance")
    } else {
        let run = simulate(&config.plant, controller, &objective_sim).map_err(runtime)?;
        let b = objective_breakdown(&run, &config.cost, DEFAULT_PENALTY).map_err(runtime)?;
        (b.total, "setpoint_only")
    };

    let window = EARLY_EFFORT_WINDOW.min(config.sim.horizon);
    let effort = early_control_effort(&full, window).ok();
    let peak = (!full.diverged && config.sim.disturbance_magnitude != 0.0)
        .then(|| peak_deviation_after(&full, config.sim.disturbance_time));
    let metrics = RunMetrics {
        diverged: full.diverged,
        itae: nan_to_none(breakdown.itae),
        isco: nan_to_none(breakdown.isco),
        objective,
        objective_run,
        early_control_effort_1s: effort,
        peak_post_disturbance_deviation: peak,
    };
    Ok((full, metrics))
}

// --- tune --------------------------------------------------------------------

#[derive(Serialize)]
struct TuneDocument<'a> {
    config: crate::config::EffectiveConfig<'a>,
    seeds_swept: Vec<u64>,
    winning_seed: u64,
    variables: &'static [&'static str],
    result: &'a TuningResult,
}

fn run_tuning(
    config: &RunConfig,
    mode: TuningMode,
    ga: &GaConfig,
) -> Result<TuningResult, CliError> {
    let sim = config.objective_sim();
    match mode {
        TuningMode::Lqr => tune_lqr_mode(&config.plant, &sim, &config.cost, ga),
        TuningMode::Direct => tune_direct_mode(&config.plant, &sim, &config.cost, ga),
    }
    .map_err(runtime)
}

pub fn cmd_tune(
    config: &RunConfig,
    seed_override: Option<u64>,
    seeds: u32,
    output_override: Option<PathBuf>,
    plots: bool,
) -> Result<(), CliError> {
    if seeds == 0 {
        return Err(CliError::Config("--seeds must be at least 1".into()));
    }
    let out_dir = output_override.unwrap_or_else(|| PathBuf::from(&config.output_dir));
    let base_seed = seed_override.unwrap_or(config.ga.seed);

    let mut swept = Vec::new();
    let mut best: Option<(u64, TuningResult)> = None;
    for offset in 0..seeds as u64 {
        let seed = base_seed + offset;
        swept.push(seed);
        let ga = GaConfig {
            seed,
            ..config.ga.clone()
        };
        let result = run_tuning(config, config.mode, &ga)?;
        println!(
            "seed {seed}: objective {:.6} after {} generations ({} evaluations)",
            result.best_objective, result.generations_run, result.evaluations
        );
        let better = match &best {
            None => true,
            Some((_, current)) => result.best_objective < current.best_objective,
        };
        if better {
            best = Some((seed, result));
        }
    }
    let (winning_seed, result) = best.expect("at least one seed was run");

    // embed the winning seed so the recorded config replays the winner
    let mut effective = config.clone();
    effective.ga.seed = winning_seed;
    let doc = TuneDocument {
        config: effective.effective(),
        seeds_swept: swept,
        winning_seed,
        variables: config.mode.variable_names(),
        result: &result,
    };
    write_artifact(&out_dir, "result.json", &json_string(&doc)?)?;

    // artifact run uses the full configured simulation (with disturbance)
    let run = simulate(&config.plant, &result.controller, &config.sim).map_err(runtime)?;
    emit_run_artifacts(&out_dir, "", &run, &result.controller, plots)?;

    println!(
        "best objective {:.6} (seed {winning_seed}); artifacts in {}",
        result.best_objective,
        out_dir.display()
    );
    Ok(())
}

// --- simulate ------------------------------------------------------------------

#[derive(Serialize)]
struct MetricsDocument<'a> {
    config: crate::config::EffectiveConfig<'a>,
    metrics: RunMetrics,
}

pub fn cmd_simulate(
    config: &RunConfig,
    output_override: Option<PathBuf>,
    plots: bool,
) -> Result<(), CliError> {
    let controller = config.controller.as_ref().ok_or_else(|| {
        CliError::Config("simulate requires a [controller] section in the config".into())
    })?;
    let out_dir = output_override.unwrap_or_else(|| PathBuf::from(&config.output_dir));
    let (run, metrics) = compute_metrics(config, controller)?;
    let doc = MetricsDocument {
        config: config.effective(),
        metrics,
    };
    write_artifact(&out_dir, "metrics.json", &json_string(&doc)?)?;
    emit_run_artifacts(&out_dir, "", &run, controller, plots)?;
    println!(
        "simulated {} samples{}; artifacts in {}",
        run.len(),
        if run.diverged { " (diverged)" } else { "" },
        out_dir.display()
    );
    Ok(())
}

// --- validate ------------------------------------------------------------------

pub fn cmd_validate() -> Result<(), CliError> {
    let report = validate::run().map_err(runtime)?;
    println!(
        "{:<62} {:>12} {:>12} {:>6}",
        "check", "measured", "allowed", "state"
    );
    for check in &report.checks {
        println!(
            "{:<62} {:>12.3e} {:>12.3e} {:>6}",
            check.name,
            check.measured,
            check.allowed,
            if check.passed { "pass" } else { "FAIL" }
        );
    }
    if report.all_passed() {
        println!("validation: all {} checks passed", report.checks.len());
        Ok(())
    } else {
        Err(CliError::ValidationFailed)
    }
}

// --- compare -------------------------------------------------------------------

#[derive(Serialize)]
struct CompareSide {
    source: String,
    controller: Fopid,
    #[serde(flatten)]
    metrics: RunMetrics,
}

#[derive(Serialize)]
struct CompareDocument<'a> {
    config: crate::config::EffectiveConfig<'a>,
    a: CompareSide,
    b: CompareSide,
}

/// Resolves one comparison side: an explicit controller if present in the
/// config, otherwise a tuning run in the side's mode.
fn resolve_side(
    config: &RunConfig,
    controller: Option<&Fopid>,
    mode: Option<TuningMode>,
    seed_override: Option<u64>,
    which: &str,
) -> Result<(String, Fopid), CliError> {
    if let Some(c) = controller {
        return Ok((format!("controller ({which})"), *c));
    }
    match mode {
        Some(m) => {
            let ga = GaConfig {
                seed: seed_override.unwrap_or(config.ga.seed),
                ..config.ga.clone()
            };
            let result = run_tuning(config, m, &ga)?;
            Ok((
                format!("tuned:{m:?} seed {}", ga.seed).to_lowercase(),
                result.controller,
            ))
        }
        None => Err(CliError::Config(format!(
            "compare needs either a [{which}] section or a mode for that side"
        ))),
    }
}

pub fn cmd_compare(
    config: &RunConfig,
    seed_override: Option<u64>,
    output_override: Option<PathBuf>,
    plots: bool,
) -> Result<(), CliError> {
    let out_dir = output_override.unwrap_or_else(|| PathBuf::from(&config.output_dir));
    let (source_a, ctrl_a) = resolve_side(
        config,
        config.controller.as_ref(),
        Some(config.mode),
        seed_override,
        "controller",
    )?;
    let (source_b, ctrl_b) = resolve_side(
        config,
        config.controller_b.as_ref(),
        config.mode_b,
        seed_override,
        "controller_b",
    )?;

    let (run_a, metrics_a) = compute_metrics(config, &ctrl_a)?;
    let (run_b, metrics_b) = compute_metrics(config, &ctrl_b)?;

    // side-by-side table
    println!("{:<36} {:>14} {:>14}", "metric", "a", "b");
    let rows: Vec<(&str, Option<f64>, Option<f64>)> = vec![
        ("itae", metrics_a.itae, metrics_b.itae),
        ("isco", metrics_a.isco, metrics_b.isco),
        (
            "objective",
            Some(metrics_a.objective),
            Some(metrics_b.objective),
        ),
        (
            "early control effort (1 s)",
            metrics_a.early_control_effort_1s,
            metrics_b.early_control_effort_1s,
        ),
        (
            "peak post-disturbance deviation",
            metrics_a.peak_post_disturbance_deviation,
            metrics_b.peak_post_disturbance_deviation,
        ),
    ];
    let fmt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.6}"));
    for (name, a, b) in rows {
        println!("{name:<36} {:>14} {:>14}", fmt(a), fmt(b));
    }

    let doc = CompareDocument {
        config: config.effective(),
        a: CompareSide {
            source: source_a,
            controller: ctrl_a,
            metrics: metrics_a,
        },
        b: CompareSide {
            source: source_b,
            controller: ctrl_b,
            metrics: metrics_b,
        },
    };
    write_artifact(&out_dir, "comparison.json", &json_string(&doc)?)?;

    // combined CSV over the samples both runs produced
    let n = run_a.len().min(run_b.len());
    let mut csv = String::from("t,r,y_a,u_a,e_a,y_b,u_b,e_b\n");
    for k in 0..n {
        csv.push_str(&format!(
            "{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e}\n",
            run_a.t[k],
            run_a.r[k],
            run_a.y[k],
            run_a.u[k],
            run_a.e[k],
            run_b.y[k],
            run_b.u[k],
            run_b.e[k]
        ));
    }
    write_artifact(&out_dir, "comparison.csv", &csv)?;

    if plots && !run_a.diverged && !run_b.diverged {
        let chart = line_chart(
            "closed-loop comparison",
            "t [s]",
            "signal",
            &[
                Series {
                    label: "y (a)",
                    x: &run_a.t,
                    y: &run_a.y,
                },
                Series {
                    label: "y (b)",
                    x: &run_b.t,
                    y: &run_b.y,
                },
                Series {
                    label: "u (a)",
                    x: &run_a.t,
                    y: &run_a.u,
                },
                Series {
                    label: "u (b)",
                    x: &run_b.t,
                    y: &run_b.u,
                },
            ],
        );
        write_artifact(&out_dir, "comparison.svg", &chart)?;
    }
    println!("artifacts in {}", out_dir.display());
    Ok(())
}
