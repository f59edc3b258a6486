//! Run configuration: a flat TOML file with one section per sub-config.
//! Unknown keys are rejected with the offending key named; every numeric
//! invariant is enforced on load so commands start from validated types.

use std::path::Path;

use serde::{Deserialize, Serialize};

use folqr::closed_loop::{Fopid, SimConfig};
use folqr::cost_index::CostWeights;
use folqr::ga_tuner::{GaConfig, TuningMode};
use folqr::plant_model::FoPlant;

use crate::CliError;

/// Fully validated configuration for one command invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: TuningMode,
    pub mode_b: Option<TuningMode>,
    pub output_dir: String,
    pub plant: FoPlant,
    pub controller: Option<Fopid>,
    pub controller_b: Option<Fopid>,
    pub sim: SimConfig,
    pub cost: CostWeights,
    /// Evaluate the tuning objective on the disturbance-inclusive run
    /// instead of the default set-point-only run.
    pub objective_includes_disturbance: bool,
    pub ga: GaConfig,
}

impl RunConfig {
    /// Simulation settings the tuning objective is evaluated under.
    pub fn objective_sim(&self) -> SimConfig {
        if self.objective_includes_disturbance {
            self.sim
        } else {
            self.sim.without_disturbance()
        }
    }
}

/// Serializable view of the effective configuration, embedded in every JSON
/// artifact so runs are reproducible from their outputs alone.
#[derive(Debug, Clone, Serialize)]
pub struct EffectiveConfig<'a> {
    pub mode: TuningMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode_b: Option<TuningMode>,
    pub output_dir: &'a str,
    pub plant: &'a FoPlant,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub controller: Option<&'a Fopid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub controller_b: Option<&'a Fopid>,
    pub sim: &'a SimConfig,
    pub cost: &'a CostWeights,
    pub objective_includes_disturbance: bool,
    pub ga: &'a GaConfig,
}

impl RunConfig {
    pub fn effective(&self) -> EffectiveConfig<'_> {
        EffectiveConfig {
            mode: self.mode,
            mode_b: self.mode_b,
            output_dir: &self.output_dir,
            plant: &self.plant,
            controller: self.controller.as_ref(),
            controller_b: self.controller_b.as_ref(),
            sim: &self.sim,
            cost: &self.cost,
            objective_includes_disturbance: self.objective_includes_disturbance,
            ga: &self.ga,
        }
    }
}

// --- raw on-disk schema -----------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mode: Option<String>,
    mode_b: Option<String>,
    output_dir: Option<String>,
    plant: RawPlant,
    controller: Option<RawController>,
    controller_b: Option<RawController>,
    sim: Option<RawSim>,
    cost: Option<RawCost>,
    ga: Option<RawGa>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlant {
    gain: f64,
    tau: f64,
    alpha: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawController {
    kp: f64,
    ki: f64,
    kd: f64,
    lambda: f64,
    mu: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSim {
    step: Option<f64>,
    horizon: Option<f64>,
    setpoint_amplitude: Option<f64>,
    disturbance_magnitude: Option<f64>,
    disturbance_time: Option<f64>,
    divergence_bound: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCost {
    w1: Option<f64>,
    w2: Option<f64>,
    objective_includes_disturbance: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGa {
    population_size: Option<usize>,
    elite_count: Option<usize>,
    crossover_fraction: Option<f64>,
    mutation_fraction: Option<f64>,
    tolerance: Option<f64>,
    stall_generations: Option<usize>,
    max_generations: Option<usize>,
    seed: Option<u64>,
    bounds: Option<Vec<[f64; 2]>>,
}

fn parse_mode(s: &str, key: &str) -> Result<TuningMode, CliError> {
    match s {
        "lqr" => Ok(TuningMode::Lqr),
        "direct" => Ok(TuningMode::Direct),
        other => Err(CliError::Config(format!(
            "{key} must be \"lqr\" or \"direct\", got \"{other}\""
        ))),
    }
}

/// Loads and validates a configuration file.
pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let raw: RawConfig =
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;

    let plant = FoPlant::new(raw.plant.gain, raw.plant.tau, raw.plant.alpha)
        .map_err(|e| CliError::Config(format!("[plant] {e}")))?;

    let build_controller = |c: &RawController, section: &str| {
        Fopid::new(c.kp, c.ki, c.kd, c.lambda, c.mu)
            .map_err(|e| CliError::Config(format!("[{section}] {e}")))
    };
    let controller = raw
        .controller
        .as_ref()
        .map(|c| build_controller(c, "controller"))
        .transpose()?;
    let controller_b = raw
        .controller_b
        .as_ref()
        .map(|c| build_controller(c, "controller_b"))
        .transpose()?;

    let defaults = SimConfig::default();
    let rs = raw.sim.unwrap_or_default();
    let horizon = rs.horizon.unwrap_or(defaults.horizon);
    let sim = SimConfig {
        step: rs.step.unwrap_or(defaults.step),
        horizon,
        setpoint_amplitude: rs.setpoint_amplitude.unwrap_or(defaults.setpoint_amplitude),
        disturbance_magnitude: rs
            .disturbance_magnitude
            .unwrap_or(defaults.disturbance_magnitude),
        // the default onset tracks the configured horizon, not the built-in one
        disturbance_time: rs.disturbance_time.unwrap_or(horizon / 2.0),
        divergence_bound: rs.divergence_bound.unwrap_or(defaults.divergence_bound),
    };
    sim.validate()
        .map_err(|e| CliError::Config(format!("[sim] {e}")))?;

    let rc = raw.cost.unwrap_or_default();
    let cost = CostWeights {
        w1: rc.w1.unwrap_or(1.0),
        w2: rc.w2.unwrap_or(1.0),
    };
    cost.validate()
        .map_err(|e| CliError::Config(format!("[cost] {e}")))?;

    let rg = raw.ga.unwrap_or_default();
    let ga_defaults = GaConfig::default();
    let ga = GaConfig {
        population_size: rg.population_size.unwrap_or(ga_defaults.population_size),
        elite_count: rg.elite_count.unwrap_or(ga_defaults.elite_count),
        crossover_fraction: rg
            .crossover_fraction
            .unwrap_or(ga_defaults.crossover_fraction),
        mutation_fraction: rg
            .mutation_fraction
            .unwrap_or(ga_defaults.mutation_fraction),
        tolerance: rg.tolerance.unwrap_or(ga_defaults.tolerance),
        stall_generations: rg
            .stall_generations
            .unwrap_or(ga_defaults.stall_generations),
        max_generations: rg.max_generations.unwrap_or(ga_defaults.max_generations),
        seed: rg.seed.unwrap_or(ga_defaults.seed),
        bounds: rg
            .bounds
            .map(|b| b.into_iter().map(|[lo, hi]| (lo, hi)).collect()),
    };

    let mode = match raw.mode.as_deref() {
        Some(s) => parse_mode(s, "mode")?,
        None => TuningMode::Lqr,
    };
    let mode_b = raw
        .mode_b
        .as_deref()
        .map(|s| parse_mode(s, "mode_b"))
        .transpose()?;
    // ga bounds (if any) are validated against the mode they will run under
    ga.validate(mode)
        .map_err(|e| CliError::Config(format!("[ga] {e}")))
        .map(|_| ())
        .or_else(|err| {
            // bounds sized for the other mode are fine when only used there
            if mode_b.is_some() && ga.validate(mode_b.unwrap()).is_ok() {
                Ok(())
            } else {
                Err(err)
            }
        })?;

    Ok(RunConfig {
        mode,
        mode_b,
        output_dir: raw.output_dir.unwrap_or_else(|| "out".to_string()),
        plant,
        controller,
        controller_b,
        sim,
        cost,
        objective_includes_disturbance: rc.objective_includes_disturbance.unwrap_or(false),
        ga,
    })
}
