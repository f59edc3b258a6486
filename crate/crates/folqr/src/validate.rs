//! Self-contained validation suite over the built-in fixtures: Riccati
//! certificates, solver agreement, gain extraction, the plant simulator
//! against the Mittag-Leffler oracle, and the integer-order reduction against
//! a Runge-Kutta reference. Needs no network or external files.

use serde::Serialize;

use crate::closed_loop::{simulate, Fopid, SimConfig};
use crate::error::Result;
use crate::fixtures;
use crate::frac_num::mittag_leffler;
use crate::lqr_care::{care_residual, extract_fopid_gains, solve_care, RiccatiSolution};
use crate::plant_model::{build_state_space, open_loop_step, FoPlant};

/// One validation check: name, measured deviation, allowed deviation.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub allowed: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, measured: f64, allowed: f64) -> Check {
        Check {
            name: name.into(),
            measured,
            allowed,
            passed: measured.is_finite() && measured <= allowed,
        }
    }
}

/// Full validation report.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Runs every fixture-anchored check and returns the report.
pub fn run() -> Result<Report> {
    let mut checks = Vec::new();

    for case in fixtures::all() {
        let lambda = case.lqr_controller.lambda();
        let mu = case.lqr_controller.mu();
        let model = build_state_space(&case.plant, lambda, mu)?;

        // reference P satisfies the Riccati equation
        let residual = care_residual(&model, &case.weights, &case.riccati);
        checks.push(Check::new(
            format!("{}: reference riccati residual", case.name),
            residual,
            1e-3,
        ));

        // solver agrees with the reference elementwise
        let solved = solve_care(&model, &case.weights)?;
        let mut max_diff = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                max_diff = max_diff.max((solved.p[i][j] - case.riccati[i][j]).abs());
            }
        }
        checks.push(Check::new(
            format!("{}: solver vs reference P", case.name),
            max_diff,
            5e-4,
        ));

        // gain extraction from the reference P reproduces the reference controller
        let reference = RiccatiSolution { p: case.riccati };
        let gains = extract_fopid_gains(&reference, &case.plant, &case.weights, lambda, mu)?;
        let gain_diff = (gains.kp() - case.lqr_controller.kp())
            .abs()
            .max((gains.ki() - case.lqr_controller.ki()).abs())
            .max((gains.kd() - case.lqr_controller.kd()).abs());
        checks.push(Check::new(
            format!("{}: gain extraction", case.name),
            gain_diff,
            1e-3,
        ));
    }

    // GL plant simulator against the Mittag-Leffler step response
    let osc = fixtures::oscillatory();
    checks.push(Check::new(
        "oscillatory: GL step vs Mittag-Leffler oracle (fraction of K)",
        gl_vs_ml_error(&osc.plant, 1e-3, 5.0)? / osc.plant.gain(),
        0.02,
    ));

    // integer-order reduction against an RK4 reference
    checks.push(Check::new(
        "integer-order loop vs RK4 reference (fraction of set-point)",
        integer_order_error()?,
        0.01,
    ));

    Ok(Report { checks })
}

/// Max |GL - analytic| over t in [0.1, horizon] for the unit-step response.
pub fn gl_vs_ml_error(plant: &FoPlant, h: f64, horizon: f64) -> Result<f64> {
    let y = open_loop_step(plant, h, horizon)?;
    let mut max_err = 0.0f64;
    for (k, v) in y.iter().enumerate() {
        let t = k as f64 * h;
        if t < 0.1 {
            continue;
        }
        let ml = mittag_leffler(plant.alpha(), -t.powf(plant.alpha()) / plant.tau())?;
        let want = plant.gain() * (1.0 - ml);
        max_err = max_err.max((v - want).abs());
    }
    Ok(max_err)
}

fn integer_order_error() -> Result<f64> {
    let plant = FoPlant::new(1.0, 1.0, 1.0)?;
    let controller = Fopid::new(1.0, 0.5, 0.0, 1.0, 1.0)?;
    let cfg = SimConfig {
        step: 1e-3,
        horizon: 20.0,
        disturbance_magnitude: 0.0,
        ..SimConfig::default()
    };
    let run = simulate(&plant, &controller, &cfg)?;
    let reference = rk4_pi(1.0, 1.0, 1.0, 0.5, cfg.step, run.len());
    let mut max_err = 0.0f64;
    for (got, want) in run.y.iter().zip(&reference) {
        max_err = max_err.max((got - want).abs());
    }
    Ok(max_err)
}

/// RK4 on the classical PI loop `tau y' = K u - y`, `z' = e`, `u = kp e + ki z`.
fn rk4_pi(k_gain: f64, tau: f64, kp: f64, ki: f64, h: f64, n: usize) -> Vec<f64> {
    let deriv = |y: f64, z: f64| {
        let e = 1.0 - y;
        ((k_gain * (kp * e + ki * z) - y) / tau, e)
    };
    let mut y = 0.0;
    let mut z = 0.0;
    let mut out = Vec::with_capacity(n);
    out.push(y);
    for _ in 1..n {
        let (k1y, k1z) = deriv(y, z);
        let (k2y, k2z) = deriv(y + 0.5 * h * k1y, z + 0.5 * h * k1z);
        let (k3y, k3z) = deriv(y + 0.5 * h * k2y, z + 0.5 * h * k2z);
        let (k4y, k4z) = deriv(y + h * k3y, z + h * k3z);
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        z += h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
        out.push(y);
    }
    out
}
