//! Fixed-step GL simulation of the FOPID-controlled fractional plant.
//!
//! Per step k the controller and plant equations
//!
//! ```text
//! u_k = Kp e_k + Ki h^lambda (e_k + H_i) + Kd h^{-mu} (e_k + H_d) + d_k
//! (1 + tau h^{-alpha}) y_k = K u_k - tau h^{-alpha} H_y
//! ```
//!
//! (H_* are the GL history sums over samples before k) combine with
//! e_k = r_k - y_k into one scalar linear equation in y_k, solved exactly —
//! no inner iteration. Zero history is assumed before t = 0, and the full
//! memory is kept, so a run costs O(N²).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frac_num;
use crate::plant_model::FoPlant;

/// PI^lambda D^mu controller: `u = Kp e + Ki D^{-lambda} e + Kd D^{mu} e`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fopid {
    kp: f64,
    ki: f64,
    kd: f64,
    lambda: f64,
    mu: f64,
}

impl Fopid {
    pub fn new(kp: f64, ki: f64, kd: f64, lambda: f64, mu: f64) -> Result<Self> {
        for (name, v) in [("kp", kp), ("ki", ki), ("kd", kd)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "controller gain {name} must be non-negative, got {v}"
                )));
            }
        }
        for (name, v) in [("lambda", lambda), ("mu", mu)] {
            if !v.is_finite() || !(0.0..=2.0).contains(&v) {
                return Err(Error::InvalidArgument(format!(
                    "controller order {name} must lie in [0, 2], got {v}"
                )));
            }
        }
        Ok(Fopid {
            kp,
            ki,
            kd,
            lambda,
            mu,
        })
    }

    pub fn kp(&self) -> f64 {
        self.kp
    }

    pub fn ki(&self) -> f64 {
        self.ki
    }

    pub fn kd(&self) -> f64 {
        self.kd
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// Grid, set-point, and disturbance description for one closed-loop run.
///
/// The set-point is a step of `setpoint_amplitude` at t = 0; the load
/// disturbance is an input-additive step of `disturbance_magnitude` from
/// `disturbance_time` on. Defaults: h = 0.01 s, T = 30 s, unit set-point,
/// d = 0.2 at T/2, divergence bound 1e6.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub step: f64,
    pub horizon: f64,
    pub setpoint_amplitude: f64,
    pub disturbance_magnitude: f64,
    pub disturbance_time: f64,
    pub divergence_bound: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            step: 0.01,
            horizon: 30.0,
            setpoint_amplitude: 1.0,
            disturbance_magnitude: 0.2,
            disturbance_time: 15.0,
            divergence_bound: 1e6,
        }
    }
}

impl SimConfig {
    /// A copy with the disturbance removed (set-point-only run).
    pub fn without_disturbance(&self) -> SimConfig {
        SimConfig {
            disturbance_magnitude: 0.0,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.step <= 0.0 || !self.step.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "sim step must be positive, got {}",
                self.step
            )));
        }
        if !self.horizon.is_finite() || self.horizon < self.step {
            return Err(Error::InvalidConfig(format!(
                "sim horizon must be at least one step, got {}",
                self.horizon
            )));
        }
        if !self.setpoint_amplitude.is_finite() || !self.disturbance_magnitude.is_finite() {
            return Err(Error::InvalidConfig(
                "set-point and disturbance magnitudes must be finite".into(),
            ));
        }
        if !self.disturbance_time.is_finite()
            || self.disturbance_time < 0.0
            || self.disturbance_time > self.horizon
        {
            return Err(Error::InvalidConfig(format!(
                "disturbance time must lie in [0, horizon], got {}",
                self.disturbance_time
            )));
        }
        if self.divergence_bound.is_nan() || self.divergence_bound <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "divergence bound must be positive, got {}",
                self.divergence_bound
            )));
        }
        Ok(())
    }
}

/// Sampled closed-loop trajectories. `e[k] = r[k] - y[k]` holds exactly;
/// if a sample breached the divergence bound the sequences stop at that
/// sample and `diverged` is set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub t: Vec<f64>,
    pub r: Vec<f64>,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    pub e: Vec<f64>,
    pub diverged: bool,
    pub step: f64,
}

impl SimResult {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Writes the result as CSV with header `t,r,y,u,e` at 9 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,r,y,u,e\n");
        for k in 0..self.len() {
            out.push_str(&format!(
                "{:.8e},{:.8e},{:.8e},{:.8e},{:.8e}\n",
                self.t[k], self.r[k], self.y[k], self.u[k], self.e[k]
            ));
        }
        out
    }

    /// CSV with the fractional state trajectories appended:
    /// `t,r,y,u,e,x1,x2,x3`.
    pub fn to_csv_with_states(&self, states: &StateTrajectories) -> String {
        let mut out = String::from("t,r,y,u,e,x1,x2,x3\n");
        for k in 0..self.len() {
            out.push_str(&format!(
                "{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e}\n",
                self.t[k],
                self.r[k],
                self.y[k],
                self.u[k],
                self.e[k],
                states.x1[k],
                states.x2[k],
                states.x3[k]
            ));
        }
        out
    }
}

/// Error-signal differ-integrals `x1 = D^{-lambda} e`, `x2 = e`, `x3 = D^{mu} e`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateTrajectories {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub x3: Vec<f64>,
}

/// Runs the closed loop of plant + FOPID controller under `config`.
pub fn simulate(plant: &FoPlant, controller: &Fopid, config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let h = config.step;
    let n = (config.horizon / h).round() as usize + 1;

    let alpha = plant.alpha();
    let k_gain = plant.gain();
    let plant_coeff = plant.tau() * h.powf(-alpha);
    let int_scale = h.powf(controller.lambda);
    let der_scale = h.powf(-controller.mu);
    // instantaneous controller gain on e_k
    let c_inst = controller.kp + controller.ki * int_scale + controller.kd * der_scale;
    let denom = 1.0 + plant_coeff + k_gain * c_inst;
    if denom.abs() < 1e-12 {
        return Err(Error::Conditioning(format!(
            "per-step coefficient 1 + tau h^-alpha + K (gain terms) = {denom:.3e} is singular"
        )));
    }

    let wy = frac_num::gl_weights(alpha, n)?;
    let wi = frac_num::gl_weights(-controller.lambda, n)?;
    let wd = frac_num::gl_weights(controller.mu, n)?;
    let (wy, wi, wd) = (wy.weights(), wi.weights(), wd.weights());

    let mut t = Vec::with_capacity(n);
    let mut r = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    let mut e = Vec::with_capacity(n);
    let mut diverged = false;

    for k in 0..n {
        let tk = k as f64 * h;
        let rk = config.setpoint_amplitude;
        let dk = if config.disturbance_magnitude != 0.0 && tk >= config.disturbance_time {
            config.disturbance_magnitude
        } else {
            0.0
        };

        let mut hist_y = 0.0;
        let mut hist_i = 0.0;
        let mut hist_d = 0.0;
        for j in 1..=k {
            let ej = e[k - j];
            hist_y += wy[j] * y[k - j];
            hist_i += wi[j] * ej;
            hist_d += wd[j] * ej;
        }

        // history-only part of u_k
        let b = controller.ki * int_scale * hist_i + controller.kd * der_scale * hist_d + dk;
        let yk = (k_gain * c_inst * rk + k_gain * b - plant_coeff * hist_y) / denom;
        let ek = rk - yk;
        let uk = c_inst * ek + b;

        t.push(tk);
        r.push(rk);
        y.push(yk);
        u.push(uk);
        e.push(ek);

        if !yk.is_finite()
            || !uk.is_finite()
            || yk.abs() > config.divergence_bound
            || uk.abs() > config.divergence_bound
        {
            diverged = true;
            break;
        }
    }

    Ok(SimResult {
        t,
        r,
        y,
        u,
        e,
        diverged,
        step: h,
    })
}

/// Differ-integrates the stored error signal into the three state trajectories.
pub fn state_trajectories(result: &SimResult, lambda: f64, mu: f64) -> Result<StateTrajectories> {
    if result.diverged {
        return Err(Error::DivergedState(
            "state trajectories are undefined for a truncated run".into(),
        ));
    }
    Ok(StateTrajectories {
        x1: frac_num::gl_apply(&result.e, -lambda, result.step)?,
        x2: result.e.clone(),
        x3: frac_num::gl_apply(&result.e, mu, result.step)?,
    })
}

/// Trapezoidal integral of u² over [0, window].
pub fn early_control_effort(result: &SimResult, window: f64) -> Result<f64> {
    if window <= 0.0 || !window.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "window must be positive, got {window}"
        )));
    }
    let t_last = result.t.last().copied().unwrap_or(0.0);
    if window > t_last + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "window {window} exceeds simulated horizon {t_last}"
        )));
    }
    let mut acc = 0.0;
    for k in 1..result.len() {
        if result.t[k] > window + 1e-12 {
            break;
        }
        let f0 = result.u[k - 1] * result.u[k - 1];
        let f1 = result.u[k] * result.u[k];
        acc += 0.5 * (f0 + f1) * (result.t[k] - result.t[k - 1]);
    }
    Ok(acc)
}

/// Largest |y - r| over samples at or after `from_time` (regulation metric
/// for the post-disturbance window).
pub fn peak_deviation_after(result: &SimResult, from_time: f64) -> f64 {
    result
        .t
        .iter()
        .zip(result.y.iter().zip(result.r.iter()))
        .filter(|(t, _)| **t >= from_time)
        .map(|(_, (y, r))| (y - r).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::frac_num::gl_weights;

    fn default_sim() -> SimConfig {
        SimConfig::default()
    }

    #[test]
    fn fopid_validation() {
        assert!(Fopid::new(1.0, 0.5, 0.1, 1.0, 0.5).is_ok());
        assert!(Fopid::new(-0.1, 0.5, 0.1, 1.0, 0.5).is_err());
        assert!(Fopid::new(1.0, 0.5, 0.1, 2.1, 0.5).is_err());
        assert!(Fopid::new(1.0, 0.5, 0.1, 1.0, -0.2).is_err());
        assert!(Fopid::new(f64::NAN, 0.5, 0.1, 1.0, 0.5).is_err());
    }

    #[test]
    fn sim_config_validation() {
        assert!(default_sim().validate().is_ok());
        assert!(SimConfig {
            step: 0.0,
            ..default_sim()
        }
        .validate()
        .is_err());
        assert!(SimConfig {
            horizon: 0.001,
            ..default_sim()
        }
        .validate()
        .is_err());
        assert!(SimConfig {
            disturbance_time: 40.0,
            ..default_sim()
        }
        .validate()
        .is_err());
        assert!(SimConfig {
            divergence_bound: 0.0,
            ..default_sim()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn zero_gain_controller_is_open_loop() {
        let plant = fixtures::oscillatory().plant;
        let c = Fopid::new(0.0, 0.0, 0.0, 1.0, 1.0).unwrap();
        let cfg = SimConfig {
            disturbance_magnitude: 0.0,
            disturbance_time: 0.0,
            horizon: 2.0,
            ..default_sim()
        };
        let res = simulate(&plant, &c, &cfg).unwrap();
        assert!(!res.diverged);
        assert!(res.y.iter().all(|&v| v == 0.0));
        assert!(res.u.iter().all(|&v| v == 0.0));
        assert!(res.e.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn error_is_setpoint_minus_output_exactly() {
        let case = fixtures::oscillatory();
        let res = simulate(&case.plant, &case.lqr_controller, &default_sim()).unwrap();
        for k in 0..res.len() {
            assert_eq!(res.e[k], res.r[k] - res.y[k]);
        }
    }

    #[test]
    fn per_step_algebra_is_exact() {
        // substituting the outputs back into the discretized plant and
        // controller equations must leave only rounding-level residuals
        let case = fixtures::oscillatory();
        let cfg = default_sim();
        let res = simulate(&case.plant, &case.lqr_controller, &cfg).unwrap();
        let c = &case.lqr_controller;
        let h = cfg.step;
        let n = res.len();
        let wy = gl_weights(case.plant.alpha(), n).unwrap();
        let wi = gl_weights(-c.lambda(), n).unwrap();
        let wd = gl_weights(c.mu(), n).unwrap();
        let (wy, wi, wd) = (wy.weights(), wi.weights(), wd.weights());
        let coeff = case.plant.tau() * h.powf(-case.plant.alpha());
        for k in 0..n {
            let mut hy = 0.0;
            let mut hi = 0.0;
            let mut hd = 0.0;
            for j in 1..=k {
                hy += wy[j] * res.y[k - j];
                hi += wi[j] * res.e[k - j];
                hd += wd[j] * res.e[k - j];
            }
            let d = if res.t[k] >= cfg.disturbance_time {
                cfg.disturbance_magnitude
            } else {
                0.0
            };
            let u_expect = c.kp() * res.e[k]
                + c.ki() * h.powf(c.lambda()) * (res.e[k] + hi)
                + c.kd() * h.powf(-c.mu()) * (res.e[k] + hd)
                + d;
            let plant_resid =
                (1.0 + coeff) * res.y[k] - (case.plant.gain() * res.u[k] - coeff * hy);
            assert!(
                (res.u[k] - u_expect).abs() <= 1e-10,
                "k={k}: controller residual {}",
                (res.u[k] - u_expect).abs()
            );
            assert!(
                plant_resid.abs() <= 1e-10,
                "k={k}: plant residual {plant_resid}"
            );
        }
    }

    #[test]
    fn setpoint_scaling_is_linear() {
        let case = fixtures::sluggish();
        let base = simulate(&case.plant, &case.lqr_controller, &default_sim()).unwrap();
        let scaled_cfg = SimConfig {
            setpoint_amplitude: 3.5,
            disturbance_magnitude: 0.2 * 3.5,
            ..default_sim()
        };
        let scaled = simulate(&case.plant, &case.lqr_controller, &scaled_cfg).unwrap();
        for k in 0..base.len() {
            for (a, b) in [
                (scaled.y[k], base.y[k]),
                (scaled.u[k], base.u[k]),
                (scaled.e[k], base.e[k]),
            ] {
                let want = 3.5 * b;
                assert!(
                    (a - want).abs() <= 1e-10 * want.abs().max(1e-3),
                    "k={k}: {a} vs {want}"
                );
            }
        }
    }

    #[test]
    fn disturbance_superposition() {
        let case = fixtures::oscillatory();
        let full = simulate(&case.plant, &case.lqr_controller, &default_sim()).unwrap();
        let setpoint_only = simulate(
            &case.plant,
            &case.lqr_controller,
            &default_sim().without_disturbance(),
        )
        .unwrap();
        let disturbance_only_cfg = SimConfig {
            setpoint_amplitude: 0.0,
            ..default_sim()
        };
        let disturbance_only =
            simulate(&case.plant, &case.lqr_controller, &disturbance_only_cfg).unwrap();
        for k in 0..full.len() {
            let want = setpoint_only.y[k] + disturbance_only.y[k];
            assert!(
                (full.y[k] - want).abs() <= 1e-8 * want.abs().max(1.0),
                "k={k}: {} vs {want}",
                full.y[k]
            );
        }
    }

    #[test]
    fn published_controller_tracks_and_recovers() {
        let case = fixtures::oscillatory();
        let res = simulate(&case.plant, &case.lqr_controller, &default_sim()).unwrap();
        assert!(!res.diverged);
        // settled near 1 just before the disturbance hits at t = 15
        let k_before = (15.0 / 0.01) as usize - 1;
        assert!((res.y[k_before] - 1.0).abs() <= 0.02, "{}", res.y[k_before]);
        // recovered to within 2% by the end of the horizon
        assert!(
            (res.y.last().unwrap() - 1.0).abs() <= 0.02,
            "{}",
            res.y.last().unwrap()
        );
        // regulation comparison against the baseline controller
        let base = simulate(&case.plant, &case.baseline_controller, &default_sim()).unwrap();
        let dev_lqr = peak_deviation_after(&res, 15.0);
        let dev_base = peak_deviation_after(&base, 15.0);
        assert!(
            dev_lqr < dev_base,
            "peak post-disturbance deviation {dev_lqr} vs {dev_base}"
        );
    }

    #[test]
    fn divergence_flag_and_truncation() {
        // an enormous integral gain at lambda = 1 destabilizes the loop: the
        // characteristic equation 1.11 s^2.7 + s + 5e4 = 0 has roots inside
        // the fractional stability sector boundary
        let plant = fixtures::oscillatory().plant;
        let c = Fopid::new(0.0, 1e4, 0.0, 1.0, 0.0).unwrap();
        let cfg = SimConfig {
            divergence_bound: 1e3,
            ..default_sim()
        };
        let res = simulate(&plant, &c, &cfg).unwrap();
        assert!(res.diverged);
        assert!(res.len() < (cfg.horizon / cfg.step) as usize + 1);
        let last = res.len() - 1;
        assert!(res.y[last].abs() > 1e3 || res.u[last].abs() > 1e3);
        assert!(state_trajectories(&res, 0.1, 0.0).is_err());
    }

    #[test]
    fn state_trajectories_identities() {
        let case = fixtures::oscillatory();
        let cfg = SimConfig {
            horizon: 5.0,
            disturbance_magnitude: 0.0,
            disturbance_time: 0.0,
            ..default_sim()
        };
        let res = simulate(&case.plant, &case.lqr_controller, &cfg).unwrap();
        // zero orders: all three trajectories equal the error signal
        let st = state_trajectories(&res, 0.0, 0.0).unwrap();
        assert_eq!(st.x1, res.e);
        assert_eq!(st.x2, res.e);
        assert_eq!(st.x3, res.e);

        // zero error signal: all trajectories identically zero
        let zero = SimResult {
            t: vec![0.0, 0.01, 0.02],
            r: vec![0.0; 3],
            y: vec![0.0; 3],
            u: vec![0.0; 3],
            e: vec![0.0; 3],
            diverged: false,
            step: 0.01,
        };
        let st = state_trajectories(&zero, 0.7, 0.3).unwrap();
        assert!(st.x1.iter().all(|&v| v == 0.0));
        assert!(st.x3.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn state_trajectories_qualitative_shape() {
        // x1 (error integral) approaches a constant for a settling loop;
        // x3 (error derivative) decays toward zero
        let case = fixtures::oscillatory();
        let cfg = default_sim().without_disturbance();
        let res = simulate(&case.plant, &case.lqr_controller, &cfg).unwrap();
        let c = &case.lqr_controller;
        let st = state_trajectories(&res, c.lambda(), c.mu()).unwrap();
        let n = st.x1.len();
        let late_drift = (st.x1[n - 1] - st.x1[n - 301]).abs();
        assert!(st.x1[n - 1].is_finite());
        assert!(
            late_drift < 0.05 * st.x1[n - 1].abs().max(1.0),
            "{late_drift}"
        );
        let late_x3 = st.x3[n - 300..]
            .iter()
            .cloned()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let early_x3 = st.x3[..300]
            .iter()
            .cloned()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(
            late_x3 < 0.05 * early_x3,
            "x3 late {late_x3} vs early {early_x3}"
        );
    }

    #[test]
    fn integer_order_loop_matches_ode_reference() {
        // alpha = lambda = 1, Kd = 0: classical PI loop, oracle solved by RK4
        let plant = FoPlant::new(1.0, 1.0, 1.0).unwrap();
        let c = Fopid::new(1.0, 0.5, 0.0, 1.0, 1.0).unwrap();
        let cfg = SimConfig {
            step: 1e-3,
            horizon: 20.0,
            disturbance_magnitude: 0.0,
            ..default_sim()
        };
        let res = simulate(&plant, &c, &cfg).unwrap();
        let reference = rk4_pi_reference(1.0, 1.0, 1.0, 0.5, 1e-3, res.len());
        for (k, (got, want)) in res.y.iter().zip(&reference).enumerate() {
            assert!((got - want).abs() <= 0.01, "k={k}: {got} vs {want}");
        }
    }

    /// RK4 on tau y' = K u - y, z' = e, u = kp e + ki z: an independent
    /// integer-order oracle for the GL loop.
    pub(crate) fn rk4_pi_reference(
        k_gain: f64,
        tau: f64,
        kp: f64,
        ki: f64,
        h: f64,
        n: usize,
    ) -> Vec<f64> {
        let deriv = |y: f64, z: f64| {
            let e = 1.0 - y;
            let u = kp * e + ki * z;
            ((k_gain * u - y) / tau, e)
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

    #[test]
    fn step_size_convergence_is_first_order() {
        // Richardson differences of the mid-transient output halve with h
        for case in [fixtures::oscillatory(), fixtures::sluggish()] {
            let mut finals = Vec::new();
            for h in [0.02, 0.01, 0.005] {
                let cfg = SimConfig {
                    step: h,
                    horizon: 5.0,
                    disturbance_magnitude: 0.0,
                    disturbance_time: 0.0,
                    ..default_sim()
                };
                let res = simulate(&case.plant, &case.lqr_controller, &cfg).unwrap();
                finals.push(*res.y.last().unwrap());
            }
            let d1 = (finals[0] - finals[1]).abs();
            let d2 = (finals[1] - finals[2]).abs();
            let ratio = d1 / d2;
            assert!(
                (1.5..=2.5).contains(&ratio),
                "{}: richardson ratio {ratio} (d1={d1:.3e}, d2={d2:.3e})",
                case.name
            );
        }
    }

    #[test]
    fn early_effort_trivial_values() {
        let zero = SimResult {
            t: (0..101).map(|k| k as f64 * 0.01).collect(),
            r: vec![0.0; 101],
            y: vec![0.0; 101],
            u: vec![0.0; 101],
            e: vec![0.0; 101],
            diverged: false,
            step: 0.01,
        };
        assert_eq!(early_control_effort(&zero, 0.5).unwrap(), 0.0);
        let ones = SimResult {
            u: vec![1.0; 101],
            ..zero.clone()
        };
        let v = early_control_effort(&ones, 0.5).unwrap();
        assert!((v - 0.5).abs() < 1e-12, "{v}");
        assert!(early_control_effort(&ones, 2.0).is_err());
        assert!(early_control_effort(&ones, -1.0).is_err());
    }

    #[test]
    fn csv_round_trip_shape() {
        let case = fixtures::oscillatory();
        let cfg = SimConfig {
            horizon: 0.05,
            disturbance_time: 0.02,
            ..default_sim()
        };
        let res = simulate(&case.plant, &case.lqr_controller, &cfg).unwrap();
        let csv = res.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "t,r,y,u,e");
        assert_eq!(csv.lines().count(), res.len() + 1);
        let st = state_trajectories(&res, case.lqr_controller.lambda(), case.lqr_controller.mu())
            .unwrap();
        let csv = res.to_csv_with_states(&st);
        assert!(csv.starts_with("t,r,y,u,e,x1,x2,x3\n"));
    }
}
