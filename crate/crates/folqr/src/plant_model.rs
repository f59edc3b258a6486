//! Single-fractional-element plant `K / (tau s^alpha + 1)` and its
//! incommensurate state-space realization.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frac_num;

/// Plant `G(s) = K / (tau s^alpha + 1)`.
///
/// `alpha > 1` gives an oscillatory open-loop step response, `alpha < 1` a
/// sluggish one. `tau` is the pseudo time-constant (units s^alpha).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FoPlant {
    gain: f64,
    tau: f64,
    alpha: f64,
}

/// Qualitative open-loop character implied by the fractional order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PlantCharacter {
    Oscillatory,
    Sluggish,
    FirstOrder,
}

impl FoPlant {
    /// `tau` must be positive, `alpha` strictly inside (0, 2), and `gain`
    /// finite and nonzero (a zero gain destroys controllability of the
    /// state-space pair the Riccati design relies on).
    pub fn new(gain: f64, tau: f64, alpha: f64) -> Result<Self> {
        if !gain.is_finite() || gain == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "plant gain must be finite and nonzero, got {gain}"
            )));
        }
        if !tau.is_finite() || tau <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "plant tau must be positive, got {tau}"
            )));
        }
        if !alpha.is_finite() || alpha <= 0.0 || alpha >= 2.0 {
            return Err(Error::InvalidArgument(format!(
                "plant alpha must lie strictly inside (0, 2), got {alpha}"
            )));
        }
        Ok(FoPlant { gain, tau, alpha })
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn character(&self) -> PlantCharacter {
        if self.alpha > 1.0 {
            PlantCharacter::Oscillatory
        } else if self.alpha < 1.0 {
            PlantCharacter::Sluggish
        } else {
            PlantCharacter::FirstOrder
        }
    }
}

/// Incommensurate state-space template built from a plant and the controller
/// orders: `d^q x = A x + B u` with per-state orders `[lambda, mu, alpha - mu]`.
///
/// A and B depend only on the plant; the fractional orders ride along in
/// `orders` and never enter the Riccati equation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateSpaceModel {
    pub a: [[f64; 3]; 3],
    pub b: [f64; 3],
    pub orders: [f64; 3],
}

/// Builds the 3-state realization for a plant and controller orders.
///
/// `A = [[0,1,0],[0,0,1],[0,-1/tau,0]]`, `B = [0,0,-K/tau]`. `mu > alpha`
/// is permitted (the third order entry just goes negative); the closed-loop
/// simulator works from the transfer function directly so no negative-order
/// state propagation ever happens.
pub fn build_state_space(plant: &FoPlant, lambda: f64, mu: f64) -> Result<StateSpaceModel> {
    for (name, v) in [("lambda", lambda), ("mu", mu)] {
        if !v.is_finite() || !(0.0..=2.0).contains(&v) {
            return Err(Error::InvalidArgument(format!(
                "{name} must lie in [0, 2], got {v}"
            )));
        }
    }
    let tau = plant.tau();
    Ok(StateSpaceModel {
        a: [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, -1.0 / tau, 0.0]],
        b: [0.0, 0.0, -plant.gain() / tau],
        orders: [lambda, mu, plant.alpha() - mu],
    })
}

/// Unit-step open-loop response of the plant on the grid t_k = k h,
/// k = 0..floor(T/h), via GL discretization of `tau D^alpha y + y = K u`.
///
/// The step is applied at t = 0+, so y(0) = 0 and
/// `y_k = (K - tau h^{-alpha} sum_{j=1..k} w_j y_{k-j}) / (1 + tau h^{-alpha})`
/// for k >= 1.
pub fn open_loop_step(plant: &FoPlant, step: f64, horizon: f64) -> Result<Vec<f64>> {
    if step <= 0.0 || !step.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "step must be positive, got {step}"
        )));
    }
    if !horizon.is_finite() || horizon < step {
        return Err(Error::InvalidArgument(format!(
            "horizon must be at least one step, got {horizon}"
        )));
    }
    let n = (horizon / step).round() as usize + 1;
    let weights = frac_num::gl_weights(plant.alpha(), n)?;
    let w = weights.weights();
    let coeff = plant.tau() * step.powf(-plant.alpha());
    let gain = plant.gain();
    let mut y = vec![0.0f64; n];
    for k in 1..n {
        let mut hist = 0.0;
        for j in 1..=k {
            hist += w[j] * y[k - j];
        }
        y[k] = (gain - coeff * hist) / (1.0 + coeff);
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frac_num::mittag_leffler;

    #[test]
    fn plant_validation() {
        assert!(FoPlant::new(5.0, 1.11, 1.7).is_ok());
        assert!(FoPlant::new(0.0, 1.0, 1.0).is_err());
        assert!(FoPlant::new(1.0, 0.0, 1.0).is_err());
        assert!(FoPlant::new(1.0, -2.0, 1.0).is_err());
        assert!(FoPlant::new(1.0, 1.0, 0.0).is_err());
        assert!(FoPlant::new(1.0, 1.0, 2.0).is_err());
        assert!(FoPlant::new(1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn plant_character() {
        assert_eq!(
            FoPlant::new(5.0, 1.11, 1.7).unwrap().character(),
            PlantCharacter::Oscillatory
        );
        assert_eq!(
            FoPlant::new(5.0, 1.11, 0.7).unwrap().character(),
            PlantCharacter::Sluggish
        );
        assert_eq!(
            FoPlant::new(1.0, 1.0, 1.0).unwrap().character(),
            PlantCharacter::FirstOrder
        );
    }

    #[test]
    fn state_space_oscillatory_case() {
        let plant = FoPlant::new(5.0, 1.11, 1.7).unwrap();
        let m = build_state_space(&plant, 1.0, 0.4).unwrap();
        assert_eq!(m.a[0], [0.0, 1.0, 0.0]);
        assert_eq!(m.a[1], [0.0, 0.0, 1.0]);
        assert!((m.a[2][1] - (-0.900901)).abs() < 1e-6);
        assert_eq!(m.a[2][0], 0.0);
        assert_eq!(m.a[2][2], 0.0);
        assert!((m.b[2] - (-4.504505)).abs() < 1e-6);
        assert_eq!(m.b[0], 0.0);
        assert_eq!(m.b[1], 0.0);
        assert_eq!(m.orders, [1.0, 0.4, 1.7 - 0.4]);
    }

    #[test]
    fn state_space_unit_case() {
        let plant = FoPlant::new(1.0, 1.0, 1.3).unwrap();
        let m = build_state_space(&plant, 0.5, 0.2).unwrap();
        assert_eq!(m.a[2], [0.0, -1.0, 0.0]);
        assert_eq!(m.b, [0.0, 0.0, -1.0]);
    }

    #[test]
    fn state_space_sluggish_orders() {
        let plant = FoPlant::new(5.0, 1.11, 0.7).unwrap();
        let m = build_state_space(&plant, 0.9, 0.05).unwrap();
        assert_eq!(m.orders, [0.9, 0.05, 0.7 - 0.05]);
    }

    #[test]
    fn state_space_allows_mu_above_alpha() {
        let plant = FoPlant::new(5.0, 1.11, 0.7).unwrap();
        let m = build_state_space(&plant, 1.0, 1.5).unwrap();
        assert!(m.orders[2] < 0.0);
    }

    #[test]
    fn controllability_matrix_is_full_rank() {
        // C = [B, AB, A^2 B]; det must be nonzero for tau > 0, K != 0.
        for (k, tau) in [(5.0, 1.11), (-2.0, 0.3), (0.01, 10.0)] {
            let plant = FoPlant::new(k, tau, 1.0).unwrap();
            let m = build_state_space(&plant, 1.0, 1.0).unwrap();
            let a = nalgebra::Matrix3::from_fn(|i, j| m.a[i][j]);
            let b = nalgebra::Vector3::from_column_slice(&m.b);
            let c = nalgebra::Matrix3::from_columns(&[b, a * b, a * a * b]);
            assert!(
                c.determinant().abs() > 1e-12,
                "K={k} tau={tau}: det {}",
                c.determinant()
            );
        }
    }

    #[test]
    fn a_matrix_characteristic_polynomial() {
        // det(sI - A) = s^3 + s / tau, so the eigenvalues are {0, +-i/sqrt(tau)}.
        let tau = 1.11;
        let plant = FoPlant::new(5.0, tau, 1.7).unwrap();
        let m = build_state_space(&plant, 1.0, 0.4).unwrap();
        let a = nalgebra::Matrix3::from_fn(|i, j| m.a[i][j]);
        // coefficients of det(sI - A) = s^3 + c2 s^2 + c1 s + c0
        let c2 = -a.trace();
        let c1 = 0.5 * (a.trace().powi(2) - (a * a).trace());
        let c0 = -a.determinant();
        assert!(c2.abs() < 1e-15);
        assert!((c1 - 1.0 / tau).abs() < 1e-15);
        assert!(c0.abs() < 1e-15);
    }

    #[test]
    fn open_loop_single_sample_closed_form() {
        let plant = FoPlant::new(5.0, 1.11, 1.7).unwrap();
        let h = 0.01;
        let y = open_loop_step(&plant, h, h).unwrap();
        assert_eq!(y.len(), 2);
        assert_eq!(y[0], 0.0);
        let expected = 5.0 / (1.0 + 1.11 * h.powf(-1.7));
        assert!((y[1] - expected).abs() < 1e-15);
    }

    #[test]
    fn open_loop_integer_order_matches_exponential() {
        let plant = FoPlant::new(1.0, 1.0, 1.0).unwrap();
        let h = 1e-3;
        let y = open_loop_step(&plant, h, 5.0).unwrap();
        for (k, v) in y.iter().enumerate() {
            let t = k as f64 * h;
            let want = 1.0 - (-t).exp();
            assert!((v - want).abs() <= 0.005, "t={t}: {v} vs {want}");
        }
    }

    #[test]
    fn open_loop_matches_mittag_leffler_oracle() {
        let plant = FoPlant::new(5.0, 1.11, 1.7).unwrap();
        let h = 1e-3;
        let y = open_loop_step(&plant, h, 5.0).unwrap();
        let mut max_err = 0.0f64;
        for (k, v) in y.iter().enumerate() {
            let t = k as f64 * h;
            if t < 0.1 {
                continue;
            }
            let ml = mittag_leffler(1.7, -t.powf(1.7) / 1.11).unwrap();
            let want = 5.0 * (1.0 - ml);
            max_err = max_err.max((v - want).abs());
        }
        assert!(max_err <= 0.02 * 5.0, "max err {max_err}");
    }

    #[test]
    fn open_loop_shape_overshoot_vs_monotone() {
        let h = 0.005;
        let osc = FoPlant::new(5.0, 1.11, 1.7).unwrap();
        let y = open_loop_step(&osc, h, 30.0).unwrap();
        let peak = y.iter().cloned().fold(f64::MIN, f64::max);
        assert!(
            peak > 5.0,
            "oscillatory plant must overshoot K, peak {peak}"
        );

        let slug = FoPlant::new(5.0, 1.11, 0.7).unwrap();
        let y = open_loop_step(&slug, h, 30.0).unwrap();
        let peak = y.iter().cloned().fold(f64::MIN, f64::max);
        assert!(peak <= 5.0, "sluggish plant must stay below K, peak {peak}");
        assert!(
            y.windows(2).all(|w| w[1] >= w[0] - 1e-12),
            "sluggish response must be monotone"
        );
        // and slower than the alpha = 1 plant with the same tau
        let first = FoPlant::new(5.0, 1.11, 1.0).unwrap();
        let y1 = open_loop_step(&first, h, 30.0).unwrap();
        let t_idx = (10.0 / h) as usize;
        assert!(y[t_idx] < y1[t_idx]);
    }

    #[test]
    fn open_loop_reaches_dc_gain() {
        let h = 0.01;
        // oscillatory case at the 50 tau^(1/alpha) mark
        let osc = FoPlant::new(5.0, 1.11, 1.7).unwrap();
        let t_end = 50.0 * 1.11f64.powf(1.0 / 1.7);
        let y = open_loop_step(&osc, h, t_end).unwrap();
        assert!(
            (y.last().unwrap() - 5.0).abs() <= 0.02 * 5.0,
            "oscillatory tail {}",
            y.last().unwrap()
        );
        // the sluggish tail decays like t^{-alpha} and sits at 2.3% of K at
        // the same multiple, so it is checked at twice that horizon
        let slug = FoPlant::new(5.0, 1.11, 0.7).unwrap();
        let t_end = 100.0 * 1.11f64.powf(1.0 / 0.7);
        let y = open_loop_step(&slug, h, t_end).unwrap();
        assert!(
            (y.last().unwrap() - 5.0).abs() <= 0.02 * 5.0,
            "sluggish tail {}",
            y.last().unwrap()
        );
    }

    #[test]
    fn open_loop_rejects_bad_grid() {
        let plant = FoPlant::new(1.0, 1.0, 1.0).unwrap();
        assert!(open_loop_step(&plant, 0.0, 1.0).is_err());
        assert!(open_loop_step(&plant, 0.1, 0.05).is_err());
    }
}
