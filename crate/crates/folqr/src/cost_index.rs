//! Time-domain performance indices: ITAE, ISCO, and their weighted sum used
//! as the tuning objective. Diverged runs take a flat penalty so the search
//! can still rank two broken candidates equally.

use serde::Serialize;

use crate::closed_loop::SimResult;
use crate::error::{Error, Result};

/// Default penalty assigned to diverged candidates: far above any reachable
/// objective value, but finite.
pub const DEFAULT_PENALTY: f64 = 1e10;

/// Weights of the ITAE and ISCO terms. The two default to the same value so
/// error decay and control economy carry equal weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostWeights {
    pub w1: f64,
    pub w2: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        CostWeights { w1: 1.0, w2: 1.0 }
    }
}

impl CostWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("w1", self.w1), ("w2", self.w2)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "cost weight {name} must be non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

fn check_lengths(t: &[f64], f: &[f64], what: &str) -> Result<()> {
    if t.len() != f.len() {
        return Err(Error::InvalidArgument(format!(
            "{what}: time and signal lengths differ ({} vs {})",
            t.len(),
            f.len()
        )));
    }
    if t.is_empty() {
        return Err(Error::InvalidArgument(format!("{what}: empty input")));
    }
    Ok(())
}

fn trapezoid(t: &[f64], f: impl Fn(usize) -> f64) -> f64 {
    let mut acc = 0.0;
    for k in 1..t.len() {
        acc += 0.5 * (f(k - 1) + f(k)) * (t[k] - t[k - 1]);
    }
    acc
}

/// Integral of time-multiplied absolute error, `∫ t |e(t)| dt`, by trapezoid.
pub fn itae(t: &[f64], e: &[f64]) -> Result<f64> {
    check_lengths(t, e, "itae")?;
    Ok(trapezoid(t, |k| t[k] * e[k].abs()))
}

/// Integral of squared controller output, `∫ u²(t) dt`, by trapezoid.
pub fn isco(t: &[f64], u: &[f64]) -> Result<f64> {
    check_lengths(t, u, "isco")?;
    Ok(trapezoid(t, |k| u[k] * u[k]))
}

/// Itemized objective value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObjectiveBreakdown {
    pub itae: f64,
    pub isco: f64,
    pub total: f64,
    pub penalized: bool,
}

/// Weighted objective `w1·ITAE + w2·ISCO` over the simulated horizon, or the
/// penalty if the run diverged.
pub fn objective(result: &SimResult, weights: &CostWeights, penalty: f64) -> Result<f64> {
    Ok(objective_breakdown(result, weights, penalty)?.total)
}

/// Same as [`objective`] but keeps the per-index terms.
pub fn objective_breakdown(
    result: &SimResult,
    weights: &CostWeights,
    penalty: f64,
) -> Result<ObjectiveBreakdown> {
    weights.validate()?;
    if penalty.is_nan() || penalty <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "penalty must be positive, got {penalty}"
        )));
    }
    if result.diverged {
        return Ok(ObjectiveBreakdown {
            itae: f64::NAN,
            isco: f64::NAN,
            total: penalty,
            penalized: true,
        });
    }
    let itae_val = itae(&result.t, &result.e)?;
    let isco_val = isco(&result.t, &result.u)?;
    Ok(ObjectiveBreakdown {
        itae: itae_val,
        isco: isco_val,
        total: weights.w1 * itae_val + weights.w2 * isco_val,
        penalized: false,
    })
}
