//! Tuning toolkit for fractional-order PID control of single-element
//! fractional plants `K / (tau s^alpha + 1)`.
//!
//! The pipeline: build the incommensurate state-space scaffold of the plant,
//! solve the continuous algebraic Riccati equation for a chosen weighting,
//! read the PI^lambda D^mu gains off the solution, simulate the fractional
//! closed loop with a Grünwald-Letnikov scheme, and search the weighting
//! (or the gains directly) with a real-coded genetic algorithm minimizing a
//! weighted ITAE + ISCO index.

pub mod closed_loop;
pub mod cost_index;
pub mod error;
pub mod fixtures;
pub mod frac_num;
pub mod ga_tuner;
pub mod lqr_care;
pub mod plant_model;
pub mod validate;

pub use closed_loop::{Fopid, SimConfig, SimResult, StateTrajectories};
pub use cost_index::{CostWeights, ObjectiveBreakdown};
pub use error::{Error, Result};
pub use ga_tuner::{GaConfig, TuningMode, TuningResult};
pub use lqr_care::{RiccatiSolution, WeightMatrices};
pub use plant_model::{FoPlant, StateSpaceModel};
