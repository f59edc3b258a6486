//! Built-in benchmark case studies: two fractional plants (one oscillatory,
//! one sluggish) with reference weight matrices, Riccati solutions, and two
//! tuned controllers each — an LQR-weight-search design and a plain
//! ITAE+ISCO-optimal baseline. All numbers are frozen here so transcription
//! problems stay localized to this file; the validation suite certifies the
//! Riccati entries against the equation itself at every run.

use crate::closed_loop::Fopid;
use crate::lqr_care::WeightMatrices;
use crate::plant_model::FoPlant;

/// One reference case: plant, LQR weights with the matching Riccati solution,
/// and the two controllers tuned for it.
#[derive(Debug, Clone)]
pub struct CaseStudy {
    pub name: &'static str,
    pub plant: FoPlant,
    pub weights: WeightMatrices,
    /// Riccati solution corresponding to `weights` (6-decimal reference).
    pub riccati: [[f64; 3]; 3],
    /// Controller obtained from the Riccati solution via gain extraction.
    pub lqr_controller: Fopid,
    /// Controller obtained by direct ITAE+ISCO minimization (comparison baseline).
    pub baseline_controller: Fopid,
}

/// Oscillatory case: G(s) = 5 / (1.11 s^1.7 + 1).
pub fn oscillatory() -> CaseStudy {
    CaseStudy {
        name: "oscillatory",
        plant: FoPlant::new(5.0, 1.11, 1.7).expect("valid fixture plant"),
        weights: WeightMatrices::new(0.474582, 0.011476, 0.01637, 0.989131)
            .expect("valid fixture weights"),
        riccati: [
            [0.634755, 0.398973, 0.152102],
            [0.398973, 0.381525, 0.15952],
            [0.152102, 0.15952, 0.12787],
        ],
        lqr_controller: Fopid::new(0.726453, 0.692674, 0.582319, 0.998773, 0.386624)
            .expect("valid fixture controller"),
        baseline_controller: Fopid::new(0.100718, 0.93109, 0.834496, 0.997477, 0.357018)
            .expect("valid fixture controller"),
    }
}

/// Sluggish case: G(s) = 5 / (1.11 s^0.7 + 1).
pub fn sluggish() -> CaseStudy {
    CaseStudy {
        name: "sluggish",
        plant: FoPlant::new(5.0, 1.11, 0.7).expect("valid fixture plant"),
        weights: WeightMatrices::new(1.599235, 0.012767, 0.012018, 0.301573)
            .expect("valid fixture weights"),
        riccati: [
            [1.458666, 0.652811, 0.154172],
            [0.652811, 0.441259, 0.127231],
            [0.154172, 0.127231, 0.062933],
        ],
        lqr_controller: Fopid::new(1.900408, 2.302821, 0.940017, 0.948591, 0.017093)
            .expect("valid fixture controller"),
        baseline_controller: Fopid::new(0.937303, 4.636422, 0.030218, 0.949254, 0.043881)
            .expect("valid fixture controller"),
    }
}

/// Both cases, in presentation order.
pub fn all() -> Vec<CaseStudy> {
    vec![oscillatory(), sluggish()]
}
