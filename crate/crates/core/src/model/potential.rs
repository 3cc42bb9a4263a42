use std::f64::consts::PI;

use libm::erfc;

use super::{PhysicalParams, TrapLayout};
use crate::error::{Error, Result};

/// Truncated harmonic potential: half the squared distance to the nearest
/// trap center.
pub fn potential_value(x: f64, layout: &TrapLayout) -> f64 {
    let nearest = layout
        .centers()
        .iter()
        .map(|c| (x - c) * (x - c))
        .fold(f64::INFINITY, f64::min);
    0.5 * nearest
}

/// Single-atom tunneling rate J/ω_x between the ground states of two
/// truncated harmonic wells a distance `scaled_distance` (= αd) apart.
///
/// The closed form
///
/// ```text
///        -1 + e^{d²} [1 + d (1 - erf d)]
/// J = ---------------------------------
///        √π (e^{2d²} - 1) / (2d)
/// ```
///
/// overflows for d ≳ 18 and cancels catastrophically for small d, so it is
/// evaluated after multiplying through by e^{-2d²}:
/// J = 2d e^{-d²} [(1 - e^{-d²}) + d erfc d] / (√π (1 - e^{-2d²})).
pub fn tunneling_rate(scaled_distance: f64) -> Result<f64> {
    let d = scaled_distance;
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::domain(format!(
            "tunneling rate needs a positive finite trap distance, got {d}"
        )));
    }
    let d2 = d * d;
    let bracket = -(-d2).exp_m1() + d * erfc(d);
    let denom = PI.sqrt() * -(-2.0 * d2).exp_m1();
    Ok(2.0 * d * (-d2).exp() * bracket / denom)
}

/// One-dimensional contact coupling g = 2 (α a_s)(ω_p/ω_x) multiplying
/// δ(x₁ - x₂).
pub fn interaction_strength(params: &PhysicalParams) -> f64 {
    2.0 * params.scaled_scattering_length * params.omega_ratio
}
