//! Physical parameters, trap layouts, time-dependent schedules and the
//! analytic formulas shared by every solver.
//!
//! Natural units are used throughout: ħ = m = ω_x = 1, so the ground-state
//! inverse width α = √(mω_x/ħ) is 1. Lengths are therefore the products αd
//! quoted in figure captions, times are ω_x t and energies are in ħω_x.

mod params;
mod potential;
mod schedule;

pub use params::{PhysicalParams, Symmetry};
pub use potential::{interaction_strength, potential_value, tunneling_rate};
pub use schedule::{FirstMover, Jitter, RampShape, TrapLayout, TrapSchedule};
