//! de Broglie–Bohm trajectories computed from a stored frame sequence.
//!
//! With ħ = m = 1 the guidance law is v_i = Im(∂ᵢψ/ψ). Trajectories are a
//! pure post-process: they never feed back into the wavefunction.

mod field;
mod integrate;
mod sample;
mod stats;

pub use field::{velocity_field, VelocityField, DENSITY_FLOOR};
pub use integrate::{
    integrate_trajectories, BohmOptions, TrajectoryEnsemble, TrajectoryFlag, MAX_FRAME_DT,
};
pub use sample::{sample_initial, MIN_ACCEPTANCE};
pub use stats::{
    ensemble_statistics, occupied_region, tv_distance, EnsembleStatistics, COARSE_CELLS,
};
