//! Coherent transport of an empty site ("hole") through a triple-well
//! potential holding two ultracold atoms.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: units, trap schedules, potential and tunneling formulas;
//! - [`threelevel`] and [`holechain`]: reduced hole-hopping models and
//!   their dark states;
//! - [`tdse`]: the two-atom Schrödinger equation on a 2D grid;
//! - [`bohm`]: quantum trajectories computed from stored frames;
//! - [`experiments`]: transport, diode, transistor and jitter studies.

// NaN-rejecting guards are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bohm;
pub mod config;
mod error;
pub mod experiments;
pub mod holechain;
mod hopping;
pub mod model;
pub mod tdse;
pub mod threelevel;

pub use error::{Error, Result};
pub use model::{
    interaction_strength, potential_value, tunneling_rate, FirstMover, Jitter, PhysicalParams,
    RampShape, Symmetry, TrapLayout, TrapSchedule,
};
