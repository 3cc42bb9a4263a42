//! Exact two-atom dynamics on a configuration-space grid.

mod evolve;
pub mod frames;
mod grid;
mod relax;
mod split_step;
mod state;

pub use evolve::{
    evolve, step_plan, Diagnostics, Evolution, EvolveOptions, FrameDiagnostics, BOUNDARY_FRACTION,
    LEAKAGE_THRESHOLD, MAX_DT, NORM_ABORT,
};
pub use frames::{FrameHeader, FrameReader, FrameSink, FrameSource, FrameWriter, MemoryFrames};
pub use grid::{Axis, ContactKernel, Grid2D, DEFAULT_CONTACT_WIDTH, DOMAIN_MARGIN, MAX_SPACING};
pub use relax::{energy, imaginary_time_relax, Relaxation};
pub use state::{
    fidelity, fidelity_to, ground_state_value, localized_hole_state, occupied_traps,
    single_atom_ground, Wavefunction2D, MIN_PRODUCT_STATE_DISTANCE,
};
