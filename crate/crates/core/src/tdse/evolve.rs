use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::frames::{FrameHeader, FrameSink};
use super::grid::{Axis, Grid2D};
use super::split_step::{kinetic_phases, potential_pass, Spectral};
use super::state::Wavefunction2D;
use crate::error::{Error, Result};
use crate::model::{
    interaction_strength, potential_value, PhysicalParams, TrapLayout, TrapSchedule,
};

/// Norm drift that aborts an evolution.
pub const NORM_ABORT: f64 = 1e-6;
/// Boundary probability above which a leakage warning is recorded.
pub const LEAKAGE_THRESHOLD: f64 = 1e-6;
/// Fraction of the domain, per side, counted as boundary.
pub const BOUNDARY_FRACTION: f64 = 0.05;
/// Largest time step accepted by [`evolve`].
pub const MAX_DT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    /// Half-width of the counter-diagonal band |x₁ + x₂| ≤ w.
    pub band_halfwidth: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            band_halfwidth: 1.0,
        }
    }
}

/// Observables recorded at every stored frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameDiagnostics {
    pub t: f64,
    pub norm: f64,
    /// Wrong-symmetry component produced by the step, before projection.
    pub asymmetry: f64,
    /// Populations of hole-left, hole-middle, hole-right (orthogonalized basis).
    pub hole_populations: [f64; 3],
    pub counterdiagonal: f64,
    pub boundary: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub steps: usize,
    pub dt: f64,
    pub frame_dt: f64,
    pub frame_count: usize,
    pub norm_drift: f64,
    pub symmetry_error: f64,
    pub max_middle_population: f64,
    pub max_counterdiagonal_population: f64,
    pub max_boundary_population: f64,
    pub leakage_warning: bool,
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub final_state: Wavefunction2D,
    pub diagnostics: Diagnostics,
    pub frames: Vec<FrameDiagnostics>,
}

/// Per-step potential phases for a fixed grid and interaction.
struct PotentialPhases {
    axis: Axis,
    /// Contact energy by index offset.
    contact: Vec<f64>,
    q: Vec<Complex64>,
    c: Vec<Complex64>,
}

impl PotentialPhases {
    fn new(axis: Axis, contact: Vec<f64>) -> Self {
        Self {
            q: vec![Complex64::new(1.0, 0.0); axis.n],
            c: vec![Complex64::new(1.0, 0.0); contact.len()],
            axis,
            contact,
        }
    }

    /// Phases for exp(-i Σ_k w_k V(t_k)), i.e. one or two fused half-steps.
    fn fill(&mut self, layouts: &[(&TrapLayout, f64)]) {
        for (i, q) in self.q.iter_mut().enumerate() {
            let x = self.axis.x(i);
            let phase: f64 = layouts.iter().map(|(l, w)| w * potential_value(x, l)).sum();
            *q = Complex64::from_polar(1.0, -phase);
        }
        let weight: f64 = layouts.iter().map(|(_, w)| w).sum();
        for (c, u) in self.c.iter_mut().zip(&self.contact) {
            *c = Complex64::from_polar(1.0, -weight * u);
        }
    }
}

fn frame_diagnostics(
    psi: &Wavefunction2D,
    layout: &TrapLayout,
    asymmetry: f64,
    options: &EvolveOptions,
) -> Result<FrameDiagnostics> {
    Ok(FrameDiagnostics {
        t: psi.t,
        norm: psi.norm_sqr(),
        asymmetry,
        hole_populations: psi.hole_populations(layout)?,
        counterdiagonal: psi.counterdiagonal_population(options.band_halfwidth),
        boundary: psi.boundary_population(BOUNDARY_FRACTION),
    })
}

/// Step count and effective step: an integral number of frame strides
/// spanning exactly `total`.
pub fn step_plan(total: f64, grid: &Grid2D) -> (usize, f64) {
    let stride = grid.frame_stride;
    let blocks = ((total / (grid.dt * stride as f64)) - 1e-9).ceil().max(1.0) as usize;
    let steps = blocks * stride;
    (steps, total / steps as f64)
}

/// Propagates two atoms through the time-dependent triple well.
///
/// Frames (ψ at t = 0 and after every `frame_stride` steps) are pushed to
/// `sink` when one is given; per-frame observables are always returned.
pub fn evolve(
    initial: &Wavefunction2D,
    schedule: &TrapSchedule,
    params: &PhysicalParams,
    grid: &Grid2D,
    options: &EvolveOptions,
    mut sink: Option<&mut dyn FrameSink>,
) -> Result<Evolution> {
    schedule.validate()?;
    params.validate()?;
    grid.validate()?;
    grid.check_covers(schedule)?;
    if grid.dt > MAX_DT {
        return Err(Error::precondition(format!(
            "dt = {} exceeds {MAX_DT}",
            grid.dt
        )));
    }
    let axis = grid.axis();
    if initial.axis != axis {
        return Err(Error::precondition(
            "initial state lives on a different grid",
        ));
    }
    if initial.symmetry != params.symmetry {
        return Err(Error::SymmetryMismatch {
            left: initial.symmetry,
            right: params.symmetry,
        });
    }
    let norm0 = initial.norm_sqr();
    if (norm0 - 1.0).abs() > 1e-8 {
        return Err(Error::precondition(format!(
            "initial norm {norm0} is not 1"
        )));
    }
    if initial.symmetry_error() > 1e-10 {
        return Err(Error::precondition(
            "initial state breaks exchange symmetry",
        ));
    }

    let total = schedule.total_duration();
    let (steps, h) = step_plan(total, grid);
    let stride = grid.frame_stride;
    let n = axis.n;
    let sign = params.symmetry.exchange_sign();

    let mut spectral = Spectral::new(n);
    let kinetic = kinetic_phases(&axis, h);
    let g = interaction_strength(params);
    let mut phases = PotentialPhases::new(
        axis,
        grid.contact.sector_profile(g, axis.dx, params.symmetry),
    );
    let layout_mid = |s: usize| schedule.trap_positions((s as f64 + 0.5) * h);

    let mut psi = initial.clone();
    psi.t = 0.0;
    let frame_count = steps / stride + 1;
    if let Some(sink) = sink.as_deref_mut() {
        sink.begin(&FrameHeader {
            points_per_axis: n as u32,
            x_min: axis.x_min,
            x_max: axis.x_max(),
            frame_count: frame_count as u32,
            frame_dt: h * stride as f64,
            symmetry: params.symmetry,
        })?;
        sink.push(&psi.amplitudes)?;
    }
    let mut frames = Vec::with_capacity(frame_count);
    frames.push(frame_diagnostics(
        &psi,
        &schedule.trap_positions(0.0)?,
        initial.symmetry_error(),
        options,
    )?);

    let mut current = layout_mid(0)?;
    phases.fill(&[(&current, 0.5 * h)]);
    potential_pass(&mut psi.amplitudes, n, &phases.q, &phases.c, sign);

    for s in 0..steps {
        spectral.apply_separable_kspace(&mut psi.amplitudes, &kinetic);
        let at_frame = (s + 1) % stride == 0;
        if at_frame {
            let asymmetry = psi.symmetry_error();
            phases.fill(&[(&current, 0.5 * h)]);
            potential_pass(&mut psi.amplitudes, n, &phases.q, &phases.c, sign);
            psi.t = (s + 1) as f64 * h;
            if let Some(sink) = sink.as_deref_mut() {
                sink.push(&psi.amplitudes)?;
            }
            let diag =
                frame_diagnostics(&psi, &schedule.trap_positions(psi.t)?, asymmetry, options)?;
            let drift = (diag.norm - norm0).abs();
            if !diag.norm.is_finite() || drift > NORM_ABORT {
                return Err(Error::numerical(format!(
                    "norm drift {drift:.3e} at t = {:.3}",
                    psi.t
                )));
            }
            frames.push(diag);
            if s + 1 < steps {
                current = layout_mid(s + 1)?;
                phases.fill(&[(&current, 0.5 * h)]);
                potential_pass(&mut psi.amplitudes, n, &phases.q, &phases.c, sign);
            }
        } else {
            let next = layout_mid(s + 1)?;
            phases.fill(&[(&current, 0.5 * h), (&next, 0.5 * h)]);
            potential_pass(&mut psi.amplitudes, n, &phases.q, &phases.c, sign);
            current = next;
        }
    }
    if let Some(sink) = sink {
        sink.finish()?;
    }
    psi.t = total;

    let fold = |f: fn(&FrameDiagnostics) -> f64| frames.iter().map(f).fold(0.0, f64::max);
    let max_boundary = fold(|d| d.boundary);
    let diagnostics = Diagnostics {
        steps,
        dt: h,
        frame_dt: h * stride as f64,
        frame_count,
        norm_drift: frames
            .iter()
            .map(|d| (d.norm - norm0).abs())
            .fold(0.0, f64::max),
        symmetry_error: fold(|d| d.asymmetry),
        max_middle_population: fold(|d| d.hole_populations[1]),
        max_counterdiagonal_population: fold(|d| d.counterdiagonal),
        max_boundary_population: max_boundary,
        leakage_warning: max_boundary > LEAKAGE_THRESHOLD,
    };
    if diagnostics.leakage_warning {
        log::warn!("boundary population reached {max_boundary:.3e}");
    }
    Ok(Evolution {
        final_state: psi,
        diagnostics,
        frames,
    })
}
