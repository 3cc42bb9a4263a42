use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Symmetry, TrapSchedule};

/// Largest grid spacing that still resolves the unit-width ground state.
pub const MAX_SPACING: f64 = 0.2;
/// Margin, in ground-state widths, between the outermost trap and the edge.
pub const DOMAIN_MARGIN: f64 = 5.0;

/// Width of the default regularized contact interaction.
pub const DEFAULT_CONTACT_WIDTH: f64 = 0.25;

/// Discretization of the contact interaction g δ(x₁ - x₂).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContactKernel {
    /// g/Δx on the grid diagonal x₁ = x₂, zero elsewhere.
    GridDelta,
    /// Normalized Gaussian of width `sigma` in x₁ - x₂. The width is a
    /// length, so refining the grid does not change the interaction.
    Gaussian { sigma: f64 },
}

impl Default for ContactKernel {
    fn default() -> Self {
        ContactKernel::Gaussian {
            sigma: DEFAULT_CONTACT_WIDTH,
        }
    }
}

impl ContactKernel {
    /// Profile as seen by states of the given exchange symmetry. A contact
    /// interaction only scatters even relative-parity waves, so the
    /// regularized kernel is restricted to the symmetric sector and is
    /// exactly inert on antisymmetric states.
    pub fn sector_profile(&self, g: f64, dx: f64, symmetry: Symmetry) -> Vec<f64> {
        match symmetry {
            Symmetry::Fermionic => Vec::new(),
            Symmetry::Bosonic => self.profile(g, dx),
        }
    }

    /// Interaction energy U as a function of the index offset |i - j|.
    /// Entries beyond the returned length vanish.
    pub fn profile(&self, g: f64, dx: f64) -> Vec<f64> {
        match *self {
            ContactKernel::GridDelta => vec![g / dx],
            ContactKernel::Gaussian { sigma } => {
                let reach = (8.0 * sigma / dx).ceil() as usize;
                let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
                (0..=reach)
                    .map(|k| {
                        let r = k as f64 * dx;
                        g * norm * (-0.5 * r * r / (sigma * sigma)).exp()
                    })
                    .collect()
            }
        }
    }
}

/// One periodic axis: points x_i = x_min + i·Δx, i = 0..n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub x_min: f64,
    pub dx: f64,
    pub n: usize,
}

impl Axis {
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn x_max(&self) -> f64 {
        self.x_min + self.n as f64 * self.dx
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n as i64;
        let dk = 2.0 * std::f64::consts::PI / (self.n as f64 * self.dx);
        (0..n)
            .map(|i| if i < (n + 1) / 2 { i } else { i - n })
            .map(|m| m as f64 * dk)
            .collect()
    }
}

fn fft_friendly(mut n: usize) -> bool {
    if n < 8 || !n.is_multiple_of(2) {
        return false;
    }
    for p in [2, 3, 5] {
        while n.is_multiple_of(p) {
            n /= p;
        }
    }
    n == 1
}

/// Square configuration-space grid and time stepping parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub x_min: f64,
    pub x_max: f64,
    pub points_per_axis: usize,
    pub dt: f64,
    /// Steps between stored frames.
    pub frame_stride: usize,
    pub contact: ContactKernel,
}

impl Default for Grid2D {
    fn default() -> Self {
        Self {
            x_min: -16.0,
            x_max: 16.0,
            points_per_axis: 256,
            dt: 0.005,
            frame_stride: 100,
            contact: ContactKernel::default(),
        }
    }
}

impl Grid2D {
    pub fn axis(&self) -> Axis {
        Axis {
            x_min: self.x_min,
            dx: self.spacing(),
            n: self.points_per_axis,
        }
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / self.points_per_axis as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_max > self.x_min) || !self.x_min.is_finite() || !self.x_max.is_finite() {
            return Err(Error::config("x_max", "domain must satisfy x_min < x_max"));
        }
        if !fft_friendly(self.points_per_axis) {
            return Err(Error::config(
                "points_per_axis",
                format!(
                    "{} is not an even product of 2, 3 and 5 (≥ 8)",
                    self.points_per_axis
                ),
            ));
        }
        if self.spacing() > MAX_SPACING {
            return Err(Error::config(
                "points_per_axis",
                format!("spacing {:.4} exceeds {MAX_SPACING}", self.spacing()),
            ));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("dt", "must be positive"));
        }
        if self.frame_stride == 0 {
            return Err(Error::config("frame_stride", "must be at least 1"));
        }
        if let ContactKernel::Gaussian { sigma } = self.contact {
            // narrower kernels are not resolved and lose their normalization
            if !(sigma >= self.spacing()) {
                return Err(Error::config(
                    "contact_width",
                    format!(
                        "Gaussian width {sigma} must be at least the grid spacing {:.4}",
                        self.spacing()
                    ),
                ));
            }
        }
        Ok(())
    }

    /// The domain must hold every trap the schedule can produce with a
    /// margin of five ground-state widths.
    pub fn check_covers(&self, schedule: &TrapSchedule) -> Result<()> {
        let reach = schedule.d_max + schedule.jitter.map(|j| j.amplitude.abs()).unwrap_or(0.0);
        if self.x_max < reach + DOMAIN_MARGIN || self.x_min > -reach - DOMAIN_MARGIN {
            return Err(Error::precondition(format!(
                "domain [{}, {}] does not cover traps at ±{reach} with a margin of {DOMAIN_MARGIN}",
                self.x_min, self.x_max
            )));
        }
        Ok(())
    }
}
