//! Strang-split spectral propagator on the two-atom grid.
//!
//! One step is e^{-iP dt/2} F⁻¹ e^{-iK dt} F e^{-iP dt/2}, where P holds the
//! trap potential of both atoms plus the contact term and K = (k₁² + k₂²)/2.
//! Both P and K factor into per-axis phases, so each pass is a single
//! multiply per grid point; adjacent potential half-steps are fused.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::Axis;

const TILE: usize = 32;

pub(crate) fn transpose_in_place(a: &mut [Complex64], n: usize) {
    for ib in (0..n).step_by(TILE) {
        let iend = (ib + TILE).min(n);
        for jb in (ib..n).step_by(TILE) {
            let jend = (jb + TILE).min(n);
            for i in ib..iend {
                let jstart = if ib == jb { i + 1 } else { jb };
                for j in jstart..jend {
                    a.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}

/// FFT plans and scratch for one square grid.
pub(crate) struct Spectral {
    pub n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl Spectral {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Self {
            n,
            fwd,
            inv,
            scratch: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    /// Unnormalized 2D transform; the result is left transposed
    /// (first index ↔ k₂). Kinetic factors are symmetric, so this is harmless.
    pub fn forward_t(&mut self, a: &mut [Complex64]) {
        self.fwd.process_with_scratch(a, &mut self.scratch);
        transpose_in_place(a, self.n);
        self.fwd.process_with_scratch(a, &mut self.scratch);
    }

    /// Inverse of [`Spectral::forward_t`] up to a factor n².
    pub fn inverse_t(&mut self, a: &mut [Complex64]) {
        self.inv.process_with_scratch(a, &mut self.scratch);
        transpose_in_place(a, self.n);
        self.inv.process_with_scratch(a, &mut self.scratch);
    }

    /// a ← F⁻¹ diag(f_i f_j) F a, with f carrying the 1/n normalization.
    pub fn apply_separable_kspace(&mut self, a: &mut [Complex64], f: &[Complex64]) {
        let n = self.n;
        self.forward_t(a);
        for (i, row) in a.chunks_exact_mut(n).enumerate() {
            let fi = f[i];
            for (z, fj) in row.iter_mut().zip(f) {
                *z *= fi * fj;
            }
        }
        self.inverse_t(a);
    }
}

/// Per-axis kinetic factor e^{-i dt k²/2}/n.
pub(crate) fn kinetic_phases(axis: &Axis, dt: f64) -> Vec<Complex64> {
    let inv_n = 1.0 / axis.n as f64;
    axis.wavenumbers()
        .into_iter()
        .map(|k| Complex64::from_polar(inv_n, -0.5 * dt * k * k))
        .collect()
}

/// Multiplies ψ_ij by q_i q_j c_{|i-j|} and projects onto the exchange
/// sector with sign `sign`. `contact` may be shorter than n; missing
/// offsets carry no interaction. The factor is symmetric in (i, j), so the
/// multiply itself cannot break exchange symmetry; the projection removes
/// the round-off asymmetry left by the transforms.
pub(crate) fn potential_pass(
    a: &mut [Complex64],
    n: usize,
    q: &[Complex64],
    contact: &[Complex64],
    sign: f64,
) {
    let factor = |i: usize, j: usize| {
        let mut f = q[i] * q[j];
        if let Some(c) = contact.get(j - i) {
            f *= c;
        }
        f
    };
    for ib in (0..n).step_by(TILE) {
        let iend = (ib + TILE).min(n);
        for jb in (ib..n).step_by(TILE) {
            let jend = (jb + TILE).min(n);
            for i in ib..iend {
                let jstart = if ib == jb { i + 1 } else { jb };
                for j in jstart..jend {
                    let f = factor(i, j);
                    let upper = a[i * n + j] * f;
                    let lower = a[j * n + i] * f;
                    let v = 0.5 * (upper + sign * lower);
                    a[i * n + j] = v;
                    a[j * n + i] = sign * v;
                }
            }
        }
    }
    for i in 0..n {
        let d = &mut a[i * n + i];
        *d = if sign < 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            *d * factor(i, i)
        };
    }
}
