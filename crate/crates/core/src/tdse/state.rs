use std::f64::consts::PI;

use nalgebra::{Matrix3, SymmetricEigen};
use num_complex::Complex64;

use super::grid::Axis;
use crate::error::{Error, Result};
use crate::model::{Symmetry, TrapLayout};

/// Smallest trap distance for which isolated-well product states are used.
pub const MIN_PRODUCT_STATE_DISTANCE: f64 = 8.0;

/// Two-atom amplitude ψ(x₁, x₂) on a square grid, stored row-major with
/// the x₁ index running slowest: `amplitudes[i1 * n + i2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction2D {
    pub axis: Axis,
    pub amplitudes: Vec<Complex64>,
    pub symmetry: Symmetry,
    pub t: f64,
}

/// Isolated-well ground state π^{-1/4} exp(-(x - center)²/2).
pub fn ground_state_value(x: f64, center: f64) -> f64 {
    let u = x - center;
    PI.powf(-0.25) * (-0.5 * u * u).exp()
}

/// Ground state of a single well sampled on an axis.
pub fn single_atom_ground(center: f64, axis: &Axis) -> Vec<f64> {
    axis.points()
        .map(|x| ground_state_value(x, center))
        .collect()
}

/// Occupied traps (1-based) for a hole on `site`, ordered as in the
/// localized hole basis: hole 1 → (2, 3), hole 2 → (3, 1), hole 3 → (1, 2).
pub fn occupied_traps(site: usize) -> Result<(usize, usize)> {
    match site {
        1 => Ok((2, 3)),
        2 => Ok((3, 1)),
        3 => Ok((1, 2)),
        _ => Err(Error::domain(format!(
            "hole site must be 1, 2 or 3, got {site}"
        ))),
    }
}

impl Wavefunction2D {
    pub fn zeros(axis: Axis, symmetry: Symmetry) -> Self {
        Self {
            axis,
            amplitudes: vec![Complex64::new(0.0, 0.0); axis.n * axis.n],
            symmetry,
            t: 0.0,
        }
    }

    /// (1/√2)[a(x₁)b(x₂) ± b(x₁)a(x₂)] with the sign fixed by the symmetry.
    pub fn from_orbitals(axis: Axis, a: &[f64], b: &[f64], symmetry: Symmetry) -> Self {
        let n = axis.n;
        let s = symmetry.exchange_sign();
        let mut amplitudes = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let v = std::f64::consts::FRAC_1_SQRT_2 * (a[i] * b[j] + s * b[i] * a[j]);
                amplitudes.push(Complex64::new(v, 0.0));
            }
        }
        Self {
            axis,
            amplitudes,
            symmetry,
            t: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.axis.n
    }

    pub(crate) fn cell(&self) -> f64 {
        self.axis.dx * self.axis.dx
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.cell()
    }

    pub fn normalize(&mut self) {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            let inv = 1.0 / norm;
            for z in &mut self.amplitudes {
                *z *= inv;
            }
        }
    }

    /// ⟨self|other⟩ as a grid sum.
    pub fn inner(&self, other: &Wavefunction2D) -> Result<Complex64> {
        if self.symmetry != other.symmetry {
            return Err(Error::SymmetryMismatch {
                left: self.symmetry,
                right: other.symmetry,
            });
        }
        if self.axis != other.axis {
            return Err(Error::domain("wavefunctions live on different grids"));
        }
        let sum: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(sum * self.cell())
    }

    /// Norm of the wrong-symmetry component, ½‖ψ - s·ψᵀ‖.
    pub fn symmetry_error(&self) -> f64 {
        let n = self.n();
        let s = self.symmetry.exchange_sign();
        let mut acc = 0.0;
        for i in 0..n {
            for j in i..n {
                let d = self.amplitudes[i * n + j] - s * self.amplitudes[j * n + i];
                let w = if i == j { 1.0 } else { 2.0 };
                acc += w * d.norm_sqr();
            }
        }
        0.5 * (acc * self.cell()).sqrt()
    }

    /// Probability inside the band |x₁ + x₂| ≤ `half_width`.
    pub fn counterdiagonal_population(&self, half_width: f64) -> f64 {
        let n = self.n();
        let mut acc = 0.0;
        for i in 0..n {
            let x1 = self.axis.x(i);
            for j in 0..n {
                if (x1 + self.axis.x(j)).abs() <= half_width {
                    acc += self.amplitudes[i * n + j].norm_sqr();
                }
            }
        }
        acc * self.cell()
    }

    /// Probability within the outer `fraction` of the domain on either axis.
    pub fn boundary_population(&self, fraction: f64) -> f64 {
        let n = self.n();
        let edge = ((fraction * n as f64).ceil() as usize).max(1);
        let outer = |i: usize| i < edge || i >= n - edge;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                if outer(i) || outer(j) {
                    acc += self.amplitudes[i * n + j].norm_sqr();
                }
            }
        }
        acc * self.cell()
    }

    /// Populations of the three hole configurations built from symmetrically
    /// orthogonalized single-well orbitals at the given layout. Unlike the raw
    /// product states these stay orthonormal when the traps overlap.
    pub fn hole_populations(&self, layout: &TrapLayout) -> Result<[f64; 3]> {
        let orbitals = lowdin_orbitals(&self.axis, layout)?;
        let n = self.n();
        // u[b][i] = Σ_j ψ_ij w_b(j)
        let mut u = [
            vec![Complex64::new(0.0, 0.0); n],
            vec![Complex64::new(0.0, 0.0); n],
            vec![Complex64::new(0.0, 0.0); n],
        ];
        for i in 0..n {
            let row = &self.amplitudes[i * n..(i + 1) * n];
            for (b, w) in orbitals.iter().enumerate() {
                u[b][i] = row.iter().zip(w).map(|(z, wj)| z * wj).sum();
            }
        }
        let amp = |a: usize, b: usize| -> Complex64 {
            orbitals[a]
                .iter()
                .zip(&u[b])
                .map(|(w, z)| w * z)
                .sum::<Complex64>()
                * self.cell()
        };
        let s = self.symmetry.exchange_sign();
        let mut pops = [0.0; 3];
        for (site, p) in pops.iter_mut().enumerate() {
            let (a, b) = occupied_traps(site + 1)?;
            let v = (amp(a - 1, b - 1) + s * amp(b - 1, a - 1)) * std::f64::consts::FRAC_1_SQRT_2;
            *p = v.norm_sqr();
        }
        Ok(pops)
    }

    /// Copy with amplitudes scaled and the time stamp kept.
    pub fn with_amplitudes(&self, amplitudes: Vec<Complex64>) -> Self {
        Self {
            amplitudes,
            ..self.clone()
        }
    }
}

/// Symmetrically (Löwdin) orthonormalized Gaussian orbitals for the three
/// traps: W = G S^{-1/2} with S the grid overlap matrix.
fn lowdin_orbitals(axis: &Axis, layout: &TrapLayout) -> Result<[Vec<f64>; 3]> {
    let c = layout.centers();
    if c.len() != 3 {
        return Err(Error::domain("hole populations need a three-trap layout"));
    }
    let g: Vec<Vec<f64>> = c.iter().map(|&x0| single_atom_ground(x0, axis)).collect();
    let mut s = Matrix3::zeros();
    for a in 0..3 {
        for b in 0..3 {
            s[(a, b)] = g[a].iter().zip(&g[b]).map(|(p, q)| p * q).sum::<f64>() * axis.dx;
        }
    }
    let eig = SymmetricEigen::new(s);
    if eig.eigenvalues.iter().any(|&l| !(l > 1e-12)) {
        return Err(Error::numerical("trap orbitals are linearly dependent"));
    }
    let inv_sqrt = eig.eigenvectors
        * Matrix3::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()))
        * eig.eigenvectors.transpose();
    let mut w = [vec![0.0; axis.n], vec![0.0; axis.n], vec![0.0; axis.n]];
    for (b, wb) in w.iter_mut().enumerate() {
        for (i, x) in wb.iter_mut().enumerate() {
            *x = (0..3).map(|a| g[a][i] * inv_sqrt[(a, b)]).sum();
        }
    }
    Ok(w)
}

/// Two atoms in the ground states of the traps not holding the hole,
/// (anti)symmetrized and normalized on the grid.
pub fn localized_hole_state(
    hole_site: usize,
    layout: &TrapLayout,
    symmetry: Symmetry,
    axis: &Axis,
) -> Result<Wavefunction2D> {
    if layout.len() != 3 {
        return Err(Error::domain(
            "localized hole states are defined for three traps",
        ));
    }
    if let Some(d) = layout
        .distances()
        .into_iter()
        .find(|&d| d < MIN_PRODUCT_STATE_DISTANCE)
    {
        return Err(Error::precondition(format!(
            "traps {d:.3} apart overlap; product states need distances ≥ {MIN_PRODUCT_STATE_DISTANCE}"
        )));
    }
    let (a, b) = occupied_traps(hole_site)?;
    let c = layout.centers();
    let phi_a = single_atom_ground(c[a - 1], axis);
    let phi_b = single_atom_ground(c[b - 1], axis);
    let mut psi = Wavefunction2D::from_orbitals(*axis, &phi_a, &phi_b, symmetry);
    psi.normalize();
    Ok(psi)
}

/// |⟨φ_target|ψ⟩|² against the localized hole state on `target_hole_site`.
pub fn fidelity(
    final_state: &Wavefunction2D,
    target_hole_site: usize,
    layout: &TrapLayout,
) -> Result<f64> {
    let target = localized_hole_state(
        target_hole_site,
        layout,
        final_state.symmetry,
        &final_state.axis,
    )?;
    Ok(target.inner(final_state)?.norm_sqr())
}

/// Fidelity against an explicit target; symmetry sectors must agree.
pub fn fidelity_to(final_state: &Wavefunction2D, target: &Wavefunction2D) -> Result<f64> {
    Ok(target.inner(final_state)?.norm_sqr())
}
