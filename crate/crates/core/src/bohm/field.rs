use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tdse::{Axis, Wavefunction2D};

/// Below this |ψ|² the phase gradient is considered undefined.
pub const DENSITY_FLOOR: f64 = 1e-12;

/// ψ and its two partial derivatives on the grid, ready for bilinear lookup.
#[derive(Debug, Clone)]
pub struct VelocityField {
    axis: Axis,
    psi: Vec<Complex64>,
    d1: Vec<Complex64>,
    d2: Vec<Complex64>,
    floor: f64,
}

impl VelocityField {
    /// Fourth-order centered differences with periodic wrap (the grid is
    /// periodic for the kinetic step as well).
    pub fn new(axis: Axis, psi: &[Complex64], floor: f64) -> Self {
        let n = axis.n;
        assert_eq!(psi.len(), n * n, "frame size does not match the axis");
        let c = 1.0 / (12.0 * axis.dx);
        let wrap = |i: usize, k: isize| (i as isize + k).rem_euclid(n as isize) as usize;
        let mut d1 = vec![Complex64::new(0.0, 0.0); n * n];
        let mut d2 = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                let at = |a: usize, b: usize| psi[a * n + b];
                d1[i * n + j] = c
                    * (at(wrap(i, -2), j) - 8.0 * at(wrap(i, -1), j) + 8.0 * at(wrap(i, 1), j)
                        - at(wrap(i, 2), j));
                d2[i * n + j] = c
                    * (at(i, wrap(j, -2)) - 8.0 * at(i, wrap(j, -1)) + 8.0 * at(i, wrap(j, 1))
                        - at(i, wrap(j, 2)));
            }
        }
        Self {
            axis,
            psi: psi.to_vec(),
            d1,
            d2,
            floor,
        }
    }

    pub fn from_state(psi: &Wavefunction2D) -> Self {
        Self::new(psi.axis, &psi.amplitudes, DENSITY_FLOOR)
    }

    pub fn axis(&self) -> &Axis {
        &self.axis
    }

    /// Whether `p` lies where bilinear interpolation has all four corners.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let hi = self.axis.x(self.axis.n - 1);
        p.iter().all(|&x| x >= self.axis.x_min && x <= hi)
    }

    fn corners(&self, p: [f64; 2]) -> Option<([usize; 2], [f64; 2])> {
        if !self.contains(p) {
            return None;
        }
        let n = self.axis.n;
        let mut idx = [0usize; 2];
        let mut frac = [0.0; 2];
        for k in 0..2 {
            let u = (p[k] - self.axis.x_min) / self.axis.dx;
            let i = (u.floor() as usize).min(n - 2);
            idx[k] = i;
            frac[k] = u - i as f64;
        }
        Some((idx, frac))
    }

    fn lerp(&self, data: &[Complex64], idx: [usize; 2], f: [f64; 2]) -> Complex64 {
        let n = self.axis.n;
        let (i, j) = (idx[0], idx[1]);
        let a = data[i * n + j] * (1.0 - f[1]) + data[i * n + j + 1] * f[1];
        let b = data[(i + 1) * n + j] * (1.0 - f[1]) + data[(i + 1) * n + j + 1] * f[1];
        a * (1.0 - f[0]) + b * f[0]
    }

    /// Interpolated |ψ|², or `None` outside the grid.
    pub fn density(&self, p: [f64; 2]) -> Option<f64> {
        let (idx, f) = self.corners(p)?;
        Some(self.lerp(&self.psi, idx, f).norm_sqr())
    }

    /// Im(∇ψ/ψ) at `p`; `None` outside the grid or below the density floor.
    pub fn at(&self, p: [f64; 2]) -> Option<[f64; 2]> {
        let (idx, f) = self.corners(p)?;
        let psi = self.lerp(&self.psi, idx, f);
        let rho = psi.norm_sqr();
        if !(rho > self.floor) {
            return None;
        }
        let g1 = self.lerp(&self.d1, idx, f);
        let g2 = self.lerp(&self.d2, idx, f);
        // Im(g/ψ) = Im(g ψ*)/|ψ|²
        Some([(g1 * psi.conj()).im / rho, (g2 * psi.conj()).im / rho])
    }
}

/// One-off velocity lookup. Prefer [`VelocityField`] for repeated queries.
pub fn velocity_field(psi: &Wavefunction2D, at: [f64; 2]) -> Result<[f64; 2]> {
    let field = VelocityField::from_state(psi);
    if !field.contains(at) {
        return Err(Error::domain(format!(
            "point ({}, {}) is outside the grid",
            at[0], at[1]
        )));
    }
    field.at(at).ok_or_else(|| {
        Error::numerical(format!(
            "density at ({}, {}) is below the floor {DENSITY_FLOOR:e}",
            at[0], at[1]
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Symmetry, TrapLayout};
    use crate::tdse::localized_hole_state;

    fn axis() -> Axis {
        Axis {
            x_min: -8.0,
            dx: 0.125,
            n: 128,
        }
    }

    #[test]
    fn real_state_has_no_flow() {
        let layout = TrapLayout::three(9.0, 9.0).unwrap();
        let ax = Axis {
            x_min: -16.0,
            dx: 0.125,
            n: 256,
        };
        let psi = localized_hole_state(1, &layout, Symmetry::Fermionic, &ax).unwrap();
        let v = velocity_field(&psi, [0.3, 8.7]).unwrap();
        assert_eq!(v, [0.0, 0.0]);
    }

    #[test]
    fn plane_wave_gaussian() {
        let ax = axis();
        let (k1, k2) = (0.7, -1.3);
        let mut psi = Wavefunction2D::zeros(ax, Symmetry::Bosonic);
        for i in 0..ax.n {
            for j in 0..ax.n {
                let (x1, x2) = (ax.x(i), ax.x(j));
                let g = (-(x1 * x1 + x2 * x2) / 2.0).exp();
                psi.amplitudes[i * ax.n + j] = Complex64::from_polar(g, k1 * x1 + k2 * x2);
            }
        }
        let v = velocity_field(&psi, [0.0, 0.0]).unwrap();
        assert!((v[0] - k1).abs() < 1e-3, "{v:?}");
        assert!((v[1] - k2).abs() < 1e-3, "{v:?}");
    }

    #[test]
    fn exchange_covariance() {
        let ax = axis();
        let mut psi = Wavefunction2D::zeros(ax, Symmetry::Fermionic);
        let orb =
            |x: f64, c: f64, k: f64| Complex64::from_polar((-(x - c) * (x - c) / 2.0).exp(), k * x);
        for i in 0..ax.n {
            for j in 0..ax.n {
                let (x1, x2) = (ax.x(i), ax.x(j));
                psi.amplitudes[i * ax.n + j] = orb(x1, -1.0, 0.4) * orb(x2, 1.5, -0.9)
                    - orb(x2, -1.0, 0.4) * orb(x1, 1.5, -0.9);
            }
        }
        let field = VelocityField::from_state(&psi);
        for &(a, b) in &[(-1.2, 1.4), (0.33, 2.1), (-2.05, 0.7)] {
            let va = field.at([a, b]).unwrap();
            let vb = field.at([b, a]).unwrap();
            assert!((va[0] - vb[1]).abs() < 1e-12);
            assert!((va[1] - vb[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn low_density_and_outside() {
        let ax = axis();
        let psi = Wavefunction2D::zeros(ax, Symmetry::Bosonic);
        assert!(matches!(
            velocity_field(&psi, [0.0, 0.0]),
            Err(Error::NumericalFailure(_))
        ));
        assert!(matches!(
            velocity_field(&psi, [100.0, 0.0]),
            Err(Error::Domain(_))
        ));
    }
}
