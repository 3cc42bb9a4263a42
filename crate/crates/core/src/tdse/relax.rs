//! Imaginary-time relaxation toward the lowest state of a symmetry sector.

use num_complex::Complex64;

use super::grid::{Axis, Grid2D};
use super::split_step::{potential_pass, Spectral};
use super::state::Wavefunction2D;
use crate::error::{Error, Result};
use crate::model::{interaction_strength, potential_value, PhysicalParams, TrapLayout};

#[derive(Debug, Clone)]
pub struct Relaxation {
    pub state: Wavefunction2D,
    /// ⟨H⟩ before the first iteration and after each one.
    pub energies: Vec<f64>,
}

fn potential_row(axis: &Axis, layout: &TrapLayout) -> Vec<f64> {
    axis.points().map(|x| potential_value(x, layout)).collect()
}

/// ⟨ψ|H|ψ⟩/⟨ψ|ψ⟩ for static traps.
pub fn energy(
    psi: &Wavefunction2D,
    layout: &TrapLayout,
    params: &PhysicalParams,
    grid: &Grid2D,
) -> Result<f64> {
    let axis = psi.axis;
    let n = axis.n;
    let k2: Vec<f64> = axis
        .wavenumbers()
        .into_iter()
        .map(|k| 0.5 * k * k)
        .collect();
    let mut spec = Spectral::new(n);
    let mut buf = psi.amplitudes.clone();
    spec.forward_t(&mut buf);
    let mut kin = 0.0;
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let w = buf[i * n + j].norm_sqr();
            kin += w * (k2[i] + k2[j]);
            total += w;
        }
    }
    if !(total > 0.0) {
        return Err(Error::numerical("zero wavefunction has no energy"));
    }
    let v = potential_row(&axis, layout);
    let contact = grid
        .contact
        .sector_profile(interaction_strength(params), axis.dx, psi.symmetry);
    let mut pot = 0.0;
    let mut norm = 0.0;
    for i in 0..n {
        for j in 0..n {
            let w = psi.amplitudes[i * n + j].norm_sqr();
            let u = contact.get(i.abs_diff(j)).copied().unwrap_or(0.0);
            pot += w * (v[i] + v[j] + u);
            norm += w;
        }
    }
    Ok(kin / total + pot / norm)
}

/// Normalized gradient flow e^{-Hτ} with symmetry projection each step.
pub fn imaginary_time_relax(
    initial: &Wavefunction2D,
    layout: &TrapLayout,
    params: &PhysicalParams,
    grid: &Grid2D,
    steps: usize,
    dtau: f64,
) -> Result<Relaxation> {
    grid.validate()?;
    if initial.axis != grid.axis() {
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
    if !(dtau > 0.0) {
        return Err(Error::domain("dtau must be positive"));
    }
    let axis = initial.axis;
    let n = axis.n;
    let sign = params.symmetry.exchange_sign();
    let mut spec = Spectral::new(n);
    let inv_n = 1.0 / n as f64;
    let kin: Vec<Complex64> = axis
        .wavenumbers()
        .into_iter()
        .map(|k| Complex64::new(inv_n * (-0.5 * dtau * k * k).exp(), 0.0))
        .collect();
    let q: Vec<Complex64> = potential_row(&axis, layout)
        .into_iter()
        .map(|v| Complex64::new((-0.5 * dtau * v).exp(), 0.0))
        .collect();
    let contact: Vec<Complex64> = grid
        .contact
        .sector_profile(interaction_strength(params), axis.dx, params.symmetry)
        .into_iter()
        .map(|u| Complex64::new((-0.5 * dtau * u).exp(), 0.0))
        .collect();

    let mut psi = initial.clone();
    psi.normalize();
    let mut energies = vec![energy(&psi, layout, params, grid)?];
    for _ in 0..steps {
        potential_pass(&mut psi.amplitudes, n, &q, &contact, sign);
        spec.apply_separable_kspace(&mut psi.amplitudes, &kin);
        potential_pass(&mut psi.amplitudes, n, &q, &contact, sign);
        psi.normalize();
        let err = psi.symmetry_error();
        if err > 1e-8 {
            return Err(Error::numerical(format!(
                "symmetry collapsed during relaxation ({err:.3e})"
            )));
        }
        energies.push(energy(&psi, layout, params, grid)?);
    }
    Ok(Relaxation {
        state: psi,
        energies,
    })
}
