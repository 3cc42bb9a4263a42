//! Reduced three-state description of the hole: the hole sits in the left,
//! middle or right trap and hops with the single-atom tunneling rates.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hopping::{norm_sqr, HoppingStepper};
use crate::model::{tunneling_rate, TrapSchedule};

/// Largest allowed dt·J̃_max for the fixed-step integrator.
pub const MAX_STEP_COUPLING: f64 = 0.05;
/// Norm drift that aborts a propagation.
pub const NORM_DRIFT_LIMIT: f64 = 1e-8;

/// Hole amplitudes over {hole left, hole middle, hole right}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoleAmplitudes(pub [Complex64; 3]);

impl HoleAmplitudes {
    pub fn localized(site: usize) -> Result<Self> {
        if !(1..=3).contains(&site) {
            return Err(Error::domain(format!(
                "hole site must be 1, 2 or 3, got {site}"
            )));
        }
        let mut c = [Complex64::new(0.0, 0.0); 3];
        c[site - 1] = Complex64::new(1.0, 0.0);
        Ok(Self(c))
    }

    pub fn populations(&self) -> [f64; 3] {
        self.0.map(|z| z.norm_sqr())
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.0)
    }

    /// |⟨self|other⟩|².
    pub fn overlap(&self, other: &HoleAmplitudes) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm_sqr()
    }
}

/// Mixing angle Θ ∈ [0, π/2] with tan Θ = J̃₁/J̃₂.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct MixingAngle(f64);

impl MixingAngle {
    pub fn new(theta: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return Err(Error::OutOfRange {
                what: "theta",
                value: theta,
                min: 0.0,
                max: FRAC_PI_2,
            });
        }
        Ok(Self(theta))
    }

    /// atan2 keeps Θ defined when J̃₂ vanishes. Both rates zero gives Θ = 0.
    pub fn from_rates(j1: f64, j2: f64) -> Self {
        Self(j1.max(0.0).atan2(j2.max(0.0)))
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

fn check_rate(name: &str, j: f64) -> Result<()> {
    if j >= 0.0 && j.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{name} must be a non-negative rate, got {j}"
        )))
    }
}

/// Hole Hamiltonian in the localized basis (ħ = 1): zero diagonal, -J̃₁
/// between left and middle, -J̃₂ between middle and right.
pub fn hole_hamiltonian3(j1: f64, j2: f64) -> Result<[[f64; 3]; 3]> {
    check_rate("j1", j1)?;
    check_rate("j2", j2)?;
    Ok([[0.0, -j1, 0.0], [-j1, 0.0, -j2], [0.0, -j2, 0.0]])
}

/// Zero-energy eigenvector cos Θ |left⟩ - sin Θ |right⟩.
pub fn dark_state(theta: MixingAngle) -> HoleAmplitudes {
    let (s, c) = theta.0.sin_cos();
    HoleAmplitudes([
        Complex64::new(c, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(-s, 0.0),
    ])
}

/// Hole tunneling rates (J̃₁, J̃₂) at time `t` of a schedule.
pub fn rates_at(schedule: &TrapSchedule, t: f64) -> Result<[f64; 2]> {
    let [d1, d2] = schedule.distances_at(t);
    Ok([tunneling_rate(d1)?, tunneling_rate(d2)?])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThreeLevelSample {
    pub t: f64,
    pub populations: [f64; 3],
    pub j1: f64,
    pub j2: f64,
    pub theta: f64,
    /// |⟨D(Θ(t))|c(t)⟩|².
    pub dark_overlap: f64,
}

#[derive(Debug, Clone)]
pub struct ThreeLevelRun {
    pub samples: Vec<ThreeLevelSample>,
    pub final_amplitudes: HoleAmplitudes,
    pub steps: usize,
    pub dt: f64,
    pub norm_drift: f64,
}

impl ThreeLevelRun {
    pub fn max_middle_population(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.populations[1])
            .fold(0.0, f64::max)
    }

    /// CSV with columns t, p1, p2, p3, J1, J2, theta.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,p1,p2,p3,J1,J2,theta")?;
        for s in &self.samples {
            writeln!(
                out,
                "{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                s.t, s.populations[0], s.populations[1], s.populations[2], s.j1, s.j2, s.theta
            )?;
        }
        Ok(())
    }
}

/// Largest hole tunneling rate reached over the schedule, sampled finely
/// enough to resolve ramps, jitter and the hold plateau.
fn max_rates(schedule: &TrapSchedule) -> Result<[f64; 2]> {
    let total = schedule.total_duration();
    let mut step = 0.05f64;
    if let Some(j) = schedule.jitter {
        if j.omega_s.abs() > 0.0 {
            step = step.min(0.05 / j.omega_s.abs());
        }
    }
    let n = ((total / step).ceil() as usize).max(1);
    let mut min_d = [f64::INFINITY; 2];
    for k in 0..=n {
        let d = schedule.distances_at(total * k as f64 / n as f64);
        min_d[0] = min_d[0].min(d[0]);
        min_d[1] = min_d[1].min(d[1]);
    }
    if schedule.jitter.is_none() && schedule.t_ramp > 0.0 {
        min_d = [min_d[0].min(schedule.d_min), min_d[1].min(schedule.d_min)];
    }
    Ok([tunneling_rate(min_d[0])?, tunneling_rate(min_d[1])?])
}

/// J̃_max · t_delay with J̃_max² = (J̃₁)²_max + (J̃₂)²_max.
pub fn adiabaticity_margin(schedule: &TrapSchedule) -> Result<f64> {
    let [a, b] = max_rates(schedule)?;
    Ok((a * a + b * b).sqrt() * schedule.t_delay)
}

/// Integrates the three-state hole model along `schedule`, recording every
/// `sample_every`-th step (the first and last steps are always recorded).
pub fn propagate_amplitudes(
    schedule: &TrapSchedule,
    initial: HoleAmplitudes,
    dt: f64,
    sample_every: usize,
) -> Result<ThreeLevelRun> {
    schedule.validate()?;
    if !(dt > 0.0) {
        return Err(Error::domain("dt must be positive"));
    }
    let [ja, jb] = max_rates(schedule)?;
    if dt * ja.max(jb) > MAX_STEP_COUPLING {
        return Err(Error::precondition(format!(
            "dt·J_max = {:.3e} exceeds {MAX_STEP_COUPLING}",
            dt * ja.max(jb)
        )));
    }
    let norm0 = initial.norm_sqr();
    if (norm0 - 1.0).abs() > 1e-10 {
        return Err(Error::precondition(
            "initial hole amplitudes must be normalized",
        ));
    }

    let total = schedule.total_duration();
    let steps = ((total / dt).ceil() as usize).max(1);
    let h = total / steps as f64;
    let sample_every = sample_every.max(1);

    let mut c = initial.0;
    let mut stepper = HoppingStepper::new(3);
    let mut rates = |t: f64, out: &mut [f64]| {
        // the formula is finite for every positive distance the schedule can produce
        let [d1, d2] = schedule.distances_at(t);
        out[0] = tunneling_rate(d1).unwrap_or(0.0);
        out[1] = tunneling_rate(d2).unwrap_or(0.0);
    };
    let mut samples = Vec::with_capacity(steps / sample_every + 2);
    let record = |t: f64, c: &[Complex64; 3], samples: &mut Vec<ThreeLevelSample>| -> Result<()> {
        let [j1, j2] = rates_at(schedule, t)?;
        let theta = MixingAngle::from_rates(j1, j2);
        let amps = HoleAmplitudes(*c);
        samples.push(ThreeLevelSample {
            t,
            populations: amps.populations(),
            j1,
            j2,
            theta: theta.radians(),
            dark_overlap: dark_state(theta).overlap(&amps),
        });
        Ok(())
    };

    record(0.0, &c, &mut samples)?;
    let mut norm_drift = 0.0f64;
    for k in 0..steps {
        let t = k as f64 * h;
        stepper.step(&mut c, t, h, &mut rates);
        let drift = (norm_sqr(&c) - norm0).abs();
        norm_drift = norm_drift.max(drift);
        if drift > NORM_DRIFT_LIMIT {
            return Err(Error::numerical(format!(
                "three-level norm drift {drift:.3e} at t = {:.3}",
                t + h
            )));
        }
        if (k + 1) % sample_every == 0 || k + 1 == steps {
            record((k + 1) as f64 * h, &c, &mut samples)?;
        }
    }

    Ok(ThreeLevelRun {
        samples,
        final_amplitudes: HoleAmplitudes(c),
        steps,
        dt: h,
        norm_drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn apply(h: &[[f64; 3]; 3], v: &HoleAmplitudes) -> [Complex64; 3] {
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i] += h[i][j] * v.0[j];
            }
        }
        out
    }

    #[test]
    fn hamiltonian_rejects_negative_rates() {
        assert!(hole_hamiltonian3(-0.1, 0.2).is_err());
        assert!(hole_hamiltonian3(0.1, f64::NAN).is_err());
    }

    #[test]
    fn zero_rates_give_zero_matrix() {
        let h = hole_hamiltonian3(0.0, 0.0).unwrap();
        assert!(h.iter().flatten().all(|&x| x == 0.0));
    }

    #[test]
    fn dark_state_limits() {
        let d0 = dark_state(MixingAngle::new(0.0).unwrap());
        assert_eq!(d0.populations(), [1.0, 0.0, 0.0]);
        let d90 = dark_state(MixingAngle::new(FRAC_PI_2).unwrap());
        assert!((d90.0[2].re + 1.0).abs() < 1e-15);
        assert!(d90.0[0].norm() < 1e-15);
        let d45 = dark_state(MixingAngle::new(FRAC_PI_4).unwrap());
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((d45.0[0].re - r).abs() < 1e-15 && (d45.0[2].re + r).abs() < 1e-15);
        let hv = apply(&hole_hamiltonian3(0.3, 0.3).unwrap(), &d45);
        assert!(hv.iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn mixing_angle_range() {
        assert!(MixingAngle::new(-0.1).is_err());
        assert!(MixingAngle::new(2.0).is_err());
        assert_eq!(MixingAngle::from_rates(0.0, 0.5).radians(), 0.0);
        assert_eq!(MixingAngle::from_rates(0.5, 0.0).radians(), FRAC_PI_2);
    }

    #[test]
    fn margin_scales_with_delay() {
        let s = TrapSchedule::default();
        let m1 = adiabaticity_margin(&s).unwrap();
        let s2 = TrapSchedule {
            t_delay: 2.0 * s.t_delay,
            ..s
        };
        let m2 = adiabaticity_margin(&s2).unwrap();
        assert!((m2 / m1 - 2.0).abs() < 1e-12);
        assert!(m1 > 10.0);
    }

    #[test]
    fn margin_vanishes_without_approach() {
        let s = TrapSchedule {
            d_min: 9.0,
            ..TrapSchedule::default()
        };
        assert!(adiabaticity_margin(&s).unwrap() < 1e-25);
    }

    #[test]
    fn step_size_guard() {
        let s = TrapSchedule::default();
        let init = HoleAmplitudes::localized(1).unwrap();
        assert!(matches!(
            propagate_amplitudes(&s, init, 1.0, 1),
            Err(Error::Precondition(_))
        ));
    }
}
