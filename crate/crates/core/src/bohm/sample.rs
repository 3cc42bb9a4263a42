use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::field::VelocityField;
use crate::error::{Error, Result};
use crate::tdse::Wavefunction2D;

/// Rejection sampling gives up below this acceptance rate.
pub const MIN_ACCEPTANCE: f64 = 1e-4;
const MIN_TRIALS_BEFORE_GIVING_UP: u64 = 1_000_000;

/// `count` points distributed per the bilinear interpolant of |ψ|², drawn
/// by rejection against max|ψ|² with a seeded ChaCha8 stream.
pub fn sample_initial(psi: &Wavefunction2D, count: usize, seed: u64) -> Result<Vec<[f64; 2]>> {
    if count == 0 {
        return Err(Error::domain("trajectory count must be positive"));
    }
    let field = VelocityField::from_state(psi);
    let peak = psi
        .amplitudes
        .iter()
        .map(|a| a.norm_sqr())
        .fold(0.0, f64::max);
    if !(peak > 0.0) || !peak.is_finite() {
        return Err(Error::SamplerFailure {
            rate: 0.0,
            trials: 0,
        });
    }
    let axis = psi.axis;
    let lo = axis.x_min;
    let span = axis.x(axis.n - 1) - lo;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut trials: u64 = 0;
    while out.len() < count {
        trials += 1;
        let p = [lo + span * rng.gen::<f64>(), lo + span * rng.gen::<f64>()];
        let u: f64 = rng.gen();
        let rho = field.density(p).unwrap_or(0.0);
        if u * peak < rho {
            out.push(p);
        }
        if trials >= MIN_TRIALS_BEFORE_GIVING_UP {
            let rate = out.len() as f64 / trials as f64;
            if rate < MIN_ACCEPTANCE {
                return Err(Error::SamplerFailure { rate, trials });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Symmetry, TrapLayout};
    use crate::tdse::{localized_hole_state, Axis};
    use num_complex::Complex64;

    fn axis() -> Axis {
        Axis {
            x_min: -16.0,
            dx: 0.125,
            n: 256,
        }
    }

    #[test]
    fn uniform_box_mean() {
        let ax = axis();
        let mut psi = Wavefunction2D::zeros(ax, Symmetry::Bosonic);
        let (a, b) = (-6.0, 2.0);
        for i in 0..ax.n {
            for j in 0..ax.n {
                if (a..=b).contains(&ax.x(i)) && (a..=b).contains(&ax.x(j)) {
                    psi.amplitudes[i * ax.n + j] = Complex64::new(1.0, 0.0);
                }
            }
        }
        psi.normalize();
        let n = 10_000;
        let pts = sample_initial(&psi, n, 3).unwrap();
        let sigma = (b - a) / 12f64.sqrt() / (n as f64).sqrt();
        for k in 0..2 {
            let mean = pts.iter().map(|p| p[k]).sum::<f64>() / n as f64;
            assert!(
                (mean - (a + b) / 2.0).abs() < 3.0 * sigma,
                "axis {k}: {mean}"
            );
        }
    }

    #[test]
    fn fermions_avoid_diagonal() {
        let ax = axis();
        let psi = localized_hole_state(
            1,
            &TrapLayout::three(9.0, 9.0).unwrap(),
            Symmetry::Fermionic,
            &ax,
        )
        .unwrap();
        let pts = sample_initial(&psi, 4000, 11).unwrap();
        assert!(pts.iter().all(|p| (p[0] - p[1]).abs() > ax.dx));
    }

    #[test]
    fn deterministic_and_count_checked() {
        let ax = axis();
        let psi = localized_hole_state(
            3,
            &TrapLayout::three(9.0, 9.0).unwrap(),
            Symmetry::Bosonic,
            &ax,
        )
        .unwrap();
        assert_eq!(
            sample_initial(&psi, 50, 7).unwrap(),
            sample_initial(&psi, 50, 7).unwrap()
        );
        assert_ne!(
            sample_initial(&psi, 50, 7).unwrap(),
            sample_initial(&psi, 50, 8).unwrap()
        );
        assert!(sample_initial(&psi, 0, 7).is_err());
    }

    #[test]
    fn pathological_state_fails() {
        let ax = axis();
        let mut psi = Wavefunction2D::zeros(ax, Symmetry::Bosonic);
        psi.amplitudes[0] = Complex64::new(1.0, 0.0);
        assert!(matches!(
            sample_initial(&psi, 10, 1),
            Err(Error::SamplerFailure { .. })
        ));
    }
}
