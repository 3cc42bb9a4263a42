use serde::Serialize;

use super::integrate::{TrajectoryEnsemble, TrajectoryFlag};
use crate::error::{Error, Result};
use crate::tdse::Wavefunction2D;

/// Coarse-graining used for total-variation comparisons.
pub const COARSE_CELLS: usize = 8;
/// Grid points with |ψ|² above this fraction of the peak define the
/// occupied region.
const REGION_THRESHOLD: f64 = 1e-4;
const REGION_PAD: f64 = 0.5;

/// Square box [lo, hi]² around everything where |ψ|² is non-negligible.
pub fn occupied_region(psi: &Wavefunction2D) -> (f64, f64) {
    let n = psi.n();
    let peak = psi
        .amplitudes
        .iter()
        .map(|a| a.norm_sqr())
        .fold(0.0, f64::max);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        for j in 0..n {
            if psi.amplitudes[i * n + j].norm_sqr() >= REGION_THRESHOLD * peak {
                for x in [psi.axis.x(i), psi.axis.x(j)] {
                    lo = lo.min(x);
                    hi = hi.max(x);
                }
            }
        }
    }
    if lo > hi {
        return (psi.axis.x_min, psi.axis.x_max());
    }
    (lo - REGION_PAD, hi + REGION_PAD)
}

/// Region snapped so that grid cells tile the coarse bins exactly: the
/// lower edge sits half a spacing below a grid point and each bin spans a
/// whole number of spacings.
fn aligned_region(psi: &Wavefunction2D, cells: usize) -> (f64, f64) {
    let (lo, hi) = occupied_region(psi);
    let dx = psi.axis.dx;
    let k = ((lo - psi.axis.x_min) / dx).floor();
    let lo = psi.axis.x_min + (k - 0.5) * dx;
    let per_bin = ((hi - lo) / (cells as f64 * dx)).ceil().max(1.0);
    (lo, lo + cells as f64 * per_bin * dx)
}

/// Bin index inside `cells × cells` over [lo, hi]², or the overflow bin.
fn bin(p: [f64; 2], lo: f64, hi: f64, cells: usize) -> usize {
    let w = (hi - lo) / cells as f64;
    let idx = |x: f64| {
        let u = (x - lo) / w;
        (u >= 0.0 && u < cells as f64).then_some(u as usize)
    };
    match (idx(p[0]), idx(p[1])) {
        (Some(a), Some(b)) => a * cells + b,
        _ => cells * cells,
    }
}

/// Total-variation distance between the empirical distribution of
/// `points` and |ψ|², both coarse-grained on `cells × cells` bins over the
/// occupied region of ψ plus one bin for everything outside it.
pub fn tv_distance(points: &[[f64; 2]], psi: &Wavefunction2D, cells: usize) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    if cells == 0 {
        return Err(Error::domain("coarse grid needs at least one cell"));
    }
    let (lo, hi) = aligned_region(psi, cells);
    let mut p = vec![0.0; cells * cells + 1];
    let mut q = vec![0.0; cells * cells + 1];
    let n = psi.n();
    let mut mass = 0.0;
    for i in 0..n {
        for j in 0..n {
            let w = psi.amplitudes[i * n + j].norm_sqr();
            q[bin([psi.axis.x(i), psi.axis.x(j)], lo, hi, cells)] += w;
            mass += w;
        }
    }
    if !(mass > 0.0) {
        return Err(Error::domain("reference state has zero norm"));
    }
    for &pt in points {
        p[bin(pt, lo, hi, cells)] += 1.0;
    }
    let count = points.len() as f64;
    Ok(0.5
        * p.iter()
            .zip(&q)
            .map(|(a, b)| (a / count - b / mass).abs())
            .sum::<f64>())
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FlagCounts {
    pub ok: usize,
    pub low_density_clipped: usize,
    pub left_domain: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleStatistics {
    pub count: usize,
    pub seed: u64,
    pub cells: usize,
    pub region: (f64, f64),
    /// Final positions against |ψ(T)|².
    pub tv_distance: f64,
    /// Median of all recorded |v| samples across trajectories and frames.
    pub median_speed: f64,
    pub max_speeds: Vec<f64>,
    pub crossing_times: Vec<Option<f64>>,
    pub crossers: usize,
    /// Median over crossers of the largest speed inside the counter-diagonal band.
    pub crosser_band_speed: f64,
    /// crosser_band_speed / median_speed
    pub speed_ratio: f64,
    pub flags: FlagCounts,
    pub quality_warning: bool,
}

pub fn ensemble_statistics(
    ens: &TrajectoryEnsemble,
    psi_final: &Wavefunction2D,
) -> Result<EnsembleStatistics> {
    if ens.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let tv = tv_distance(&ens.final_positions(), psi_final, COARSE_CELLS)?;
    let median_speed = median(ens.speeds.iter().flatten().copied().collect());
    let band: Vec<f64> = ens
        .crossing_times
        .iter()
        .zip(&ens.band_max_speed)
        .filter(|(c, _)| c.is_some())
        .map(|(_, &s)| s)
        .collect();
    let crossers = band.len();
    let crosser_band_speed = median(band);
    let count = |f: TrajectoryFlag| ens.flags.iter().filter(|&&x| x == f).count();
    Ok(EnsembleStatistics {
        count: ens.len(),
        seed: ens.seed,
        cells: COARSE_CELLS,
        region: aligned_region(psi_final, COARSE_CELLS),
        tv_distance: tv,
        median_speed,
        max_speeds: ens.max_speed.clone(),
        crossing_times: ens.crossing_times.clone(),
        crossers,
        crosser_band_speed,
        speed_ratio: crosser_band_speed / median_speed,
        flags: FlagCounts {
            ok: count(TrajectoryFlag::Ok),
            low_density_clipped: count(TrajectoryFlag::LowDensityClipped),
            left_domain: count(TrajectoryFlag::LeftDomain),
        },
        quality_warning: ens.quality_warning,
    })
}
