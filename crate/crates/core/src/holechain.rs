//! Single hole on an odd chain of n traps: nearest-neighbour hopping,
//! the multi-site dark state and adiabatic hole transfer across the chain.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hopping::{norm_sqr, HoppingStepper};
use crate::model::tunneling_rate;

/// Hole hopping model on an odd chain; `couplings[i]` is J̃_{i+1} between
/// sites i+1 and i+2 (1-based site labels).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoleChainModel {
    couplings: Vec<f64>,
}

fn check_sites(n: usize) -> Result<()> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::domain(format!(
            "chain length must be odd and ≥ 3, got {n}"
        )));
    }
    Ok(())
}

impl HoleChainModel {
    pub fn new(couplings: Vec<f64>) -> Result<Self> {
        check_sites(couplings.len() + 1)?;
        if let Some(j) = couplings.iter().find(|j| !(**j >= 0.0 && j.is_finite())) {
            return Err(Error::domain(format!(
                "couplings must be non-negative, got {j}"
            )));
        }
        Ok(Self { couplings })
    }

    /// Couplings derived from trap distances through the tunneling formula.
    pub fn from_distances(distances: &[f64]) -> Result<Self> {
        let couplings = distances
            .iter()
            .map(|&d| tunneling_rate(d))
            .collect::<Result<Vec<_>>>()?;
        Self::new(couplings)
    }

    pub fn sites(&self) -> usize {
        self.couplings.len() + 1
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }
}

/// Dense hopping Hamiltonian: zero diagonal, -J̃_i on the i-th off-diagonal.
pub fn chain_hamiltonian(model: &HoleChainModel) -> Vec<Vec<f64>> {
    let n = model.sites();
    let mut h = vec![vec![0.0; n]; n];
    for (i, &j) in model.couplings.iter().enumerate() {
        h[i][i + 1] = -j;
        h[i + 1][i] = -j;
    }
    h
}

/// Unnormalized dark-state coefficients for site 2m-1, m = 1..(n+1)/2:
///
/// (-1)^{m+1} · Π_{j=1}^{m-1} J̃_{2m-2j-1} · Π_{j=0}^{(n-1)/2-m} J̃_{2m+2j}
///
/// with empty products equal to one. Even sites carry no amplitude.
fn dark_coefficients(couplings: &[f64]) -> Vec<f64> {
    let n = couplings.len() + 1;
    // 1-based access
    let jt = |i: usize| couplings[i - 1];
    let half = (n - 1) / 2;
    let mut coeffs = vec![0.0; n];
    for m in 1..=half + 1 {
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        let left: f64 = (1..m).map(|j| jt(2 * m - 2 * j - 1)).product();
        let right: f64 = if m <= half {
            (0..=half - m).map(|j| jt(2 * m + 2 * j)).product()
        } else {
            1.0
        };
        coeffs[2 * m - 2] = sign * left * right;
    }
    coeffs
}

/// Normalized zero-energy eigenvector supported on the odd sites.
pub fn multisite_dark_state(model: &HoleChainModel) -> Result<Vec<f64>> {
    let mut d = dark_coefficients(&model.couplings);
    let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::DegenerateDarkState);
    }
    for x in &mut d {
        *x /= norm;
    }
    Ok(d)
}

/// Gaussian pulse pair favouring first the even-index couplings and then
/// the odd-index ones. For n = 3 this is the counterintuitive ordering
/// (J̃₂ before J̃₁).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub sites: usize,
    pub j_peak: f64,
    /// 1/e half-width of each Gaussian envelope.
    pub width: f64,
    pub delay: f64,
    pub total: f64,
    /// Play the sequence backwards in time (odd couplings first).
    #[serde(default)]
    pub reversed: bool,
}

/// Builds the even-then-odd pulse schedule. The two envelope centers sit
/// symmetrically around the middle of `[0, total]`.
pub fn even_odd_pulse_schedule(
    sites: usize,
    j_peak: f64,
    width: f64,
    delay: f64,
    total: f64,
) -> Result<PulseSchedule> {
    check_sites(sites)?;
    if !(j_peak >= 0.0 && width > 0.0 && delay >= 0.0) {
        return Err(Error::domain(
            "pulse parameters must be non-negative with positive width",
        ));
    }
    if !(total > delay + width) {
        return Err(Error::precondition(format!(
            "total = {total} must exceed delay + width = {}",
            delay + width
        )));
    }
    Ok(PulseSchedule {
        sites,
        j_peak,
        width,
        delay,
        total,
        reversed: false,
    })
}

impl PulseSchedule {
    pub fn even_center(&self) -> f64 {
        0.5 * (self.total - self.delay)
    }

    pub fn odd_center(&self) -> f64 {
        0.5 * (self.total + self.delay)
    }

    pub fn time_reversed(&self) -> Self {
        Self {
            reversed: !self.reversed,
            ..*self
        }
    }

    fn envelope(&self, t: f64, center: f64) -> f64 {
        let u = (t - center) / self.width;
        self.j_peak * (-u * u).exp()
    }

    /// Fills the n - 1 couplings at time t (index i holds J̃_{i+1}).
    pub fn couplings_into(&self, t: f64, out: &mut [f64]) {
        let t = if self.reversed { self.total - t } else { t };
        let even = self.envelope(t, self.even_center());
        let odd = self.envelope(t, self.odd_center());
        for (i, j) in out.iter_mut().enumerate() {
            *j = if (i + 1) % 2 == 0 { even } else { odd };
        }
    }

    pub fn couplings(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.sites - 1];
        self.couplings_into(t, &mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainSample {
    pub t: f64,
    pub populations: Vec<f64>,
    /// |⟨D(t)|c(t)⟩|², `None` where the instantaneous dark state is degenerate.
    pub dark_overlap: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ChainRun {
    pub samples: Vec<ChainSample>,
    pub final_amplitudes: Vec<Complex64>,
    pub dt: f64,
    pub norm_drift: f64,
}

impl ChainRun {
    pub fn final_populations(&self) -> Vec<f64> {
        self.final_amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    /// CSV with columns t, p1..pn, dark_overlap.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let n = self.final_amplitudes.len();
        let cols: Vec<String> = (1..=n).map(|i| format!("p{i}")).collect();
        writeln!(out, "t,{},dark_overlap", cols.join(","))?;
        for s in &self.samples {
            let pops: Vec<String> = s.populations.iter().map(|p| format!("{p:.12e}")).collect();
            let dark = s
                .dark_overlap
                .map(|d| format!("{d:.12e}"))
                .unwrap_or_default();
            writeln!(out, "{},{},{}", s.t, pops.join(","), dark)?;
        }
        Ok(())
    }
}

/// Integrates i dc/dt = H(t) c over [0, duration] for time-dependent
/// couplings supplied by `couplings(t, out)`.
pub fn propagate_chain<F>(
    sites: usize,
    mut couplings: F,
    initial: &[Complex64],
    duration: f64,
    dt: f64,
    sample_every: usize,
) -> Result<ChainRun>
where
    F: FnMut(f64, &mut [f64]),
{
    check_sites(sites)?;
    if initial.len() != sites {
        return Err(Error::domain(format!(
            "initial state has {} amplitudes for {sites} sites",
            initial.len()
        )));
    }
    if !(dt > 0.0 && duration >= 0.0) {
        return Err(Error::domain(
            "dt must be positive and duration non-negative",
        ));
    }
    let norm0 = norm_sqr(initial);
    let steps = ((duration / dt).ceil() as usize).max(1);
    let h = duration / steps as f64;
    let sample_every = sample_every.max(1);

    let mut c = initial.to_vec();
    let mut stepper = HoppingStepper::new(sites);
    let mut j = vec![0.0; sites - 1];
    let mut samples = Vec::new();
    let record = |t: f64, c: &[Complex64], j: &mut Vec<f64>, couplings: &mut F| {
        couplings(t, j);
        let dark_overlap = HoleChainModel::new(j.clone())
            .ok()
            .and_then(|m| multisite_dark_state(&m).ok())
            .map(|d| {
                d.iter()
                    .zip(c)
                    .map(|(a, b)| a * b)
                    .sum::<Complex64>()
                    .norm_sqr()
            });
        ChainSample {
            t,
            populations: c.iter().map(|z| z.norm_sqr()).collect(),
            dark_overlap,
        }
    };

    samples.push(record(0.0, &c, &mut j, &mut couplings));
    let mut norm_drift = 0.0f64;
    for k in 0..steps {
        stepper.step(&mut c, k as f64 * h, h, &mut couplings);
        let drift = (norm_sqr(&c) - norm0).abs();
        norm_drift = norm_drift.max(drift);
        if drift > crate::threelevel::NORM_DRIFT_LIMIT {
            return Err(Error::numerical(format!("chain norm drift {drift:.3e}")));
        }
        if (k + 1) % sample_every == 0 || k + 1 == steps {
            samples.push(record((k + 1) as f64 * h, &c, &mut j, &mut couplings));
        }
    }
    Ok(ChainRun {
        samples,
        final_amplitudes: c,
        dt: h,
        norm_drift,
    })
}

/// Runs a pulse schedule starting from the hole on the first site
/// (or the last one, for a time-reversed schedule).
pub fn propagate_pulses(
    schedule: &PulseSchedule,
    dt: f64,
    sample_every: usize,
) -> Result<ChainRun> {
    let n = schedule.sites;
    let mut init = vec![Complex64::new(0.0, 0.0); n];
    let start = if schedule.reversed { n - 1 } else { 0 };
    init[start] = Complex64::new(1.0, 0.0);
    propagate_chain(
        n,
        |t, out: &mut [f64]| schedule.couplings_into(t, out),
        &init,
        schedule.total,
        dt,
        sample_every,
    )
}
