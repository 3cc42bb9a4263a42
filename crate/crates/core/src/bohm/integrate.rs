use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::{VelocityField, DENSITY_FLOOR};
use crate::error::{Error, Result};
use crate::tdse::FrameSource;

/// Frames further apart than this are too coarse to interpolate in time.
pub const MAX_FRAME_DT: f64 = 0.5;
/// Fraction of flagged trajectories that triggers a quality warning.
const FLAGGED_WARNING_FRACTION: f64 = 0.01;
/// Hard cap on substeps per frame interval, to keep stuck trajectories cheap.
const MAX_SUBSTEPS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectoryFlag {
    Ok,
    LowDensityClipped,
    LeftDomain,
}

impl TrajectoryFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            TrajectoryFlag::Ok => "ok",
            TrajectoryFlag::LowDensityClipped => "low-density-clipped",
            TrajectoryFlag::LeftDomain => "left-domain",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BohmOptions {
    pub density_floor: f64,
    /// Step halvings tried near a node before the trajectory is flagged.
    pub max_halvings: u32,
    /// Largest displacement per substep, in grid spacings.
    pub max_displacement_cells: f64,
    /// Half-width of the counter-diagonal band |x₁ + x₂| ≤ w.
    pub band_halfwidth: f64,
}

impl Default for BohmOptions {
    fn default() -> Self {
        Self {
            density_floor: DENSITY_FLOOR,
            max_halvings: 8,
            max_displacement_cells: 0.5,
            band_halfwidth: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryEnsemble {
    pub seed: u64,
    /// Frame times; every trajectory is recorded at each of them.
    pub times: Vec<f64>,
    /// positions[trajectory][frame]
    pub positions: Vec<Vec<[f64; 2]>>,
    /// |v| at each recorded position.
    pub speeds: Vec<Vec<f64>>,
    pub flags: Vec<TrajectoryFlag>,
    /// Largest speed seen at any substep.
    pub max_speed: Vec<f64>,
    /// Largest substep speed while inside the counter-diagonal band.
    pub band_max_speed: Vec<f64>,
    /// First time x₁ + x₂ changed sign relative to the start.
    pub crossing_times: Vec<Option<f64>>,
    pub quality_warning: bool,
}

impl TrajectoryEnsemble {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions_at(&self, frame: usize) -> Vec<[f64; 2]> {
        self.positions.iter().map(|p| p[frame]).collect()
    }

    pub fn final_positions(&self) -> Vec<[f64; 2]> {
        self.positions
            .iter()
            .filter_map(|p| p.last().copied())
            .collect()
    }

    pub fn flagged(&self) -> usize {
        self.flags
            .iter()
            .filter(|&&f| f != TrajectoryFlag::Ok)
            .count()
    }

    /// Columns: trajectory_id, t, x1, x2, speed, flag.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "trajectory_id,t,x1,x2,speed,flag")?;
        for (id, (path, speeds)) in self.positions.iter().zip(&self.speeds).enumerate() {
            let flag = self.flags[id].as_str();
            for ((t, p), s) in self.times.iter().zip(path).zip(speeds) {
                writeln!(w, "{id},{t},{},{},{s},{flag}", p[0], p[1])?;
            }
        }
        Ok(())
    }
}

struct Walker {
    x: [f64; 2],
    flag: TrajectoryFlag,
    path: Vec<[f64; 2]>,
    speeds: Vec<f64>,
    max_speed: f64,
    band_max_speed: f64,
    start_side: f64,
    crossing: Option<f64>,
    frozen: bool,
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Velocity linearly interpolated in time between two frame fields.
struct Interval<'a> {
    f0: &'a VelocityField,
    f1: &'a VelocityField,
    t0: f64,
    span: f64,
}

impl Interval<'_> {
    fn velocity(&self, x: [f64; 2], t: f64) -> Option<[f64; 2]> {
        let s = ((t - self.t0) / self.span).clamp(0.0, 1.0);
        let a = self.f0.at(x)?;
        let b = self.f1.at(x)?;
        Some([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])])
    }
}

enum Attempt {
    Done([f64; 2]),
    Reject,
    Outside([f64; 2]),
}

fn rk4(iv: &Interval, x: [f64; 2], k1: [f64; 2], t: f64, h: f64, limit: f64) -> Attempt {
    let shift = |k: [f64; 2], c: f64| [x[0] + c * k[0], x[1] + c * k[1]];
    let inside = |p: [f64; 2]| iv.f0.contains(p);
    // A trial stage outside the grid is a real exit only if the current
    // velocity itself carries the point out; otherwise it is an oversized
    // step near a node and the step shrinks instead.
    let exit = || {
        let euler = shift(k1, h);
        if inside(euler) {
            Attempt::Reject
        } else {
            Attempt::Outside(euler)
        }
    };
    let p2 = shift(k1, 0.5 * h);
    if !inside(p2) {
        return exit();
    }
    let Some(k2) = iv.velocity(p2, t + 0.5 * h) else {
        return Attempt::Reject;
    };
    let p3 = shift(k2, 0.5 * h);
    if !inside(p3) {
        return exit();
    }
    let Some(k3) = iv.velocity(p3, t + 0.5 * h) else {
        return Attempt::Reject;
    };
    let p4 = shift(k3, h);
    if !inside(p4) {
        return exit();
    }
    let Some(k4) = iv.velocity(p4, t + h) else {
        return Attempt::Reject;
    };
    let d = [
        h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ];
    if norm(d) > limit || [k2, k3, k4].iter().any(|k| norm(*k) * h > 2.0 * limit) {
        return Attempt::Reject;
    }
    let next = [x[0] + d[0], x[1] + d[1]];
    if !inside(next) {
        return Attempt::Outside(next);
    }
    Attempt::Done(next)
}

impl Walker {
    fn new(x: [f64; 2]) -> Self {
        Self {
            x,
            flag: TrajectoryFlag::Ok,
            path: vec![x],
            speeds: Vec::new(),
            max_speed: 0.0,
            band_max_speed: 0.0,
            start_side: (x[0] + x[1]).signum(),
            crossing: None,
            frozen: false,
        }
    }

    fn note_speed(&mut self, v: [f64; 2], band: f64) {
        let s = norm(v);
        self.max_speed = self.max_speed.max(s);
        if (self.x[0] + self.x[1]).abs() <= band {
            self.band_max_speed = self.band_max_speed.max(s);
        }
    }

    fn clip(&mut self, flag: TrajectoryFlag) {
        if self.flag == TrajectoryFlag::Ok || flag == TrajectoryFlag::LeftDomain {
            self.flag = flag;
        }
    }

    fn advance(&mut self, iv: &Interval, opts: &BohmOptions) {
        let limit = opts.max_displacement_cells * iv.f0.axis().dx;
        let t_end = iv.t0 + iv.span;
        let mut t = iv.t0;
        let mut substeps = 0;
        while !self.frozen && t < t_end - 1e-12 * iv.span && substeps < MAX_SUBSTEPS {
            substeps += 1;
            let Some(k1) = iv.velocity(self.x, t) else {
                // Sitting on a node: wait for the next frame rather than jump.
                self.clip(TrajectoryFlag::LowDensityClipped);
                break;
            };
            self.note_speed(k1, opts.band_halfwidth);
            let speed = norm(k1);
            let mut h = t_end - t;
            if speed * h > limit {
                h = limit / speed;
            }
            let mut moved = false;
            for _ in 0..=opts.max_halvings {
                match rk4(iv, self.x, k1, t, h, limit) {
                    Attempt::Done(next) => {
                        self.record_crossing(next, t, h);
                        self.x = next;
                        t += h;
                        moved = true;
                        break;
                    }
                    Attempt::Outside(p) => {
                        let hi = iv.f0.axis().x(iv.f0.axis().n - 1);
                        let lo = iv.f0.axis().x_min;
                        self.x = [p[0].clamp(lo, hi), p[1].clamp(lo, hi)];
                        self.clip(TrajectoryFlag::LeftDomain);
                        self.frozen = true;
                        moved = true;
                        break;
                    }
                    Attempt::Reject => h *= 0.5,
                }
            }
            if !moved {
                self.clip(TrajectoryFlag::LowDensityClipped);
                break;
            }
        }
    }

    fn record_crossing(&mut self, next: [f64; 2], t: f64, h: f64) {
        if self.crossing.is_some() {
            return;
        }
        let (s0, s1) = (self.x[0] + self.x[1], next[0] + next[1]);
        if s1 * self.start_side < 0.0 {
            let frac = if s1 != s0 { s0 / (s0 - s1) } else { 1.0 };
            self.crossing = Some(t + frac.clamp(0.0, 1.0) * h);
        }
    }
}

fn read_field(
    src: &mut dyn FrameSource,
    buf: &mut [Complex64],
    floor: f64,
) -> Result<Option<VelocityField>> {
    if !src.next_frame(buf)? {
        return Ok(None);
    }
    Ok(Some(VelocityField::new(src.header().axis(), buf, floor)))
}

/// Integrates dx/dt = v(x, t) through every stored frame, streaming two
/// frames at a time. Trajectories are independent and run in parallel;
/// the result does not depend on the thread count.
pub fn integrate_trajectories(
    frames: &mut dyn FrameSource,
    initial: &[[f64; 2]],
    seed: u64,
    opts: &BohmOptions,
) -> Result<TrajectoryEnsemble> {
    if initial.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let header = *frames.header();
    if header.frame_count > 1 && !(header.frame_dt > 0.0 && header.frame_dt <= MAX_FRAME_DT) {
        return Err(Error::precondition(format!(
            "frame spacing {} must lie in (0, {MAX_FRAME_DT}]",
            header.frame_dt
        )));
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); header.frame_len()];
    let Some(mut current) = read_field(frames, &mut buf, opts.density_floor)? else {
        return Err(Error::precondition("frame store holds no frames"));
    };
    if let Some(p) = initial.iter().find(|p| !current.contains(**p)) {
        return Err(Error::domain(format!(
            "initial position ({}, {}) is outside the grid",
            p[0], p[1]
        )));
    }
    let mut walkers: Vec<Walker> = initial.iter().map(|&x| Walker::new(x)).collect();
    let mut times = vec![0.0];
    let mut k = 0usize;
    while let Some(next) = read_field(frames, &mut buf, opts.density_floor)? {
        let iv = Interval {
            f0: &current,
            f1: &next,
            t0: header.time(k),
            span: header.frame_dt,
        };
        walkers.par_iter_mut().for_each(|w| {
            w.speeds.push(iv.f0.at(w.x).map(norm).unwrap_or(0.0));
            w.advance(&iv, opts);
            w.path.push(w.x);
        });
        k += 1;
        times.push(header.time(k));
        current = next;
    }
    for w in &mut walkers {
        w.speeds.push(current.at(w.x).map(norm).unwrap_or(0.0));
    }
    let flagged = walkers
        .iter()
        .filter(|w| w.flag != TrajectoryFlag::Ok)
        .count();
    let quality_warning = flagged as f64 > FLAGGED_WARNING_FRACTION * walkers.len() as f64;
    if quality_warning {
        log::warn!("{flagged} of {} trajectories were flagged", walkers.len());
    }
    let mut ens = TrajectoryEnsemble {
        seed,
        times,
        positions: Vec::with_capacity(walkers.len()),
        speeds: Vec::with_capacity(walkers.len()),
        flags: Vec::with_capacity(walkers.len()),
        max_speed: Vec::with_capacity(walkers.len()),
        band_max_speed: Vec::with_capacity(walkers.len()),
        crossing_times: Vec::with_capacity(walkers.len()),
        quality_warning,
    };
    for w in walkers {
        ens.positions.push(w.path);
        ens.speeds.push(w.speeds);
        ens.flags.push(w.flag);
        ens.max_speed.push(w.max_speed);
        ens.band_max_speed.push(w.band_max_speed);
        ens.crossing_times.push(w.crossing);
    }
    Ok(ens)
}
