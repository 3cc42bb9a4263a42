use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered positions of the trap centers, in units of 1/α.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapLayout {
    centers: Vec<f64>,
}

impl TrapLayout {
    pub fn new(centers: Vec<f64>) -> Result<Self> {
        if centers.len() < 2 {
            return Err(Error::domain("a trap layout needs at least two traps"));
        }
        if centers.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("trap centers must be finite"));
        }
        if centers.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain(format!(
                "trap centers must be strictly increasing, got {centers:?}"
            )));
        }
        Ok(Self { centers })
    }

    /// Symmetric three-trap layout with the middle trap pinned at the origin.
    pub fn three(left_distance: f64, right_distance: f64) -> Result<Self> {
        Self::new(vec![-left_distance, 0.0, right_distance])
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Distances between neighbouring traps, d_i = x_{i+1} - x_i.
    pub fn distances(&self) -> Vec<f64> {
        self.centers.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Reflection x → -x.
    pub fn mirrored(&self) -> Self {
        Self {
            centers: self.centers.iter().rev().map(|c| -c).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RampShape {
    Linear,
    SinSquared,
}

impl RampShape {
    /// Ramp profile on u ∈ [0, 1], rising from 0 to 1.
    pub fn profile(self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self {
            RampShape::Linear => u,
            RampShape::SinSquared => {
                let s = (FRAC_PI_2 * u).sin();
                s * s
            }
        }
    }
}

/// Which outer trap starts approaching the middle one first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FirstMover {
    RightTrap,
    LeftTrap,
}

impl FirstMover {
    pub fn swapped(self) -> Self {
        match self {
            FirstMover::RightTrap => FirstMover::LeftTrap,
            FirstMover::LeftTrap => FirstMover::RightTrap,
        }
    }
}

/// Harmonic shaking of both inter-trap distances, d_i → d_i + A_s cos(ω_s t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jitter {
    #[serde(rename = "A_s")]
    pub amplitude: f64,
    pub omega_s: f64,
}

/// Time-dependent trap distances for the adiabatic approach sequence.
///
/// Each outer trap ramps its distance to the (static) middle trap from
/// `d_max` down to `d_min` over `t_ramp`, holds for `t_hold` and ramps back
/// over another `t_ramp`. The first mover starts at `t_pre`, the other one
/// `t_delay` later. The total duration is derived, never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapSchedule {
    pub d_max: f64,
    pub d_min: f64,
    pub t_delay: f64,
    pub t_ramp: f64,
    pub t_hold: f64,
    pub t_pre: f64,
    pub t_post: f64,
    pub ramp_shape: RampShape,
    pub first_mover: FirstMover,
    pub jitter: Option<Jitter>,
}

impl Default for TrapSchedule {
    fn default() -> Self {
        Self {
            d_max: 9.0,
            d_min: 1.5,
            t_delay: 120.0,
            t_ramp: 188.0,
            t_hold: 91.0,
            t_pre: 10.0,
            t_post: 10.0,
            ramp_shape: RampShape::SinSquared,
            first_mover: FirstMover::RightTrap,
            jitter: None,
        }
    }
}

impl TrapSchedule {
    /// Traps parked at `distance` for `duration`; no tunneling dynamics.
    pub fn frozen(distance: f64, duration: f64) -> Self {
        Self {
            d_max: distance,
            d_min: distance,
            t_delay: 0.0,
            t_ramp: 0.0,
            t_hold: 0.0,
            t_pre: duration,
            t_post: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let durations = [
            ("t_delay", self.t_delay),
            ("t_ramp", self.t_ramp),
            ("t_hold", self.t_hold),
            ("t_pre", self.t_pre),
            ("t_post", self.t_post),
        ];
        for (key, v) in durations {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(
                    key,
                    format!("must be a finite non-negative duration, got {v}"),
                ));
            }
        }
        if !(self.d_min > 0.0 && self.d_min.is_finite()) {
            return Err(Error::config("d_min", "must be positive"));
        }
        if !self.d_max.is_finite() {
            return Err(Error::config("d_max", "must be finite"));
        }
        if self.d_min > self.d_max {
            return Err(Error::config(
                "d_min",
                format!("d_min = {} exceeds d_max = {}", self.d_min, self.d_max),
            ));
        }
        if let Some(j) = self.jitter {
            if !j.amplitude.is_finite() || !j.omega_s.is_finite() {
                return Err(Error::config("jitter", "A_s and omega_s must be finite"));
            }
            if self.d_min - j.amplitude.abs() <= 0.0 {
                return Err(Error::config(
                    "jitter",
                    "A_s would let neighbouring traps merge",
                ));
            }
        }
        Ok(())
    }

    pub fn total_duration(&self) -> f64 {
        self.t_pre + self.t_delay + 2.0 * self.t_ramp + self.t_hold + self.t_post
    }

    fn approach_distance(&self, t: f64, start: f64) -> f64 {
        let s = t - start;
        let span = self.d_max - self.d_min;
        if s <= 0.0 {
            self.d_max
        } else if s < self.t_ramp {
            self.d_max - span * self.ramp_shape.profile(s / self.t_ramp)
        } else if s <= self.t_ramp + self.t_hold {
            self.d_min
        } else if s < 2.0 * self.t_ramp + self.t_hold {
            let u = (s - self.t_ramp - self.t_hold) / self.t_ramp;
            self.d_min + span * self.ramp_shape.profile(u)
        } else {
            self.d_max
        }
    }

    fn jitter_offset(&self, t: f64) -> f64 {
        self.jitter
            .map(|j| j.amplitude * (j.omega_s * t).cos())
            .unwrap_or(0.0)
    }

    /// Distances (left-middle, middle-right) at time `t`, jitter included.
    /// No range check; callers inside integrators use this directly.
    pub fn distances_at(&self, t: f64) -> [f64; 2] {
        let early = self.approach_distance(t, self.t_pre);
        let late = self.approach_distance(t, self.t_pre + self.t_delay);
        let shake = self.jitter_offset(t);
        match self.first_mover {
            FirstMover::RightTrap => [late + shake, early + shake],
            FirstMover::LeftTrap => [early + shake, late + shake],
        }
    }

    /// Trap centers at time `t`; the middle trap stays at the origin.
    pub fn trap_positions(&self, t: f64) -> Result<TrapLayout> {
        let total = self.total_duration();
        let slack = 1e-9 * total.max(1.0);
        if !(t >= -slack && t <= total + slack) {
            return Err(Error::OutOfRange {
                what: "t",
                value: t,
                min: 0.0,
                max: total,
            });
        }
        let [left, right] = self.distances_at(t.clamp(0.0, total));
        TrapLayout::three(left, right)
    }

    /// Schedule whose layouts are the x → -x reflection of this one.
    pub fn mirrored(&self) -> Self {
        Self {
            first_mover: self.first_mover.swapped(),
            ..*self
        }
    }
}
