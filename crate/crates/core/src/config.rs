//! Run configuration: one flat JSON object covering the schedule, the
//! physical parameters, the grid and the run itself.
//!
//! Parsing goes through [`serde_json::Value`] so that every error names
//! the offending key. Precedence is applied by the caller: defaults, then
//! file, then individual overrides via [`RunConfig::set`].

use std::path::Path;

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{FirstMover, Jitter, PhysicalParams, RampShape, Symmetry, TrapSchedule};
use crate::tdse::{ContactKernel, Grid2D};

/// Every key accepted at the top level of a config object.
pub const KEYS: &[&str] = &[
    "d_max",
    "d_min",
    "t_delay",
    "t_ramp",
    "t_hold",
    "t_pre",
    "t_post",
    "ramp_shape",
    "first_mover",
    "jitter",
    "omega_ratio",
    "alpha_as",
    "symmetry",
    "x_min",
    "x_max",
    "points_per_axis",
    "dt",
    "frame_stride",
    "contact_width",
    "hole_site",
    "band_halfwidth",
    "seed",
];

/// Keys that take a single number and can be swept over.
pub const NUMERIC_KEYS: &[&str] = &[
    "d_max",
    "d_min",
    "t_delay",
    "t_ramp",
    "t_hold",
    "t_pre",
    "t_post",
    "omega_ratio",
    "alpha_as",
    "x_min",
    "x_max",
    "points_per_axis",
    "dt",
    "frame_stride",
    "contact_width",
    "hole_site",
    "band_halfwidth",
    "seed",
    "A_s",
    "omega_s",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub schedule: TrapSchedule,
    pub params: PhysicalParams,
    pub grid: Grid2D,
    /// Trap holding the hole at t = 0.
    pub hole_site: usize,
    pub band_halfwidth: f64,
    /// Carried through to outputs; the transport itself is deterministic.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schedule: TrapSchedule::default(),
            params: PhysicalParams::default(),
            grid: Grid2D::default(),
            hole_site: 1,
            band_halfwidth: 1.0,
            seed: 0,
        }
    }
}

/// SHA-256 of the compact JSON text of `value`, hex encoded. Object keys
/// are sorted, so equal values hash equally.
pub fn content_hash(value: &Value) -> String {
    let text = serde_json::to_string(value).expect("JSON values serialize");
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn number(key: &str, v: &Value) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::config(key, format!("expected a number, got {v}")))
}

fn count(key: &str, x: f64) -> Result<u64> {
    if x < 0.0 || x.fract() != 0.0 || x > u32::MAX as f64 {
        return Err(Error::config(
            key,
            format!("expected a non-negative integer, got {x}"),
        ));
    }
    Ok(x as u64)
}

fn text<'a>(key: &str, v: &'a Value) -> Result<&'a str> {
    v.as_str()
        .ok_or_else(|| Error::config(key, format!("expected a string, got {v}")))
}

impl RunConfig {
    /// Defaults overlaid with the keys present in `value`.
    pub fn from_value(value: &Value) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply(value)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let value: Value =
            serde_json::from_str(s).map_err(|e| Error::config("<file>", e.to_string()))?;
        Self::from_value(&value)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    /// Overlays every key of a JSON object; validation is left to the caller.
    pub fn apply(&mut self, value: &Value) -> Result<()> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::config("<root>", "config must be a JSON object"))?;
        for (key, v) in obj {
            self.set_value(key, v)?;
        }
        Ok(())
    }

    /// Sets one key from a JSON value.
    pub fn set_value(&mut self, key: &str, v: &Value) -> Result<()> {
        let s = &mut self.schedule;
        match key {
            "d_max" => s.d_max = number(key, v)?,
            "d_min" => s.d_min = number(key, v)?,
            "t_delay" => s.t_delay = number(key, v)?,
            "t_ramp" => s.t_ramp = number(key, v)?,
            "t_hold" => s.t_hold = number(key, v)?,
            "t_pre" => s.t_pre = number(key, v)?,
            "t_post" => s.t_post = number(key, v)?,
            "ramp_shape" => {
                s.ramp_shape = match text(key, v)? {
                    "linear" => RampShape::Linear,
                    "sin_squared" => RampShape::SinSquared,
                    other => return Err(Error::config(key, format!("unknown shape `{other}`"))),
                }
            }
            "first_mover" => {
                s.first_mover = match text(key, v)? {
                    "right_trap" => FirstMover::RightTrap,
                    "left_trap" => FirstMover::LeftTrap,
                    other => return Err(Error::config(key, format!("unknown trap `{other}`"))),
                }
            }
            "jitter" => {
                s.jitter = match v {
                    Value::Null => None,
                    Value::Object(m) => {
                        let mut j = Jitter {
                            amplitude: 0.0,
                            omega_s: 0.0,
                        };
                        for (k, x) in m {
                            match k.as_str() {
                                "A_s" => j.amplitude = number("jitter.A_s", x)?,
                                "omega_s" => j.omega_s = number("jitter.omega_s", x)?,
                                other => {
                                    return Err(Error::config(
                                        format!("jitter.{other}"),
                                        "unknown key",
                                    ))
                                }
                            }
                        }
                        for k in ["A_s", "omega_s"] {
                            if !m.contains_key(k) {
                                return Err(Error::config(format!("jitter.{k}"), "missing"));
                            }
                        }
                        Some(j)
                    }
                    other => {
                        return Err(Error::config(
                            key,
                            format!("expected an object or null, got {other}"),
                        ))
                    }
                }
            }
            "A_s" | "omega_s" => {
                let x = number(key, v)?;
                let j = s.jitter.get_or_insert(Jitter {
                    amplitude: 0.0,
                    omega_s: 0.0,
                });
                if key == "A_s" {
                    j.amplitude = x;
                } else {
                    j.omega_s = x;
                }
            }
            "omega_ratio" => self.params.omega_ratio = number(key, v)?,
            "alpha_as" => self.params.scaled_scattering_length = number(key, v)?,
            "symmetry" => self.params.symmetry = text(key, v)?.parse()?,
            "x_min" => self.grid.x_min = number(key, v)?,
            "x_max" => self.grid.x_max = number(key, v)?,
            "points_per_axis" => self.grid.points_per_axis = count(key, number(key, v)?)? as usize,
            "dt" => self.grid.dt = number(key, v)?,
            "frame_stride" => self.grid.frame_stride = count(key, number(key, v)?)? as usize,
            "contact_width" => {
                self.grid.contact = match v {
                    Value::String(t) if t == "grid_delta" => ContactKernel::GridDelta,
                    _ => ContactKernel::Gaussian {
                        sigma: number(key, v)?,
                    },
                }
            }
            "hole_site" => self.hole_site = count(key, number(key, v)?)? as usize,
            "band_halfwidth" => self.band_halfwidth = number(key, v)?,
            "seed" => {
                self.seed = v.as_u64().ok_or_else(|| {
                    Error::config(key, format!("expected a non-negative integer, got {v}"))
                })?
            }
            other => return Err(Error::config(other, "unknown key")),
        }
        Ok(())
    }

    /// Sets one key from command-line text. Numbers, `null` and bare
    /// words are all accepted.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        let v =
            serde_json::from_str::<Value>(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        self.set_value(key, &v)
    }

    /// Sets a numeric key, as used by parameter sweeps.
    pub fn set_number(&mut self, key: &str, x: f64) -> Result<()> {
        if !NUMERIC_KEYS.contains(&key) {
            return Err(Error::config(key, "not a numeric parameter"));
        }
        let v = serde_json::Number::from_f64(x)
            .map(Value::Number)
            .ok_or_else(|| Error::config(key, format!("{x} is not finite")))?;
        self.set_value(key, &v)
    }

    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        self.params.validate()?;
        self.grid.validate()?;
        self.grid
            .check_covers(&self.schedule)
            .map_err(|e| Error::config("x_max", e.to_string()))?;
        if !(1..=3).contains(&self.hole_site) {
            return Err(Error::config(
                "hole_site",
                format!("must be 1, 2 or 3, got {}", self.hole_site),
            ));
        }
        if !(self.band_halfwidth > 0.0) {
            return Err(Error::config("band_halfwidth", "must be positive"));
        }
        Ok(())
    }

    /// The effective configuration as a flat JSON object, keys sorted.
    pub fn to_value(&self) -> Value {
        let s = &self.schedule;
        let mut m = Map::new();
        let mut put = |k: &str, v: Value| {
            m.insert(k.to_string(), v);
        };
        put("d_max", s.d_max.into());
        put("d_min", s.d_min.into());
        put("t_delay", s.t_delay.into());
        put("t_ramp", s.t_ramp.into());
        put("t_hold", s.t_hold.into());
        put("t_pre", s.t_pre.into());
        put("t_post", s.t_post.into());
        put(
            "ramp_shape",
            match s.ramp_shape {
                RampShape::Linear => "linear",
                RampShape::SinSquared => "sin_squared",
            }
            .into(),
        );
        put(
            "first_mover",
            match s.first_mover {
                FirstMover::RightTrap => "right_trap",
                FirstMover::LeftTrap => "left_trap",
            }
            .into(),
        );
        put(
            "jitter",
            match s.jitter {
                None => Value::Null,
                Some(j) => serde_json::json!({"A_s": j.amplitude, "omega_s": j.omega_s}),
            },
        );
        put("omega_ratio", self.params.omega_ratio.into());
        put("alpha_as", self.params.scaled_scattering_length.into());
        put("symmetry", self.params.symmetry.to_string().into());
        put("x_min", self.grid.x_min.into());
        put("x_max", self.grid.x_max.into());
        put("points_per_axis", (self.grid.points_per_axis as u64).into());
        put("dt", self.grid.dt.into());
        put("frame_stride", (self.grid.frame_stride as u64).into());
        put(
            "contact_width",
            match self.grid.contact {
                ContactKernel::GridDelta => "grid_delta".into(),
                ContactKernel::Gaussian { sigma } => sigma.into(),
            },
        );
        put("hole_site", (self.hole_site as u64).into());
        put("band_halfwidth", self.band_halfwidth.into());
        put("seed", self.seed.into());
        Value::Object(m)
    }

    /// SHA-256 of the compact JSON echo, hex encoded.
    pub fn hash(&self) -> String {
        content_hash(&self.to_value())
    }

    /// Same configuration in the other exchange sector.
    pub fn with_symmetry(&self, symmetry: Symmetry) -> Self {
        let mut c = self.clone();
        c.params.symmetry = symmetry;
        c
    }
}
