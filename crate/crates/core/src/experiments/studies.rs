use serde::Serialize;

use super::map_ordered;
use super::table::{Column, Table};
use super::transport::{run_transport, RunReport};
use crate::config::{RunConfig, NUMERIC_KEYS};
use crate::error::{Error, Result};
use crate::model::{interaction_strength, Jitter, Symmetry};

/// F_D = F_{1→3}(1 − F_{3→1}).
pub fn diode_fidelity(f13: f64, f31: f64) -> f64 {
    f13 * (1.0 - f31)
}

/// F_T = F^F_{1→3}(1 − F^B_{1→3}).
pub fn transistor_fidelity(fermionic: f64, bosonic: f64) -> f64 {
    fermionic * (1.0 - bosonic)
}

/// A named parameter and the values it takes in a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub name: String,
    pub values: Vec<f64>,
}

impl GridAxis {
    pub fn new(name: &str, values: Vec<f64>) -> Result<Self> {
        if !NUMERIC_KEYS.contains(&name) {
            return Err(Error::config(name, "not a sweepable numeric parameter"));
        }
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::config(name, "grid needs at least one finite value"));
        }
        Ok(Self {
            name: name.to_string(),
            values,
        })
    }

    /// `count` evenly spaced values from `start` to `stop` inclusive.
    pub fn linspace(name: &str, start: f64, stop: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::config(name, "grid count must be at least 1"));
        }
        let values = if count == 1 {
            vec![start]
        } else {
            let step = (stop - start) / (count - 1) as f64;
            (0..count)
                .map(|k| {
                    if k + 1 == count {
                        stop
                    } else {
                        start + step * k as f64
                    }
                })
                .collect()
        };
        Self::new(name, values)
    }

    /// Parses `name=start:stop:count`.
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = |why: &str| Error::config("grid", format!("`{spec}`: {why}"));
        let (name, range) = spec
            .split_once('=')
            .ok_or_else(|| bad("expected name=start:stop:count"))?;
        let parts: Vec<&str> = range.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:count"));
        }
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| bad("bounds must be numbers"))
        };
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| bad("count must be a positive integer"))?;
        Self::linspace(name.trim(), num(parts[0])?, num(parts[1])?, count)
    }
}

fn unit(key: &str) -> &'static str {
    match key {
        "d_max" | "d_min" | "x_min" | "x_max" | "band_halfwidth" | "contact_width" | "A_s" => {
            "1/alpha"
        }
        "t_delay" | "t_ramp" | "t_hold" | "t_pre" | "t_post" | "dt" => "1/omega_x",
        "omega_s" => "omega_x",
        "alpha_as" => "alpha*a_s",
        "omega_ratio" => "omega_x",
        _ => "",
    }
}

fn message(e: &Error) -> String {
    e.to_string()
}

/// One transport run per grid point (outer product of the axes, first
/// axis slowest), recording fidelities and diagnostics.
pub fn sweep_fidelity(axes: &[GridAxis], base: &RunConfig, workers: usize) -> Result<Table> {
    if axes.is_empty() || axes.len() > 2 {
        return Err(Error::config("grid", "a sweep takes one or two axes"));
    }
    if axes.len() == 2 && axes[0].name == axes[1].name {
        return Err(Error::config(axes[0].name.clone(), "swept twice"));
    }
    base.validate()?;
    let mut points: Vec<Vec<f64>> = vec![vec![]];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    let results = map_ordered(&points, workers, |p| -> Result<RunReport> {
        let mut cfg = base.clone();
        for (axis, &v) in axes.iter().zip(p) {
            cfg.set_number(&axis.name, v)?;
        }
        cfg.validate()?;
        run_transport(&cfg)
    })?;
    let i = base.hole_site;
    let mut columns: Vec<Column> = axes
        .iter()
        .map(|a| Column::new(&a.name, unit(&a.name)))
        .collect();
    for j in 1..=3 {
        columns.push(Column::new(&format!("F_{i}to{j}"), ""));
    }
    for name in [
        "max_middle_population",
        "counterdiagonal_population",
        "norm_drift",
        "symmetry_error",
        "leakage_warning",
    ] {
        columns.push(Column::new(name, ""));
    }
    let mut rows = Vec::with_capacity(points.len());
    let mut errors = Vec::with_capacity(points.len());
    for (p, r) in points.iter().zip(results) {
        let mut row = p.clone();
        match r {
            Ok(rep) => {
                row.extend((1..=3).map(|j| rep.fidelity(j)));
                row.extend([
                    rep.max_middle_population,
                    rep.counterdiagonal_population,
                    rep.norm_drift,
                    rep.symmetry_error,
                    if rep.leakage_warning { 1.0 } else { 0.0 },
                ]);
                errors.push(None);
            }
            Err(e) => errors.push(Some(message(&e))),
        }
        rows.push(row);
    }
    Ok(Table {
        study: "sweep".into(),
        columns,
        keys: axes.len(),
        rows,
        errors,
        config: base.to_value(),
        config_hash: base.hash(),
    })
}

/// Bosonic runs from both extreme sites under the identical schedule, for
/// each scattering length.
pub fn diode_scan(alpha_as: &[f64], base: &RunConfig, workers: usize) -> Result<Table> {
    if base.params.symmetry != Symmetry::Bosonic {
        return Err(Error::precondition("the diode is defined for bosons"));
    }
    if alpha_as.is_empty() {
        return Err(Error::config("alpha_as", "scan needs at least one value"));
    }
    base.validate()?;
    let jobs: Vec<(f64, usize)> = alpha_as.iter().flat_map(|&a| [(a, 1), (a, 3)]).collect();
    let results = map_ordered(&jobs, workers, |&(a, site)| {
        let mut cfg = base.clone();
        cfg.params.scaled_scattering_length = a;
        cfg.hole_site = site;
        cfg.validate()?;
        run_transport(&cfg)
    })?;
    let columns = vec![
        Column::new("alpha_as", unit("alpha_as")),
        Column::new("g", "hbar*omega_x/alpha"),
        Column::new("F_1to3", ""),
        Column::new("F_3to1", ""),
        Column::new("F_3to2", ""),
        Column::new("F_D", ""),
    ];
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    let mut it = results.into_iter();
    for &a in alpha_as {
        let mut params = base.params;
        params.scaled_scattering_length = a;
        let mut row = vec![a, interaction_strength(&params)];
        match (
            it.next().expect("two runs per point"),
            it.next().expect("two runs per point"),
        ) {
            (Ok(left), Ok(right)) => {
                let (f13, f31, f32) = (left.fidelity(3), right.fidelity(1), right.fidelity(2));
                row.extend([f13, f31, f32, diode_fidelity(f13, f31)]);
                errors.push(None);
            }
            (Err(e), _) | (_, Err(e)) => errors.push(Some(message(&e))),
        }
        rows.push(row);
    }
    Ok(Table {
        study: "diode".into(),
        columns,
        keys: 1,
        rows,
        errors,
        config: base.to_value(),
        config_hash: base.hash(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransistorRecord {
    pub alpha_as: f64,
    pub fermionic_1to3: f64,
    pub bosonic_1to3: f64,
    pub transistor: f64,
}

/// The same schedule in both exchange sectors; the spin state that selects
/// the sector is not modelled beyond this switch.
pub fn transistor_eval(base: &RunConfig, workers: usize) -> Result<TransistorRecord> {
    let mut cfg = base.clone();
    cfg.hole_site = 1;
    let sectors = [Symmetry::Fermionic, Symmetry::Bosonic];
    let mut reports =
        map_ordered(&sectors, workers, |&s| run_transport(&cfg.with_symmetry(s)))?.into_iter();
    let ferm = reports.next().expect("fermionic run")?;
    let bos = reports.next().expect("bosonic run")?;
    let (ff, fb) = (ferm.fidelity(3), bos.fidelity(3));
    Ok(TransistorRecord {
        alpha_as: base.params.scaled_scattering_length,
        fermionic_1to3: ff,
        bosonic_1to3: fb,
        transistor: transistor_fidelity(ff, fb),
    })
}

/// Transistor fidelity with the trap jitter d_i → d_i + A_s cos(ω_s t)
/// over the outer product of amplitudes and frequencies.
pub fn jitter_robustness(
    amplitudes: &[f64],
    omegas: &[f64],
    base: &RunConfig,
    workers: usize,
) -> Result<Table> {
    if amplitudes.is_empty() || omegas.is_empty() {
        return Err(Error::config(
            "jitter",
            "both grids need at least one value",
        ));
    }
    let mut cfg = base.clone();
    cfg.hole_site = 1;
    cfg.validate()?;
    let points: Vec<(f64, f64)> = amplitudes
        .iter()
        .flat_map(|&a| omegas.iter().map(move |&w| (a, w)))
        .collect();
    let jobs: Vec<(f64, f64, Symmetry)> = points
        .iter()
        .flat_map(|&(a, w)| [(a, w, Symmetry::Fermionic), (a, w, Symmetry::Bosonic)])
        .collect();
    let results = map_ordered(&jobs, workers, |&(a, w, s)| {
        let mut c = cfg.with_symmetry(s);
        c.schedule.jitter = Some(Jitter {
            amplitude: a,
            omega_s: w,
        });
        c.validate()?;
        run_transport(&c)
    })?;
    let columns = vec![
        Column::new("A_s", unit("A_s")),
        Column::new("omega_s", unit("omega_s")),
        Column::new("F_F_1to3", ""),
        Column::new("F_B_1to3", ""),
        Column::new("F_T", ""),
    ];
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    let mut it = results.into_iter();
    for &(a, w) in &points {
        let mut row = vec![a, w];
        match (
            it.next().expect("two runs per point"),
            it.next().expect("two runs per point"),
        ) {
            (Ok(f), Ok(b)) => {
                let (ff, fb) = (f.fidelity(3), b.fidelity(3));
                row.extend([ff, fb, transistor_fidelity(ff, fb)]);
                errors.push(None);
            }
            (Err(e), _) | (_, Err(e)) => errors.push(Some(message(&e))),
        }
        rows.push(row);
    }
    Ok(Table {
        study: "jitter".into(),
        columns,
        keys: 2,
        rows,
        errors,
        config: cfg.to_value(),
        config_hash: cfg.hash(),
    })
}
