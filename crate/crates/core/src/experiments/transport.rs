use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::tdse::{evolve, fidelity, localized_hole_state, Evolution, EvolveOptions, FrameSink};

/// Outcome of one transport run.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub symmetry: String,
    pub hole_site: usize,
    /// F_{i→j} keyed `F_{i}to{j}` for the starting site i.
    pub fidelities: BTreeMap<String, f64>,
    pub max_middle_population: f64,
    pub counterdiagonal_population: f64,
    pub max_boundary_population: f64,
    pub leakage_warning: bool,
    pub norm_drift: f64,
    pub symmetry_error: f64,
    pub total_time: f64,
    pub steps: usize,
    pub dt: f64,
    pub frame_dt: f64,
    pub frame_count: usize,
    pub config_hash: String,
    pub seed: u64,
    pub config: Value,
    pub wall_seconds: f64,
}

impl RunReport {
    /// F_{i→target} for the run's starting site i.
    pub fn fidelity(&self, target: usize) -> f64 {
        self.fidelities
            .get(&format!("F_{}to{}", self.hole_site, target))
            .copied()
            .unwrap_or(f64::NAN)
    }
}

/// Report plus the full evolution, for callers that need ψ(T).
#[derive(Debug, Clone)]
pub struct TransportRun {
    pub report: RunReport,
    pub evolution: Evolution,
}

/// Evolves the localized hole state of `cfg` and measures all three
/// fidelities against the final trap layout.
pub fn transport(cfg: &RunConfig, sink: Option<&mut dyn FrameSink>) -> Result<TransportRun> {
    cfg.validate()?;
    let started = Instant::now();
    let axis = cfg.grid.axis();
    let schedule = &cfg.schedule;
    let start = schedule.trap_positions(0.0)?;
    let initial = localized_hole_state(cfg.hole_site, &start, cfg.params.symmetry, &axis)?;
    let options = EvolveOptions {
        band_halfwidth: cfg.band_halfwidth,
    };
    let evolution = evolve(&initial, schedule, &cfg.params, &cfg.grid, &options, sink)?;
    let end = schedule.trap_positions(schedule.total_duration())?;
    let mut fidelities = BTreeMap::new();
    for target in 1..=3 {
        let f = fidelity(&evolution.final_state, target, &end)?;
        fidelities.insert(format!("F_{}to{}", cfg.hole_site, target), f);
    }
    let d = &evolution.diagnostics;
    let report = RunReport {
        symmetry: cfg.params.symmetry.to_string(),
        hole_site: cfg.hole_site,
        fidelities,
        max_middle_population: d.max_middle_population,
        counterdiagonal_population: d.max_counterdiagonal_population,
        max_boundary_population: d.max_boundary_population,
        leakage_warning: d.leakage_warning,
        norm_drift: d.norm_drift,
        symmetry_error: d.symmetry_error,
        total_time: schedule.total_duration(),
        steps: d.steps,
        dt: d.dt,
        frame_dt: d.frame_dt,
        frame_count: d.frame_count,
        config_hash: cfg.hash(),
        seed: cfg.seed,
        config: cfg.to_value(),
        wall_seconds: started.elapsed().as_secs_f64(),
    };
    Ok(TransportRun { report, evolution })
}

pub fn run_transport(cfg: &RunConfig) -> Result<RunReport> {
    transport(cfg, None).map(|r| r.report).map_err(|e| match e {
        Error::NumericalFailure(m) => Error::NumericalFailure(format!(
            "transport {} hole {} (config {}): {m}",
            cfg.params.symmetry,
            cfg.hole_site,
            &cfg.hash()[..12]
        )),
        other => other,
    })
}
