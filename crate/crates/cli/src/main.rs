//! `holetron`: command-line driver for hole transport simulations.
//!
//! Exit codes: 0 success, 2 usage or config error, 3 data-file error,
//! 4 numerical failure.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use holetron::bohm::{ensemble_statistics, integrate_trajectories, sample_initial, BohmOptions};
use holetron::config::{content_hash, RunConfig};
use holetron::experiments::{
    diode_scan, jitter_robustness, sweep_fidelity, transistor_eval, transport, GridAxis, Table,
};
use holetron::holechain::{
    chain_hamiltonian, even_odd_pulse_schedule, multisite_dark_state, propagate_pulses,
    HoleChainModel,
};
use holetron::tdse::{FrameReader, FrameSource, FrameWriter};
use holetron::{Error, Symmetry};

#[derive(Parser)]
#[command(
    name = "holetron",
    version,
    about = "Adiabatic hole transport in triple-well traps"
)]
struct Cli {
    /// Upper bound on concurrent simulations
    #[arg(long, global = true, env = "HOLETRON_WORKERS", default_value_t = 1)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single transport run; writes a JSON report and optionally the frames
    Transport {
        #[command(flatten)]
        config: ConfigArgs,
        /// Report destination
        #[arg(long, default_value = "report.json")]
        report: PathBuf,
        /// Frame store destination (QHWF)
        #[arg(long)]
        frames: Option<PathBuf>,
    },
    /// Fidelity over one or two parameter grids
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// name=start:stop:count, given once or twice
        #[arg(long = "grid", required = true)]
        grids: Vec<String>,
        #[command(flatten)]
        out: TableOut,
    },
    /// Diode fidelity over scattering lengths (bosons)
    Diode {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long = "grid", default_value = "alpha_as=0:0.03:13")]
        grid: String,
        #[command(flatten)]
        out: TableOut,
    },
    /// Transistor fidelity from one fermionic and one bosonic run
    Transistor {
        #[command(flatten)]
        config: ConfigArgs,
        /// JSON destination; standard output when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Transistor fidelity under trap jitter
    Jitter {
        #[command(flatten)]
        config: ConfigArgs,
        /// Grids over A_s and omega_s
        #[arg(long = "grid", default_values = ["A_s=0.3:0.3:1", "omega_s=0.1:1.0:2"])]
        grids: Vec<String>,
        #[command(flatten)]
        out: TableOut,
    },
    /// Quantum trajectories from a stored frame sequence
    Bohm {
        #[arg(long)]
        frames: PathBuf,
        #[arg(long, default_value_t = 4000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Trajectory CSV destination
        #[arg(long, default_value = "trajectories.csv")]
        out: PathBuf,
        /// Statistics JSON destination
        #[arg(long, default_value = "bohm_stats.json")]
        stats: PathBuf,
    },
    /// Single hole on an n-site chain under even/odd pulses
    Chain {
        #[arg(long, default_value_t = 5)]
        sites: usize,
        #[arg(long, default_value_t = 0.2)]
        jpeak: f64,
        #[arg(long, default_value_t = 80.0)]
        width: f64,
        #[arg(long, default_value_t = 60.0)]
        delay: f64,
        #[arg(long, default_value_t = 400.0)]
        total: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        /// Population CSV destination
        #[arg(long, default_value = "chain.csv")]
        out: PathBuf,
        /// Only report the dark-state residual at equal couplings
        #[arg(long)]
        verify_darkstate: bool,
    },
}

/// Configuration sources: defaults, then the file, then flags.
#[derive(Args, Clone)]
struct ConfigArgs {
    /// JSON config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Any config key, as key=value; repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    symmetry: Option<Symmetry>,
    #[arg(long)]
    alpha_as: Option<f64>,
    #[arg(long)]
    hole_site: Option<usize>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Args, Clone)]
struct TableOut {
    /// CSV destination; standard output when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON summary with config echo and timing
    #[arg(long)]
    summary: Option<PathBuf>,
}

/// Failure with a fixed exit code.
#[derive(Debug)]
struct Exit {
    code: u8,
    message: String,
}

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Exit {}

fn usage(message: impl Into<String>) -> anyhow::Error {
    Exit {
        code: 2,
        message: message.into(),
    }
    .into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Exit>() {
            return e.code;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::FrameStore { .. } | Error::Io(_) => 3,
                Error::NumericalFailure(_)
                | Error::SamplerFailure { .. }
                | Error::DegenerateDarkState
                | Error::SymmetryMismatch { .. } => 4,
                _ => 2,
            };
        }
        if cause.downcast_ref::<io::Error>().is_some() {
            return 3;
        }
    }
    2
}

impl ConfigArgs {
    fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            let value: Value = serde_json::from_str(&text)
                .map_err(|e| usage(format!("config {} is not valid JSON: {e}", path.display())))?;
            cfg.apply(&value)
                .with_context(|| format!("config {}", path.display()))?;
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| usage(format!("--set expects key=value, got `{kv}`")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        if let Some(s) = self.symmetry {
            cfg.params.symmetry = s;
        }
        if let Some(a) = self.alpha_as {
            cfg.set_number("alpha_as", a)?;
        }
        if let Some(h) = self.hole_site {
            cfg.hole_site = h;
        }
        if let Some(n) = self.points {
            cfg.grid.points_per_axis = n;
        }
        if let Some(dt) = self.dt {
            cfg.set_number("dt", dt)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_json(path: Option<&Path>, value: &Value) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => {
            let mut w = create(p)?;
            writeln!(w, "{text}")?;
            w.flush()?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn emit_table(
    table: &Table,
    out: &TableOut,
    started: std::time::Instant,
    workers: usize,
) -> anyhow::Result<()> {
    match &out.out {
        Some(p) => {
            let mut w = create(p)?;
            table.write_csv(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            table.write_csv(stdout.lock())?;
        }
    }
    if let Some(p) = &out.summary {
        let summary = json!({
            "study": table.study,
            "rows": table.len(),
            "failures": table.failures(),
            "config": table.config,
            "config_hash": table.config_hash,
            "workers": workers,
            "wall_seconds": started.elapsed().as_secs_f64(),
        });
        write_json(Some(p), &summary)?;
    }
    if table.failures() > 0 {
        log::warn!("{} of {} grid points failed", table.failures(), table.len());
    }
    Ok(())
}

fn parse_grids(specs: &[String]) -> anyhow::Result<Vec<GridAxis>> {
    specs
        .iter()
        .map(|s| GridAxis::parse(s).map_err(|e| usage(e.to_string())))
        .collect()
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let workers = cli.workers.max(1);
    let started = std::time::Instant::now();
    match cli.command {
        Command::Transport {
            config,
            report,
            frames,
        } => {
            let cfg = config.resolve()?;
            let mut writer = match &frames {
                Some(p) => Some(FrameWriter::create(p)?),
                None => None,
            };
            let run = transport(
                &cfg,
                writer
                    .as_mut()
                    .map(|w| w as &mut dyn holetron::tdse::FrameSink),
            )?;
            let rep = &run.report;
            write_json(Some(&report), &serde_json::to_value(rep)?)?;
            let target = if cfg.hole_site == 3 { 1 } else { 3 };
            println!(
                "F_{}to{} = {:.6}",
                cfg.hole_site,
                target,
                rep.fidelity(target)
            );
            if rep.leakage_warning {
                log::warn!(
                    "boundary density reached {:.2e}",
                    rep.max_boundary_population
                );
            }
        }
        Command::Sweep { config, grids, out } => {
            let cfg = config.resolve()?;
            let axes = parse_grids(&grids)?;
            if axes.len() > 2 {
                return Err(usage("sweep takes at most two --grid axes"));
            }
            let table = sweep_fidelity(&axes, &cfg, workers)?;
            emit_table(&table, &out, started, workers)?;
        }
        Command::Diode {
            mut config,
            grid,
            out,
        } => {
            if config.symmetry.is_none() {
                config.symmetry = Some(Symmetry::Bosonic);
            }
            let cfg = config.resolve()?;
            let axis = GridAxis::parse(&grid).map_err(|e| usage(e.to_string()))?;
            if axis.name != "alpha_as" {
                return Err(usage("diode scans alpha_as only"));
            }
            let table = diode_scan(&axis.values, &cfg, workers)?;
            emit_table(&table, &out, started, workers)?;
        }
        Command::Transistor { config, out } => {
            let cfg = config.resolve()?;
            let rec = transistor_eval(&cfg, workers)?;
            let value = json!({
                "record": rec,
                "config": cfg.to_value(),
                "config_hash": cfg.hash(),
                "wall_seconds": started.elapsed().as_secs_f64(),
            });
            write_json(out.as_deref(), &value)?;
            if out.is_some() {
                println!("F_T = {:.6}", rec.transistor);
            }
        }
        Command::Jitter { config, grids, out } => {
            let cfg = config.resolve()?;
            let axes = parse_grids(&grids)?;
            let pick = |name: &str| {
                axes.iter()
                    .find(|a| a.name == name)
                    .map(|a| a.values.clone())
                    .ok_or_else(|| usage(format!("jitter needs a --grid over {name}")))
            };
            if axes.iter().any(|a| a.name != "A_s" && a.name != "omega_s") {
                return Err(usage("jitter grids must be over A_s and omega_s"));
            }
            let table = jitter_robustness(&pick("A_s")?, &pick("omega_s")?, &cfg, workers)?;
            emit_table(&table, &out, started, workers)?;
        }
        Command::Bohm {
            frames,
            count,
            seed,
            out,
            stats,
        } => {
            if count == 0 {
                return Err(usage("--count must be positive"));
            }
            let mut reader = FrameReader::open(&frames)?;
            let header = *reader.header();
            if header.frame_count == 0 {
                return Err(Error::FrameStore {
                    path: frames.clone(),
                    reason: "no frames".into(),
                }
                .into());
            }
            let first = reader.read_state(0)?;
            let last = reader.read_state(header.frame_count - 1)?;
            reader.seek_frame(0)?;
            let initial = sample_initial(&first, count, seed)?;
            let options = BohmOptions::default();
            let ens = integrate_trajectories(&mut reader, &initial, seed, &options)?;
            let st = ensemble_statistics(&ens, &last)?;
            let provenance = json!({
                "frames": frames.display().to_string(),
                "count": count,
                "seed": seed,
                "options": options,
                "points_per_axis": header.points_per_axis,
                "frame_count": header.frame_count,
                "frame_dt": header.frame_dt,
                "symmetry": header.symmetry,
            });
            let hash = content_hash(&provenance);
            let mut w = create(&out)?;
            writeln!(w, "# config: {}", serde_json::to_string(&provenance)?)?;
            writeln!(w, "# config_hash: {hash}")?;
            ens.write_csv(&mut w)?;
            w.flush()?;
            let mut value = serde_json::to_value(&st)?;
            value["config"] = provenance;
            value["config_hash"] = hash.into();
            write_json(Some(&stats), &value)?;
            println!(
                "trajectories = {count}, tv_distance = {:.4}, speed_ratio = {:.2}, flagged = {}",
                st.tv_distance,
                st.speed_ratio,
                ens.flagged()
            );
        }
        Command::Chain {
            sites,
            jpeak,
            width,
            delay,
            total,
            dt,
            out,
            verify_darkstate,
        } => {
            if sites < 3 || sites % 2 == 0 {
                return Err(usage(format!(
                    "--sites must be odd and at least 3, got {sites}"
                )));
            }
            if verify_darkstate {
                let model = HoleChainModel::new(vec![1.0; sites - 1])?;
                let d = multisite_dark_state(&model)?;
                let h = chain_hamiltonian(&model);
                let residual = h
                    .iter()
                    .map(|row| row.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>().powi(2))
                    .sum::<f64>()
                    .sqrt();
                println!("sites = {sites}, dark-state residual = {residual:.3e}");
                return Ok(());
            }
            let schedule = even_odd_pulse_schedule(sites, jpeak, width, delay, total)?;
            let every = ((1.0 / dt).round() as usize).max(1);
            let run = propagate_pulses(&schedule, dt, every)?;
            let provenance = json!({"schedule": schedule, "dt": dt});
            let mut w = create(&out)?;
            writeln!(w, "# config: {}", serde_json::to_string(&provenance)?)?;
            writeln!(w, "# config_hash: {}", content_hash(&provenance))?;
            run.write_csv(&mut w)?;
            w.flush()?;
            let pops = run.final_populations();
            println!("final site-{sites} population = {:.6}", pops[sites - 1]);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
