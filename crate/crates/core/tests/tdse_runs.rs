//! Short two-atom evolutions on a coarse grid.

use holetron::bohm::{
    ensemble_statistics, integrate_trajectories, sample_initial, BohmOptions, TrajectoryFlag,
};
use holetron::config::RunConfig;
use holetron::experiments::transport;
use holetron::tdse::{FrameReader, FrameSource, FrameWriter, MemoryFrames};
use holetron::{FirstMover, Symmetry, TrapSchedule};

/// Fast schedule: quick ramps that still move population around.
fn quick(symmetry: Symmetry, alpha_as: f64) -> RunConfig {
    let mut cfg = RunConfig {
        schedule: TrapSchedule {
            t_delay: 8.0,
            t_ramp: 12.0,
            t_hold: 6.0,
            t_pre: 1.0,
            t_post: 1.0,
            ..TrapSchedule::default()
        },
        ..RunConfig::default()
    };
    cfg.grid.x_min = -14.0;
    cfg.grid.x_max = 14.0;
    cfg.grid.points_per_axis = 144;
    cfg.grid.dt = 0.01;
    cfg.grid.frame_stride = 20;
    cfg.params.symmetry = symmetry;
    cfg.params.scaled_scattering_length = alpha_as;
    cfg.validate().unwrap();
    cfg
}

#[test]
fn norm_and_exchange_symmetry_are_preserved() {
    for sym in [Symmetry::Fermionic, Symmetry::Bosonic] {
        let run = transport(&quick(sym, 0.0232), None).unwrap();
        let r = &run.report;
        assert!(r.norm_drift <= 1e-8, "{sym}: drift {}", r.norm_drift);
        assert!(
            r.symmetry_error <= 1e-10,
            "{sym}: asymmetry {}",
            r.symmetry_error
        );
        assert!(run.evolution.final_state.symmetry_error() <= 1e-12);
        let total: f64 = (1..=3).map(|j| r.fidelity(j)).sum();
        assert!(total <= 1.0 + 1e-9);
    }
}

#[test]
fn fermions_ignore_the_contact_interaction() {
    let free = transport(&quick(Symmetry::Fermionic, 0.0), None).unwrap();
    let strong = transport(&quick(Symmetry::Fermionic, 0.4), None).unwrap();
    let a = &free.evolution.final_state.amplitudes;
    let b = &strong.evolution.final_state.amplitudes;
    let diff = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    assert!(diff <= 1e-6, "state difference {diff}");
}

#[test]
fn bosons_feel_the_contact_interaction() {
    let free = transport(&quick(Symmetry::Bosonic, 0.0), None).unwrap();
    let strong = transport(&quick(Symmetry::Bosonic, 0.4), None).unwrap();
    let d = (free.report.fidelity(3) - strong.report.fidelity(3)).abs()
        + (free.report.fidelity(1) - strong.report.fidelity(1)).abs();
    assert!(d > 1e-3, "interaction had no effect ({d})");
}

#[test]
fn mirrored_schedule_mirrors_the_transfer() {
    let mut fwd = quick(Symmetry::Fermionic, 0.0);
    fwd.hole_site = 1;
    let mut back = fwd.clone();
    back.hole_site = 3;
    back.schedule.first_mover = FirstMover::LeftTrap;
    let a = transport(&fwd, None).unwrap().report;
    let b = transport(&back, None).unwrap().report;
    // the periodic grid point at x_min is its own mirror image, so the
    // reflection is exact only up to that one potential sample
    for (i, j) in [(3, 1), (2, 2), (1, 3)] {
        assert!(
            (a.fidelity(i) - b.fidelity(j)).abs() < 1e-7,
            "{i} vs {j}: {} {}",
            a.fidelity(i),
            b.fidelity(j)
        );
    }
}

#[test]
fn halving_dt_barely_changes_the_fidelity() {
    let coarse = quick(Symmetry::Fermionic, 0.0);
    let mut fine = coarse.clone();
    fine.grid.dt = 0.005;
    fine.grid.frame_stride = 40;
    let a = transport(&coarse, None).unwrap().report.fidelity(3);
    let b = transport(&fine, None).unwrap().report.fidelity(3);
    assert!((a - b).abs() < 1e-4, "{a} vs {b}");
}

#[test]
fn stored_frames_round_trip() {
    let cfg = quick(Symmetry::Fermionic, 0.0);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.qhwf");
    let mut writer = FrameWriter::create(&path).unwrap();
    let run = transport(&cfg, Some(&mut writer)).unwrap();
    drop(writer);

    let mut reader = FrameReader::open(&path).unwrap();
    let header = *reader.header();
    assert_eq!(header.frame_count as usize, run.report.frame_count);
    assert_eq!(header.points_per_axis, 144);
    assert_eq!(header.symmetry, Symmetry::Fermionic);
    let last = reader.read_state(header.frame_count - 1).unwrap();
    assert_eq!(last.amplitudes, run.evolution.final_state.amplitudes);
}

#[test]
fn frame_store_rejects_garbage() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("junk.qhwf");
    std::fs::write(&path, b"not a frame store").unwrap();
    assert!(matches!(
        FrameReader::open(&path),
        Err(holetron::Error::FrameStore { .. })
    ));
}

#[test]
fn trajectories_reproduce_the_final_density() {
    let cfg = quick(Symmetry::Fermionic, 0.0);
    let mut frames = MemoryFrames::new();
    let run = transport(&cfg, Some(&mut frames)).unwrap();
    frames.rewind();
    let first = {
        let h = *frames.header();
        let mut amp = vec![Default::default(); h.frame_len()];
        frames.next_frame(&mut amp).unwrap();
        frames.rewind();
        h.state(0, amp).unwrap()
    };
    let points = sample_initial(&first, 2000, 7).unwrap();
    let ens = integrate_trajectories(&mut frames, &points, 7, &BohmOptions::default()).unwrap();
    assert_eq!(ens.len(), 2000);
    let stats = ensemble_statistics(&ens, &run.evolution.final_state).unwrap();
    // 2000 samples over 65 bins: statistical floor near 0.05
    assert!(stats.tv_distance <= 0.1, "tv {}", stats.tv_distance);
    // fermionic trajectories never sit on the node x1 = x2
    for (traj, flag) in ens.positions.iter().zip(&ens.flags) {
        if *flag == TrajectoryFlag::Ok {
            let p = traj.last().unwrap();
            assert!((p[0] - p[1]).abs() > 1e-6);
        }
    }
}
