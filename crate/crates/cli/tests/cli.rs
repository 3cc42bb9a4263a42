use std::path::Path;
use std::process::{Command, Output};

fn holetron(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holetron"))
        .args(args)
        .current_dir(dir)
        .env("HOLETRON_WORKERS", "1")
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Flags for a seconds-long transport on a coarse grid.
const QUICK: &[&str] = &[
    "--set",
    "t_delay=8",
    "--set",
    "t_ramp=12",
    "--set",
    "t_hold=6",
    "--set",
    "t_pre=1",
    "--set",
    "t_post=1",
    "--set",
    "x_min=-14",
    "--set",
    "x_max=14",
    "--points",
    "144",
    "--dt",
    "0.01",
    "--set",
    "frame_stride=20",
];

#[test]
fn missing_config_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = holetron(&["transport", "--config", "absent.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("absent.json"));
}

#[test]
fn bad_keys_and_values_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let out = holetron(&["transport", "--set", "warp=3"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("warp"));
    let out = holetron(&["transport", "--set", "d_min=-1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("d_min"));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(holetron(&["teleport"], dir.path()).status.code(), Some(2));
}

#[test]
fn corrupt_frame_store_exits_with_data_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.qhwf"), b"garbage").unwrap();
    let out = holetron(&["bohm", "--frames", "bad.qhwf"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn dark_state_residual_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let out = holetron(&["chain", "--sites", "7", "--verify-darkstate"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let residual: f64 = text.trim().rsplit(' ').next().unwrap().parse().unwrap();
    assert!(residual <= 1e-12);
}

#[test]
fn chain_writes_a_population_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = holetron(&["chain", "--sites", "5", "--out", "c.csv"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert!(csv.starts_with("# config:"));
    assert!(csv.contains("# config_hash:"));
    assert!(
        holetron(&["chain", "--sites", "4"], dir.path())
            .status
            .code()
            == Some(2)
    );
}

#[test]
fn transport_then_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["transport", "--report", "r.json", "--frames", "f.qhwf"];
    args.extend_from_slice(QUICK);
    let out = holetron(&args, dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(String::from_utf8_lossy(&out.stdout).contains("F_1to3"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["t_ramp"], 12.0);
    assert_eq!(report["config_hash"].as_str().unwrap().len(), 64);
    assert!(report["norm_drift"].as_f64().unwrap() < 1e-8);

    let out = holetron(
        &[
            "bohm", "--frames", "f.qhwf", "--count", "300", "--seed", "3", "--out", "t.csv",
            "--stats", "s.json",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let stats: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.json")).unwrap()).unwrap();
    assert_eq!(stats["count"], 300);
    assert_eq!(stats["config"]["seed"], 3);
    let csv = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert!(csv
        .lines()
        .any(|l| l.starts_with("trajectory_id,t,x1,x2,speed,flag")));
}

#[test]
fn sweep_rejects_three_axes_and_bad_grids() {
    let dir = tempfile::tempdir().unwrap();
    let out = holetron(
        &[
            "sweep",
            "--grid",
            "t_hold=1:2:2",
            "--grid",
            "t_ramp=1:2:2",
            "--grid",
            "t_pre=1:2:2",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let out = holetron(&["sweep", "--grid", "t_hold=1:2"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_precedence() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.json"),
        r#"{"t_hold": 3.0, "t_ramp": 12.0}"#,
    )
    .unwrap();
    let mut args = vec!["transport", "--config", "c.json", "--report", "r.json"];
    args.extend_from_slice(QUICK);
    // flags come after the file and win
    let out = holetron(&args, dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["t_hold"], 6.0);
}
