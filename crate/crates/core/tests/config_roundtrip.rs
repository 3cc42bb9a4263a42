use proptest::prelude::*;

use holetron::config::{content_hash, RunConfig};
use serde_json::json;

proptest! {
    #[test]
    fn echo_reloads_to_the_same_config(
        t_ramp in 1.0f64..400.0,
        t_hold in 0.0f64..300.0,
        alpha_as in -0.1f64..0.5,
        seed in 0u64..1_000_000,
        bosonic in any::<bool>(),
    ) {
        let mut cfg = RunConfig::default();
        cfg.set_number("t_ramp", t_ramp).unwrap();
        cfg.set_number("t_hold", t_hold).unwrap();
        cfg.set_number("alpha_as", alpha_as).unwrap();
        cfg.seed = seed;
        cfg.set("symmetry", if bosonic { "bosonic" } else { "fermionic" }).unwrap();
        let echo = cfg.to_value();
        let back = RunConfig::from_value(&echo).unwrap();
        prop_assert_eq!(back.to_value(), echo.clone());
        prop_assert_eq!(back.hash(), cfg.hash());
        prop_assert_eq!(cfg.hash(), content_hash(&echo));
    }

    #[test]
    fn distinct_configs_hash_apart(a in 0.0f64..0.05, b in 0.0f64..0.05) {
        prop_assume!(a != b);
        let mut x = RunConfig::default();
        let mut y = RunConfig::default();
        x.set_number("alpha_as", a).unwrap();
        y.set_number("alpha_as", b).unwrap();
        prop_assert_ne!(x.hash(), y.hash());
    }
}

#[test]
fn file_overrides_defaults_and_keeps_the_rest() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(
        &path,
        json!({"t_hold": 42.0, "symmetry": "bosonic"}).to_string(),
    )
    .unwrap();
    let cfg = RunConfig::from_path(&path).unwrap();
    assert_eq!(cfg.schedule.t_hold, 42.0);
    assert_eq!(cfg.params.symmetry, holetron::Symmetry::Bosonic);
    assert_eq!(cfg.schedule.t_ramp, RunConfig::default().schedule.t_ramp);
}

#[test]
fn broken_files_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{ not json").unwrap();
    assert!(RunConfig::from_path(&path).is_err());
    std::fs::write(&path, json!({"d_min": 20.0}).to_string()).unwrap();
    match RunConfig::from_path(&path) {
        Err(holetron::Error::Config { key, .. }) => assert_eq!(key, "d_min"),
        other => panic!("unexpected {other:?}"),
    }
}
