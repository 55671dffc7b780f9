use std::path::Path;
use std::process::Command;

use kerrnet::cli::{emit_config, parse_config, preset_config, run_sweep, write_csv, ScanVariable, SweepSpec};
use kerrnet::model::{preset, PRESET_NAMES};
use proptest::prelude::*;

fn shipped(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(format!("{name}.conf"));
    std::fs::read_to_string(path).unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kerrnet"))
}

fn csv(result: &kerrnet::cli::SweepResult) -> String {
    let mut buf = Vec::new();
    write_csv(result, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn shipped_configs_match_presets() {
    for name in PRESET_NAMES {
        let parsed = parse_config(&shipped(name)).unwrap();
        let (network, sweep) = preset_config(name).unwrap();
        assert_eq!(parsed.network, network, "{name}");
        assert_eq!(parsed.sweep, sweep, "{name}");
    }
}

#[test]
fn sweep_is_independent_of_worker_count() {
    let network = preset("fig4_cyclic3").unwrap();
    let sweep = SweepSpec {
        variable: ScanVariable::Phase,
        start: 0.0,
        stop: 6.0,
        points: 7,
        drive_ports: vec!["a".into(), "b".into()],
    };
    let one = run_sweep(&network, &sweep, Some(1)).unwrap();
    let three = run_sweep(&network, &sweep, Some(3)).unwrap();
    assert_eq!(csv(&one), csv(&three));
    let grid = one.grid();
    assert!(grid.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(grid, sweep.grid());
}

#[test]
fn run_writes_csv_and_validate_reports() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("small.conf");
    let text = shipped("fig2_asym_molecule")
        .replace("start = -10", "start = -1")
        .replace("stop = 10", "stop = 1")
        .replace("points = 401", "points = 3");
    std::fs::write(&config, text).unwrap();
    let out = dir.path().join("small.csv");

    let status = bin().arg("run").arg(&config).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let body = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = body.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("detuning,"));
    assert!(lines[1..].iter().all(|l| l.ends_with(",ok")));

    let check = bin().arg("validate").arg(&config).output().unwrap();
    assert_eq!(check.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&check.stdout).starts_with("ok: 2 modes"));
}

#[test]
fn bad_input_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.conf");
    std::fs::write(&config, "[mode]\nlabel = a\nkerr = 1\n").unwrap();
    let out = bin().arg("validate").arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    let unknown = bin().args(["preset", "nope"]).output().unwrap();
    assert_eq!(unknown.status.code(), Some(1));

    let listed = bin().arg("list-presets").output().unwrap();
    assert_eq!(String::from_utf8_lossy(&listed.stdout).lines().count(), PRESET_NAMES.len());
}

#[test]
fn emitted_preset_config_parses_back() {
    let out = bin().args(["preset", "fig7_circulator", "--emit-config"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let parsed = parse_config(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!((parsed.network, parsed.sweep), preset_config("fig7_circulator").unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_round_trip(
        kerr in 0.0..10.0f64,
        gamma in 0.01..50.0f64,
        g in 0.01..5.0f64,
        phase in 0.0..std::f64::consts::TAU,
        detuning in -20.0..20.0f64,
        points in 1usize..500,
    ) {
        let network = preset("fig6_sym_molecule")
            .unwrap()
            .with_kerr("b", kerr)
            .unwrap()
            .with_gamma("c", gamma)
            .unwrap()
            .with_coupling_strength("b", "c", g)
            .unwrap()
            .with_coupling_phase(0, phase)
            .unwrap()
            .with_detuning(detuning);
        let sweep = SweepSpec { variable: ScanVariable::Detuning, start: -3.0, stop: 4.5, points, drive_ports: vec!["b".into()] };
        let parsed = parse_config(&emit_config(&network, &sweep)).unwrap();
        prop_assert_eq!(parsed.network, network);
        prop_assert_eq!(parsed.sweep, sweep);
    }
}
