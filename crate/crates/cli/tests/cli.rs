//! End-to-end checks of the binary: determinism, exit codes, file formats.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn weaksim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weaksim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("weaksim-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("tempdir");
    dir.join(name)
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).expect("output file exists")
}

#[test]
fn sample_runs_are_byte_identical_for_fixed_seed() {
    let out_a = tmp("shots_a.csv");
    let out_b = tmp("shots_b.csv");
    let args = |out: &Path| {
        vec![
            "sample".to_string(),
            "--scenario".into(),
            "product_phase".into(),
            "--delta".into(),
            "3".into(),
            "--shots".into(),
            "5000".into(),
            "--seed".into(),
            "11".into(),
            "--out".into(),
            out.display().to_string(),
        ]
    };
    let run_a = Command::new(env!("CARGO_BIN_EXE_weaksim"))
        .args(args(&out_a))
        .output()
        .unwrap();
    let run_b = Command::new(env!("CARGO_BIN_EXE_weaksim"))
        .args(args(&out_b))
        .output()
        .unwrap();
    assert!(run_a.status.success());
    assert_eq!(run_a.stdout, run_b.stdout);
    assert_eq!(read(&out_a), read(&out_b));

    // a different seed must change the file
    let out_c = tmp("shots_c.csv");
    let mut args_c = args(&out_c);
    let seed_pos = args_c.iter().position(|a| a == "11").unwrap();
    args_c[seed_pos] = "12".into();
    let run_c = Command::new(env!("CARGO_BIN_EXE_weaksim"))
        .args(args_c)
        .output()
        .unwrap();
    assert!(run_c.status.success());
    assert_ne!(read(&out_a), read(&out_c));
}

#[test]
fn csv_headers_are_stable() {
    let out = tmp("sweep_header.csv");
    let run = weaksim(&[
        "sweep",
        "--scenario",
        "two_state_22",
        "--delta-min",
        "50",
        "--delta-max",
        "200",
        "--delta-points",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(run.status.success());
    let text = read(&out);
    assert!(text.starts_with("delta,device,estimator,estimate,target,rel_deviation\n"));

    let out = tmp("shots_header.csv");
    let run = weaksim(&[
        "sample",
        "--scenario",
        "singlet_sum",
        "--delta",
        "10",
        "--shots",
        "100",
        "--seed",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(run.status.success());
    assert!(read(&out).starts_with("shot_index,postselected,S\n"));
}

#[test]
fn unknown_scenario_exits_with_config_code() {
    let run = weaksim(&["weakvalue", "--scenario", "no_such_thing"]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn invalid_sweep_bounds_exit_with_config_code() {
    let out = tmp("never.csv");
    let run = weaksim(&[
        "sweep",
        "--scenario",
        "two_state_22",
        "--delta-min",
        "300",
        "--delta-max",
        "100",
        "--delta-points",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn degenerate_selection_exits_with_physics_code() {
    // orthogonal pre/post: a physics error, not a config error
    let path = tmp("degenerate.json");
    let spec = serde_json::json!({
        "name": "degenerate",
        "dims": [2, 2],
        "pre":  [[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 0.0]],
        "post": [[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0], [0.0, 0.0]],
        "observables": [
            {"op": "sigma_z", "site": 0},
            {"op": "sigma_z", "site": 1}
        ],
        "combine": "sum",
        "topology": "local-product",
        "delta": 10.0
    });
    std::fs::write(&path, serde_json::to_string_pretty(&spec).unwrap()).unwrap();
    let run = weaksim(&["weakvalue", "--scenario", path.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(3));
}

#[test]
fn scenario_export_round_trips_through_the_cli() {
    let path = tmp("exported.json");
    let run = weaksim(&[
        "scenario",
        "export",
        "--scenario",
        "product_phase",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(run.status.success());

    let direct = weaksim(&["weakvalue", "--scenario", "product_phase", "--format", "json"]);
    let via_file = weaksim(&["weakvalue", "--scenario", path.to_str().unwrap(), "--format", "json"]);
    assert!(via_file.status.success());
    assert_eq!(direct.stdout, via_file.stdout);
}

#[test]
fn report_files_are_byte_identical() {
    let a = tmp("report_a.md");
    let b = tmp("report_b.md");
    assert!(weaksim(&["report", "--out", a.to_str().unwrap()]).status.success());
    assert!(weaksim(&["report", "--out", b.to_str().unwrap()]).status.success());
    let text = read(&a);
    assert_eq!(text, read(&b));
    assert!(text.contains("checks passed"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn moments_grid_flags_are_honored() {
    let run = weaksim(&[
        "moments",
        "--scenario",
        "epsilon_sum",
        "--delta",
        "5",
        "--grid-extent",
        "4",
    ]);
    // extent below the required coverage is a config error
    assert_eq!(run.status.code(), Some(2));
}
