use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use vofl_app::config::parse_config;
use vofl_app::presets::preset;

const SMALL: [&str; 8] = [
    "--override",
    "geometry.length=10",
    "--override",
    "regions.split=5",
    "--override",
    "time.t_end=1",
    "--override",
    "output.snapshot_every=0.5",
];

fn vofl(args: &[&str], out_env: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_vofl"));
    cmd.args(args).env_remove("VOFL_OUT_DIR");
    if let Some(dir) = out_env {
        cmd.env("VOFL_OUT_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn print_config_round_trips() {
    let o = vofl(&["preset", "fisher-1d", "--print-config"], None);
    assert_eq!(code(&o), 0);
    let cfg = parse_config(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(cfg, preset("fisher-1d").unwrap());
}

#[test]
fn preset_run_writes_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["preset", "fisher-1d", "--out"];
    args.push(dir.path().to_str().unwrap());
    args.extend(SMALL);
    let o = vofl(&args, None);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mut names: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(
        names,
        ["activation.dat", "config.toml", "snapshot_00000.dat", "snapshot_00001.dat", "snapshot_00002.dat"]
    );
    let written = parse_config(&fs::read_to_string(dir.path().join("config.toml")).unwrap()).unwrap();
    assert_eq!(written.time.t_end, 1.0);
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["preset", "fisher-1d"];
    args.extend(SMALL);
    let o = vofl(&args, Some(dir.path()));
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(dir.path().join("snapshot_00002.dat").exists());
}

#[test]
fn configuration_errors_exit_2() {
    let o = vofl(&["preset", "nope"], None);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("fisher-1d"));

    let o = vofl(&["preset", "br-heart-3d"], None);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("mesh"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    let text = preset("fisher-1d").unwrap().to_toml().replace("alpha1 = 1.5", "alpha1 = 2.5");
    fs::write(&path, text).unwrap();
    let o = vofl(&["simulate", path.to_str().unwrap()], None);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("orders.alpha1"), "{}", stderr(&o));

    let o = vofl(&["simulate", dir.path().join("missing.toml").to_str().unwrap()], None);
    assert_eq!(code(&o), 2);
}

#[test]
fn numerical_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["preset", "fisher-1d", "--out"];
    args.push(dir.path().to_str().unwrap());
    args.extend(SMALL);
    args.extend(["--override", "picard.max_iter=1", "--override", "picard.tol=1e-14"]);
    let o = vofl(&args, None);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("Picard"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&vofl(&[], None)), 2);
    assert_eq!(code(&vofl(&["--help"], None)), 0);
}
