//! End-to-end runs of the `lakesim` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL_RUN: &str = r#"[domain]
shape = "disk"
radius = 1.0
resolution = 16

[data]
b = "1 + 0.1*x"
omega0 = "sin(pi*x)*cos(pi*y)"
kappa = 0.2

[solver]
t_end = 0.05
"#;

fn lakesim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lakesim")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("scenario.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn zero_length_run_writes_one_state() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &SMALL_RUN.replace("t_end = 0.05", "t_end = 0.0"));
    let out = dir.path().join("out");
    let o = lakesim(&["run", "--config", &config, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    let snapshots = fs::read_dir(out.join("snapshots")).unwrap().count();
    assert_eq!(snapshots, 1);
    let monitors = fs::read_to_string(out.join("monitors.csv")).unwrap();
    assert_eq!(monitors.lines().count(), 2);
    assert!(out.join("MANIFEST.json").exists());
}

#[test]
fn diag_reproduces_the_monitor_table() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_RUN);
    let out = dir.path().join("out");
    let o = lakesim(&["run", "--config", &config, "--out", out.to_str().unwrap(), "--monitors", "all"]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    let o = lakesim(&["diag", "--config", &config, "--out", out.to_str().unwrap(), "--monitors", "all"]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("PASS monitor table reproduces"));
    let stored = fs::read(out.join("monitors.csv")).unwrap();
    let recomputed = fs::read(out.join("diag").join("monitors.csv")).unwrap();
    assert_eq!(stored, recomputed);
}

#[test]
fn viscosity_study_writes_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_RUN);
    let out = dir.path().join("study");
    let o = lakesim(&["study-nu", "--config", &config, "--out", out.to_str().unwrap(), "--nu", "1e-2,1e-3,1e-4"]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    let table = fs::read_to_string(out.join("study_nu.csv")).unwrap();
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    let with_difference = rows.iter().filter(|r| !r.split(',').nth(5).unwrap().is_empty()).count();
    assert_eq!(with_difference, 2);
}

#[test]
fn config_errors_exit_with_a_position() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "[domain]\nshape = \"square\"\nresolution = 16\n[data]\nkappa = \"q*x\"\n");
    let o = lakesim(&["run", "--config", &config, "--out", dir.path().join("out").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 5, column 9"), "{}", stderr(&o));

    let config = write_config(dir.path(), "[domain]\nshape = \"disk\"\nradius = 1.0\nresolution = 4\n");
    let o = lakesim(&["run", "--config", &config]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unsorted_study_values_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_RUN);
    let o = lakesim(&["study-nu", "--config", &config, "--out", dir.path().to_str().unwrap(), "--nu", "1e-4,1e-2"]);
    assert_eq!(o.status.code(), Some(2));
}
