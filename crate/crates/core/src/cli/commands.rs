//! The subcommands. Each returns whether everything it checked passed; errors are
//! reported by the caller.

use std::fs;
use std::path::{Path, PathBuf};

use super::config::{load_config, LoadedConfig};
use super::io::{self, read_run, rebuild_state, write_report, write_run, MONITORS};
use super::verify::verify_suite;
use crate::diagnostics::{DiagnosticsReport, MonitorSet, ReportOptions};
use crate::error::{LakeError, Result};
use crate::solver::{run_simulation, theta_study, viscosity_study, Problem, Trajectory};

pub const DEFAULT_NUS: [f64; 3] = [1e-2, 1e-3, 1e-4];
pub const DEFAULT_THETAS: [f64; 3] = [0.2, 0.1, 0.05];

/// Comma-separated list of numbers.
pub fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| LakeError::InvalidArgument(format!("not a number: {s:?}"))))
        .collect()
}

fn output_dir(out: Option<&Path>, loaded: &LoadedConfig, config_path: &Path) -> PathBuf {
    out.map(Path::to_path_buf)
        .or_else(|| {
            loaded.output.dir.as_ref().map(|d| {
                if d.is_absolute() {
                    d.clone()
                } else {
                    config_path.parent().unwrap_or_else(|| Path::new(".")).join(d)
                }
            })
        })
        .unwrap_or_else(|| PathBuf::from("lakesim-out"))
}

fn load(config_path: &Path) -> Result<(LoadedConfig, String)> {
    let (loaded, text) = load_config(config_path)?;
    for w in &loaded.warnings {
        log::warn!("{w}");
    }
    Ok((loaded, text))
}

fn print_verdicts(report: &DiagnosticsReport) {
    for (name, ok) in &report.verdicts {
        println!("{} {name}", if *ok { "PASS" } else { "FAIL" });
    }
}

/// The stored states of a run rebuilt exactly as `diag` rebuilds them from disk.
fn stored_trajectory(problem: &Problem<'_>, traj: &Trajectory, indices: &[usize]) -> Trajectory {
    let states = indices
        .iter()
        .map(|&i| {
            let s = &traj.states[i];
            rebuild_state(problem, s.t, s.omega.clone(), s.stream.clone(), s.flux.clone())
        })
        .collect();
    Trajectory {
        states,
        steps: Vec::new(),
        config: traj.config.clone(),
        cutoff: traj.cutoff,
        failure: traj.failure.as_ref().map(|e| LakeError::Format(e.to_string())),
    }
}

/// Runs one simulation, writes snapshots, the manifest and the monitor files.
pub fn run(config_path: &Path, out: Option<&Path>, monitors: Option<MonitorSet>) -> Result<bool> {
    let (loaded, text) = load(config_path)?;
    let dir = output_dir(out, &loaded, config_path);
    let traj = run_simulation(&loaded.domain, &loaded.scenario, &loaded.solver)?;
    if let Some(e) = &traj.failure {
        log::error!("run stopped at t = {}: {e}", traj.last().t);
    }
    let indices = write_run(&dir, &loaded.domain, &text, &traj, loaded.output.cadence)?;
    let problem = Problem::new(&loaded.domain, &loaded.scenario)?;
    let stored = stored_trajectory(&problem, &traj, &indices);
    let options = ReportOptions { monitors: monitors.unwrap_or(loaded.output.monitors), ..Default::default() };
    let report = DiagnosticsReport::compute(&problem, &stored, &options)?;
    write_report(&dir, &report)?;
    print_verdicts(&report);
    println!(
        "{} states written to {}, final t = {}",
        indices.len(),
        dir.display(),
        traj.last().t
    );
    Ok(report.passed() && traj.is_complete())
}

/// Recomputes the monitors of a run directory from its snapshots into `<dir>/diag`
/// and compares the monitor table with the one written by the run.
pub fn diag(config_path: &Path, out: Option<&Path>, monitors: Option<MonitorSet>) -> Result<bool> {
    let (loaded, text) = load(config_path)?;
    let dir = output_dir(out, &loaded, config_path);
    let problem = Problem::new(&loaded.domain, &loaded.scenario)?;
    let (manifest, traj) = read_run(&dir, &problem)?;
    if manifest.config_sha256 != io::config_hash(&text) {
        log::warn!("scenario file changed since the run");
    }
    let options = ReportOptions { monitors: monitors.unwrap_or(loaded.output.monitors), ..Default::default() };
    let report = DiagnosticsReport::compute(&problem, &traj, &options)?;
    let diag_dir = dir.join("diag");
    write_report(&diag_dir, &report)?;
    print_verdicts(&report);
    let identical = match fs::read_to_string(dir.join(MONITORS)) {
        Ok(stored) => stored == io::monitors_csv(&report),
        Err(_) => false,
    };
    println!(
        "{} monitor table {} the stored one",
        if identical { "PASS" } else { "FAIL" },
        if identical { "reproduces" } else { "differs from" }
    );
    if !manifest.complete {
        println!("FAIL run is incomplete: {}", manifest.failure.as_deref().unwrap_or("interrupted"));
    }
    Ok(report.passed() && identical && manifest.complete)
}

/// ν- or θ-study; writes `study_nu.csv` or `study_theta.csv`.
pub fn study(config_path: &Path, out: Option<&Path>, values: &[f64], theta: bool) -> Result<bool> {
    let (loaded, _) = load(config_path)?;
    let dir = output_dir(out, &loaded, config_path);
    fs::create_dir_all(&dir)?;
    let (report, name, param) = if theta {
        (theta_study(&loaded.domain, &loaded.scenario, &loaded.solver, values)?, "study_theta.csv", "theta")
    } else {
        (viscosity_study(&loaded.domain, &loaded.scenario, &loaded.solver, values)?, "study_nu.csv", "nu")
    };
    io::write_atomic(&dir.join(name), &io::study_csv(&report, param))?;
    let complete = report.rows.iter().all(|r| r.complete);
    for r in &report.rows {
        println!(
            "{} {param} = {}: sup|omega| = {}, final t = {}",
            if r.complete { "PASS" } else { "FAIL" },
            r.param,
            r.sup_omega,
            r.final_time
        );
    }
    println!(
        "differences non-increasing: {}, sup|omega| variation {:.4}",
        report.differences_non_increasing(),
        report.sup_variation()
    );
    Ok(complete)
}

/// Runs the verification suite and prints one line per case.
pub fn verify(seed: u64) -> bool {
    let cases = verify_suite(seed);
    for c in &cases {
        println!("{} {} ({:.1} s): {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.seconds, c.detail);
    }
    cases.iter().all(|c| c.passed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists() {
        assert_eq!(parse_list("1e-2, 1e-3,1e-4").unwrap(), vec![1e-2, 1e-3, 1e-4]);
        assert!(parse_list("0.1,x").is_err());
    }
}
