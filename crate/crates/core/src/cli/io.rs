//! Output files: snapshot CSVs, the manifest, monitor and study tables.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diagnostics::DiagnosticsReport;
use crate::domain::{Domain, Shape};
use crate::elliptic::{reconstruct_velocity, StateFields};
use crate::error::{LakeError, Result};
use crate::solver::{Problem, SolverConfig, StudyReport, Trajectory};

pub const MANIFEST: &str = "MANIFEST.json";
pub const SNAPSHOT_DIR: &str = "snapshots";
pub const MONITORS: &str = "monitors.csv";
pub const VERDICTS: &str = "verdicts.csv";
pub const SUMMARY: &str = "summary.json";
const SNAPSHOT_HEADER: &str = "x,y,omega,h,H,u,v";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub nx: usize,
    pub ny: usize,
    pub origin: [f64; 2],
    pub dx: f64,
    pub dy: f64,
    pub active_cells: usize,
    pub shore_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub file: String,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    /// SHA-256 of the scenario file text, lower-case hex.
    pub config_sha256: String,
    pub complete: bool,
    pub failure: Option<String>,
    pub shape: Shape,
    pub resolution: usize,
    pub grid: GridInfo,
    pub solver: SolverConfig,
    pub cutoff: f64,
    pub steps: usize,
    pub snapshots: Vec<SnapshotEntry>,
}

pub fn config_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

impl GridInfo {
    pub fn of(domain: &Domain) -> Self {
        GridInfo {
            nx: domain.grid.nx,
            ny: domain.grid.ny,
            origin: domain.grid.origin,
            dx: domain.grid.dx,
            dy: domain.grid.dy,
            active_cells: domain.len(),
            shore_nodes: domain.boundary.len(),
        }
    }
}

impl Manifest {
    pub fn read(dir: &Path) -> Result<Self> {
        let text = fs::read_to_string(dir.join(MANIFEST))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_atomic(&dir.join(MANIFEST), &(serde_json::to_string_pretty(self)? + "\n"))
    }
}

/// Writes through a temporary file so readers never see a torn file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn snapshot_name(index: usize) -> String {
    format!("{SNAPSHOT_DIR}/snap_{index:05}.csv")
}

/// One row per active cell; every number in Rust's shortest round-trip form.
pub fn snapshot_csv(domain: &Domain, state: &StateFields) -> String {
    let velocity = state.velocity.cell_centered(domain);
    let mut out = String::with_capacity(domain.len() * 120);
    out.push_str(SNAPSHOT_HEADER);
    out.push('\n');
    for (c, p) in domain.grid.centers.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p[0], p[1], state.omega[c], state.stream[c], state.flux[c], velocity[c][0], velocity[c][1]
        );
    }
    out
}

/// ω, h and H from a snapshot written by [`snapshot_csv`] on the same grid.
pub fn read_snapshot(path: &Path, domain: &Domain) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut reader = csv::Reader::from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != SNAPSHOT_HEADER {
        return Err(LakeError::Format(format!("{}: unexpected header {:?}", path.display(), header.join(","))));
    }
    let n = domain.len();
    let (mut omega, mut h, mut big_h) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for (k, record) in reader.records().enumerate() {
        let record = record?;
        let value = |i: usize| -> Result<f64> {
            record[i]
                .parse::<f64>()
                .map_err(|e| LakeError::Format(format!("{} row {}: {e}", path.display(), k + 2)))
        };
        let p = domain.grid.centers.get(k).ok_or_else(|| {
            LakeError::Format(format!("{}: more rows than the {n} active cells", path.display()))
        })?;
        if value(0)? != p[0] || value(1)? != p[1] {
            return Err(LakeError::Format(format!("{} row {}: cell center does not match the grid", path.display(), k + 2)));
        }
        omega.push(value(2)?);
        h.push(value(3)?);
        big_h.push(value(4)?);
    }
    if omega.len() != n {
        return Err(LakeError::Format(format!("{}: {} rows for {n} active cells", path.display(), omega.len())));
    }
    Ok((omega, h, big_h))
}

/// The stored state at time t from ω, h and H; the velocity is rebuilt from the
/// potentials and the shoreline flux data at t.
/// With a ≡ 0 and A ≡ 0 the recovered fluxes vanish because H does.
pub fn rebuild_state(problem: &Problem<'_>, t: f64, omega: Vec<f64>, stream: Vec<f64>, flux: Vec<f64>) -> StateFields {
    let scenario = problem.scenario;
    let a = scenario.a.at(t);
    let source = scenario.source.at(t);
    let shore_flux = problem.ops.shore_fluxes(problem.domain, &a, &scenario.b_shore, &source, &flux);
    let velocity = reconstruct_velocity(problem.domain, &problem.ops, &stream, &flux, &shore_flux);
    StateFields { t, omega, stream, flux, velocity }
}

/// Indices of the states written at the given cadence: every `cadence`-th plus the last.
pub fn output_indices(count: usize, cadence: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..count).step_by(cadence.max(1)).collect();
    if count > 0 && idx.last() != Some(&(count - 1)) {
        idx.push(count - 1);
    }
    idx
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

pub const MONITOR_HEADER: &str =
    "t,sup_omega,lp_norm,maxprinciple_reference,gronwall_lhs,gronwall_rhs,gronwall_slack,compatibility_residual";

pub fn monitors_csv(report: &DiagnosticsReport) -> String {
    let mut out = String::from(MONITOR_HEADER);
    out.push('\n');
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.t,
            r.sup_omega,
            opt(r.lp_norm),
            opt(r.max_principle_reference),
            opt(r.gronwall_lhs),
            opt(r.gronwall_rhs),
            opt(r.gronwall_slack),
            opt(r.compatibility)
        );
    }
    out
}

pub fn verdicts_csv(report: &DiagnosticsReport) -> String {
    let mut out = String::from("monitor,status\n");
    for (name, ok) in &report.verdicts {
        let _ = writeln!(out, "{name},{}", if *ok { "PASS" } else { "FAIL" });
    }
    out
}

/// Writes the monitor table, the verdicts and the JSON summary into `dir`.
pub fn write_report(dir: &Path, report: &DiagnosticsReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_atomic(&dir.join(MONITORS), &monitors_csv(report))?;
    write_atomic(&dir.join(VERDICTS), &verdicts_csv(report))?;
    write_atomic(&dir.join(SUMMARY), &(serde_json::to_string_pretty(report)? + "\n"))
}

pub fn study_csv(report: &StudyReport, param: &str) -> String {
    let mut out = format!("{param},final_time,complete,sup_omega,lp_sup,diff_to_next,gronwall_bound,precondition\n");
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.param,
            r.final_time,
            r.complete,
            r.sup_omega,
            r.lp_sup,
            opt(r.diff_to_next),
            opt(r.gronwall_bound),
            r.precondition.map_or_else(String::new, |b| b.to_string())
        );
    }
    out
}

/// Writes the output-cadence states of `traj` and the manifest.
pub fn write_run(
    dir: &Path,
    domain: &Domain,
    config_text: &str,
    traj: &Trajectory,
    cadence: usize,
) -> Result<Vec<usize>> {
    fs::create_dir_all(dir.join(SNAPSHOT_DIR))?;
    let indices = output_indices(traj.states.len(), cadence);
    let mut manifest = Manifest {
        format_version: 1,
        config_sha256: config_hash(config_text),
        complete: false,
        failure: traj.failure.as_ref().map(|e| e.to_string()),
        shape: domain.shape.clone(),
        resolution: domain.resolution,
        grid: GridInfo::of(domain),
        solver: traj.config.clone(),
        cutoff: traj.cutoff,
        steps: traj.steps.len(),
        snapshots: Vec::new(),
    };
    for (k, &i) in indices.iter().enumerate() {
        let state = &traj.states[i];
        let file = snapshot_name(k);
        write_atomic(&dir.join(&file), &snapshot_csv(domain, state))?;
        manifest.snapshots.push(SnapshotEntry { file, t: state.t });
        // Flushed after every file so an interrupted run leaves a readable manifest.
        manifest.write(dir)?;
    }
    manifest.complete = traj.is_complete();
    manifest.write(dir)?;
    Ok(indices)
}

/// Reads the stored states of a run directory back into a trajectory.
pub fn read_run(dir: &Path, problem: &Problem<'_>) -> Result<(Manifest, Trajectory)> {
    let manifest = Manifest::read(dir)?;
    let domain = problem.domain;
    if manifest.grid != GridInfo::of(domain) {
        return Err(LakeError::Format("stored grid differs from the grid of the scenario file".into()));
    }
    if manifest.snapshots.is_empty() {
        return Err(LakeError::Format("run directory holds no snapshots".into()));
    }
    let mut states = Vec::with_capacity(manifest.snapshots.len());
    for entry in &manifest.snapshots {
        let (omega, stream, flux) = read_snapshot(&dir.join(&entry.file), domain)?;
        states.push(rebuild_state(problem, entry.t, omega, stream, flux));
    }
    let failure = match (&manifest.failure, manifest.complete) {
        (Some(msg), _) => Some(LakeError::Format(msg.clone())),
        (None, false) => Some(LakeError::Format("run was interrupted".into())),
        (None, true) => None,
    };
    let traj = Trajectory {
        states,
        steps: Vec::new(),
        config: manifest.solver.clone(),
        cutoff: manifest.cutoff,
        failure,
    };
    Ok((manifest, traj))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cadence_keeps_first_and_last() {
        assert_eq!(output_indices(1, 5), vec![0]);
        assert_eq!(output_indices(7, 3), vec![0, 3, 6]);
        assert_eq!(output_indices(8, 3), vec![0, 3, 6, 7]);
        assert_eq!(output_indices(4, 1), vec![0, 1, 2, 3]);
    }

    #[test]
    fn hash_is_hex_sha256() {
        assert_eq!(config_hash(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
