//! Parameter studies in ν and θ.

use rayon::prelude::*;
use serde::Serialize;

use super::{discrete_gronwall_bound, gronwall_precondition, run_simulation, Problem, SolverConfig, Trajectory};
use crate::diagnostics::{lp_growth_series, weighted_lp_norm};
use crate::domain::Domain;
use crate::error::{LakeError, Result};
use crate::scenario::ScenarioData;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StudyKind {
    Viscosity,
    Theta,
}

/// One run of a study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow {
    /// ν or θ.
    pub param: f64,
    pub final_time: f64,
    pub complete: bool,
    /// max_t ‖ω(t)‖_∞.
    pub sup_omega: f64,
    /// max_t ‖ω(t)‖_{p,b}.
    pub lp_sup: f64,
    /// ‖ω_this(T) − ω_next(T)‖₂ against the next run in the list.
    pub diff_to_next: Option<f64>,
    /// (sup_t bound)^{1/p} of the lagged Gronwall bound (θ study, finite p).
    pub gronwall_bound: Option<f64>,
    /// Whether 2θ·sup D ≤ 1/2 held for the bound.
    pub precondition: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyReport {
    pub kind: StudyKind,
    pub p: f64,
    pub rows: Vec<StudyRow>,
}

impl StudyReport {
    pub fn differences(&self) -> Vec<Option<f64>> {
        self.rows.iter().take(self.rows.len().saturating_sub(1)).map(|r| r.diff_to_next).collect()
    }

    /// Pairwise differences exist and do not increase down the list (relative slack 1e-9).
    pub fn differences_non_increasing(&self) -> bool {
        let d: Option<Vec<f64>> = self.differences().into_iter().collect();
        match d {
            Some(d) => d.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-14),
            None => false,
        }
    }

    /// (max − min)/max of the sup norms across runs.
    pub fn sup_variation(&self) -> f64 {
        let max = self.rows.iter().map(|r| r.sup_omega).fold(0.0, f64::max);
        let min = self.rows.iter().map(|r| r.sup_omega).fold(f64::INFINITY, f64::min);
        if max > 0.0 {
            (max - min) / max
        } else {
            0.0
        }
    }

    /// max over runs of ‖ω‖_{L∞(0,T;L_p)} divided by the corresponding bound.
    pub fn bound_ratio(&self) -> Option<f64> {
        self.rows
            .iter()
            .map(|r| r.gronwall_bound.map(|b| if b > 0.0 { r.lp_sup / b } else { 0.0 }))
            .try_fold(0.0f64, |m, v| v.map(|v| m.max(v)))
    }
}

/// Thread pool sized by `LAKESIM_THREADS` when set.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("LAKESIM_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| LakeError::InvalidArgument(format!("LAKESIM_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(LakeError::InvalidArgument("LAKESIM_THREADS must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| LakeError::InvalidArgument(format!("cannot build thread pool: {e}")))
}

fn check_decreasing(list: &[f64], what: &str) -> Result<()> {
    if list.is_empty() {
        return Err(LakeError::InvalidArgument(format!("{what} list is empty")));
    }
    if list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(LakeError::InvalidArgument(format!("{what} list must be strictly decreasing")));
    }
    Ok(())
}

fn l2_difference(domain: &Domain, a: &[f64], b: &[f64]) -> f64 {
    let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (sq * domain.cell_volume()).sqrt()
}

fn lp_sup(domain: &Domain, traj: &Trajectory, b: &[f64], p: f64) -> f64 {
    traj.states
        .iter()
        .map(|s| weighted_lp_norm(domain, &s.omega, b, p).unwrap_or(f64::NAN))
        .fold(0.0, f64::max)
}

fn rows_from(domain: &Domain, params: &[f64], runs: &[(&Trajectory, &[f64])], p: f64) -> Vec<StudyRow> {
    (0..runs.len())
        .map(|k| {
            let (traj, b) = &runs[k];
            let diff_to_next = runs.get(k + 1).and_then(|(next, _)| {
                (traj.is_complete() && next.is_complete())
                    .then(|| l2_difference(domain, &traj.last().omega, &next.last().omega))
            });
            StudyRow {
                param: params[k],
                final_time: traj.last().t,
                complete: traj.is_complete(),
                sup_omega: traj.sup_omega(),
                lp_sup: lp_sup(domain, traj, b, p),
                diff_to_next,
                gronwall_bound: None,
                precondition: None,
            }
        })
        .collect()
}

/// Runs the scenario for every ν in the strictly decreasing list.
pub fn viscosity_study(
    domain: &Domain,
    scenario: &ScenarioData,
    config: &SolverConfig,
    nus: &[f64],
) -> Result<StudyReport> {
    check_decreasing(nus, "nu")?;
    if nus.iter().any(|nu| !(*nu >= 0.0)) {
        return Err(LakeError::InvalidArgument("nu must be non-negative".into()));
    }
    let pool = thread_pool()?;
    let runs: Vec<Result<Trajectory>> = pool.install(|| {
        nus.par_iter()
            .map(|&nu| run_simulation(domain, scenario, &SolverConfig { nu, ..config.clone() }))
            .collect()
    });
    let runs: Vec<Trajectory> = runs.into_iter().collect::<Result<_>>()?;
    let pairs: Vec<(&Trajectory, &[f64])> = runs.iter().map(|t| (t, scenario.b.as_slice())).collect();
    Ok(StudyReport { kind: StudyKind::Viscosity, p: scenario.p, rows: rows_from(domain, nus, &pairs, scenario.p) })
}

/// Runs the scenario mollified at every θ of the strictly decreasing list, with the
/// lag set to the same θ, and attaches the lagged Gronwall bound of each run.
pub fn theta_study(
    domain: &Domain,
    scenario: &ScenarioData,
    config: &SolverConfig,
    thetas: &[f64],
) -> Result<StudyReport> {
    check_decreasing(thetas, "theta")?;
    if thetas.iter().any(|t| !(*t > 0.0)) {
        return Err(LakeError::InvalidArgument("theta must be positive".into()));
    }
    let pool = thread_pool()?;
    let p = scenario.p;
    let results: Vec<Result<(Trajectory, ScenarioData, Option<(f64, bool)>)>> = pool.install(|| {
        thetas
            .par_iter()
            .map(|&theta| {
                let data = scenario.mollified(domain, theta);
                let cfg = SolverConfig { theta, ..config.clone() };
                let traj = run_simulation(domain, &data, &cfg)?;
                let bound = if p.is_finite() {
                    let problem = Problem::new(domain, &data)?;
                    let series = lp_growth_series(&problem, &traj, p)?;
                    let bound = discrete_gronwall_bound(series.y[0], &series.times, &series.d, &series.b)?;
                    let sup = bound.iter().cloned().fold(0.0, f64::max);
                    Some((sup.powf(1.0 / p), gronwall_precondition(&series.d, theta)))
                } else {
                    None
                };
                Ok((traj, data, bound))
            })
            .collect()
    });
    let results: Vec<(Trajectory, ScenarioData, Option<(f64, bool)>)> = results.into_iter().collect::<Result<_>>()?;
    let bounds: Vec<Option<(f64, bool)>> = results.iter().map(|r| r.2).collect();
    let pairs: Vec<(&Trajectory, &[f64])> = results.iter().map(|r| (&r.0, r.1.b.as_slice())).collect();
    let mut rows = rows_from(domain, thetas, &pairs, p);
    for (row, bound) in rows.iter_mut().zip(bounds) {
        row.gronwall_bound = bound.map(|b| b.0);
        row.precondition = bound.map(|b| b.1);
    }
    Ok(StudyReport { kind: StudyKind::Theta, p, rows })
}
