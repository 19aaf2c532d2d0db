//! The combined monitor report of one trajectory.

use serde::Serialize;

use super::{
    boundary_trace_monitor, compatibility_residual, gronwall_monitor, max_principle_monitor, weak_residual,
    weighted_lp_norm, GronwallSeries, MaxPrincipleSeries, TestFunction, TraceSeries, WeakForm,
};
use crate::elliptic::EstimateFit;
use crate::error::{LakeError, Result};
use crate::solver::{Problem, Trajectory};

/// Which monitors to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MonitorSet {
    pub lp: bool,
    pub gronwall: bool,
    pub max_principle: bool,
    pub compatibility: bool,
    pub weak: bool,
    pub traces: bool,
    pub estimates: bool,
}

impl MonitorSet {
    pub const NAMES: [&'static str; 7] = ["lp", "gronwall", "maxprinciple", "compatibility", "weak", "traces", "estimates"];

    pub fn all() -> Self {
        MonitorSet { lp: true, gronwall: true, max_principle: true, compatibility: true, weak: true, traces: true, estimates: true }
    }

    pub fn none() -> Self {
        MonitorSet {
            lp: false,
            gronwall: false,
            max_principle: false,
            compatibility: false,
            weak: false,
            traces: false,
            estimates: false,
        }
    }

    /// Comma-separated names out of [`MonitorSet::NAMES`], or "all".
    pub fn parse(list: &str) -> Result<Self> {
        let mut set = MonitorSet::none();
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match name {
                "all" => set = MonitorSet::all(),
                "lp" => set.lp = true,
                "gronwall" => set.gronwall = true,
                "maxprinciple" => set.max_principle = true,
                "compatibility" => set.compatibility = true,
                "weak" => set.weak = true,
                "traces" => set.traces = true,
                "estimates" => set.estimates = true,
                other => {
                    return Err(LakeError::InvalidArgument(format!(
                        "unknown monitor {other:?}, expected one of {}",
                        MonitorSet::NAMES.join(", ")
                    )))
                }
            }
        }
        Ok(set)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportOptions {
    pub monitors: MonitorSet,
    /// Exponent of the Gronwall monitor and the traces; defaults to p, or 8 for p = ∞.
    pub q: Option<f64>,
    pub tol_slack: f64,
    pub tol_max_principle: f64,
    /// Band widths of the trace monitor; defaults to 8h, 4h, 2h below σ₀/2.
    pub sigmas: Option<Vec<f64>>,
    /// Test functions of the weak residual; defaults to one interior bump.
    pub test_functions: Option<Vec<TestFunction>>,
    pub weak_forms: Vec<WeakForm>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            monitors: MonitorSet::all(),
            q: None,
            tol_slack: 1e-8,
            tol_max_principle: 1e-10,
            sigmas: None,
            test_functions: None,
            weak_forms: vec![WeakForm::Classical],
        }
    }
}

/// Monitored quantities at one stored time; absent monitors are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub t: f64,
    pub sup_omega: f64,
    pub lp_norm: Option<f64>,
    pub max_principle_reference: Option<f64>,
    pub gronwall_lhs: Option<f64>,
    pub gronwall_rhs: Option<f64>,
    pub gronwall_slack: Option<f64>,
    pub compatibility: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakEntry {
    pub index: usize,
    pub form: WeakForm,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    pub p: f64,
    pub q: f64,
    pub rows: Vec<ReportRow>,
    pub gronwall: Option<GronwallSeries>,
    pub max_principle: Option<MaxPrincipleSeries>,
    pub weak: Vec<WeakEntry>,
    pub traces: Option<TraceSeries>,
    pub w2_ratio: Option<f64>,
    pub velocity_constant: Option<f64>,
    /// (monitor name, PASS) per evaluated monitor.
    pub verdicts: Vec<(String, bool)>,
}

impl DiagnosticsReport {
    pub fn compute(problem: &Problem<'_>, traj: &Trajectory, options: &ReportOptions) -> Result<Self> {
        let domain = problem.domain;
        let scenario = problem.scenario;
        let m = options.monitors;
        let p = scenario.p;
        let q = options.q.unwrap_or(if p.is_finite() { p } else { 8.0 });
        let t_end = traj.last().t;
        let mut verdicts = Vec::new();

        let gronwall = if m.gronwall { Some(gronwall_monitor(problem, traj, q)?) } else { None };
        if let Some(g) = &gronwall {
            verdicts.push(("gronwall".to_string(), g.passes(options.tol_slack)));
        }
        let max_principle = m.max_principle.then(|| max_principle_monitor(problem, traj));
        if let Some(mp) = &max_principle {
            verdicts.push(("maxprinciple".to_string(), mp.passes(options.tol_max_principle)));
        }

        let mut rows = Vec::with_capacity(traj.states.len());
        let mut compatible = true;
        for (k, state) in traj.states.iter().enumerate() {
            let compatibility = if m.compatibility {
                let r = compatibility_residual(domain, scenario, state.t);
                compatible &= r <= traj.config.tol_comp * scenario.flux_scale(domain, state.t);
                Some(r)
            } else {
                None
            };
            rows.push(ReportRow {
                t: state.t,
                sup_omega: state.omega.iter().fold(0.0f64, |m, w| m.max(w.abs())),
                lp_norm: if m.lp { Some(weighted_lp_norm(domain, &state.omega, &scenario.b, p)?) } else { None },
                max_principle_reference: max_principle.as_ref().map(|s| s.reference[k]),
                gronwall_lhs: gronwall.as_ref().map(|s| s.lhs[k]),
                gronwall_rhs: gronwall.as_ref().map(|s| s.rhs[k]),
                gronwall_slack: gronwall.as_ref().map(|s| s.slack[k]),
                compatibility,
            });
        }
        if m.compatibility {
            verdicts.push(("compatibility".to_string(), compatible));
        }
        if m.lp {
            let finite = rows.iter().all(|r| r.lp_norm.is_some_and(f64::is_finite));
            verdicts.push(("lp".to_string(), finite));
        }

        let mut weak = Vec::new();
        if m.weak && t_end > 0.0 && traj.is_complete() {
            let functions = match &options.test_functions {
                Some(f) => f.clone(),
                None => vec![TestFunction::interior(domain, t_end)?],
            };
            for (index, psi) in functions.iter().enumerate() {
                for &form in &options.weak_forms {
                    weak.push(WeakEntry { index, form, residual: weak_residual(problem, traj, psi, form)? });
                }
            }
            verdicts.push(("weak".to_string(), weak.iter().all(|w| w.residual.is_finite())));
        }

        let traces = if m.traces && t_end > 0.0 {
            let h = domain.grid.spacing();
            let sigmas = options.sigmas.clone().unwrap_or_else(|| {
                [8.0, 4.0, 2.0].iter().map(|k| k * h).filter(|s| *s <= 0.5 * domain.sigma0).collect()
            });
            if sigmas.is_empty() {
                log::warn!("traces skipped: the shoreline tube ({:.3}) is thinner than 4 cells", domain.sigma0);
                None
            } else {
                // A bump positive on the whole domain.
                let (lo, hi) = domain.shape.bounding_box();
                let center = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
                let radius = 2.0 * (hi[0] - lo[0]).hypot(hi[1] - lo[1]);
                let psi = TestFunction::new(center, radius, t_end)?;
                let series = boundary_trace_monitor(problem, traj, &sigmas, q, &psi)?;
                let finite = series.boundary.iter().chain(&series.initial).all(|v| v.is_finite());
                verdicts.push(("traces".to_string(), finite));
                Some(series)
            }
        } else {
            None
        };

        let (w2_ratio, velocity_constant) = if m.estimates {
            let last = traj.last();
            let fit = EstimateFit::measure(
                domain,
                &scenario.b,
                &last.omega,
                &last.stream,
                &last.velocity.cell_centered(domain),
                &scenario.source.at(last.t),
                &scenario.a.at(last.t),
                q,
            );
            verdicts.push((
                "estimates".to_string(),
                fit.w2_ratio.is_finite() && fit.velocity_constant.is_finite(),
            ));
            (Some(fit.w2_ratio), Some(fit.velocity_constant))
        } else {
            (None, None)
        };

        Ok(DiagnosticsReport {
            p,
            q,
            rows,
            gronwall,
            max_principle,
            weak,
            traces,
            w2_ratio,
            velocity_constant,
            verdicts,
        })
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|(_, ok)| *ok)
    }
}
