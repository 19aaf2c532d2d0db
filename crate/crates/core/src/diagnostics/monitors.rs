//! Gronwall and maximum-principle monitors.

use serde::Serialize;

use super::{state_terms, weighted_power, check_exponent};
use crate::error::{LakeError, Result};
use crate::solver::{Problem, Trajectory};

/// Cumulative sides of the Lᵠ growth inequality at every stored time:
/// lhs = ∫b|ω(t)|^q − ∫b|ω₀|^q and rhs the time integral of the data terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GronwallSeries {
    pub q: f64,
    pub times: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// rhs − lhs.
    pub slack: Vec<f64>,
    /// max(∫b|ω₀|^q, ∫b|ω(t)|^q, rhs), the size the slack is measured against.
    pub scale: Vec<f64>,
}

impl GronwallSeries {
    /// slack ≥ −tol·scale at every time.
    pub fn passes(&self, tol: f64) -> bool {
        self.slack.iter().zip(&self.scale).all(|(s, c)| *s >= -tol * c)
    }

    /// Smallest slack/scale over the series, 0 where the scale vanishes.
    pub fn worst_relative_slack(&self) -> f64 {
        self.slack
            .iter()
            .zip(&self.scale)
            .map(|(s, c)| if *c > 0.0 { s / c } else { 0.0 })
            .fold(0.0f64, f64::min)
    }
}

/// Accumulates, step by step with data at the new time level,
/// Δt [Σ_inflow |F||ω_Γ|^q + q∫(|A_h| + |κ|)|ω|^q + q∫|S'||ω|^{q−1} + ν-shore term],
/// where A_h = div_h(bv) and S' is the explicit source. Each step of the monotone
/// scheme satisfies the inequality exactly, so the slack only carries rounding and the
/// tolerance of the implicit solves.
pub fn gronwall_monitor(problem: &Problem<'_>, traj: &Trajectory, q: f64) -> Result<GronwallSeries> {
    check_exponent(q)?;
    if q.is_infinite() {
        return Err(LakeError::InvalidArgument("the Gronwall monitor needs a finite exponent".into()));
    }
    let domain = problem.domain;
    let b = &problem.scenario.b;
    let vol = domain.cell_volume();
    let y0 = weighted_power(domain, &traj.states[0].omega, b, q);
    let mut series = GronwallSeries {
        q,
        times: vec![traj.states[0].t],
        lhs: vec![0.0],
        rhs: vec![0.0],
        slack: vec![0.0],
        scale: vec![y0],
    };
    let mut rhs = 0.0;
    for pair in traj.states.windows(2) {
        let (prev, cur) = (&pair[0], &pair[1]);
        let dt = cur.t - prev.t;
        let terms = state_terms(problem, cur, traj.config.source_variant);
        let bulk: f64 = cur
            .omega
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let w = w.abs();
                q * (terms.a_eff[i].abs() + terms.kappa[i].abs()) * w.powf(q)
                    + q * terms.source_abs[i] * w.powf(q - 1.0)
            })
            .sum::<f64>()
            * vol;
        rhs += dt * (terms.inflow(q) + bulk + terms.viscous(domain, traj.config.nu, q));
        let y = weighted_power(domain, &cur.omega, b, q);
        let lhs = y - y0;
        series.times.push(cur.t);
        series.lhs.push(lhs);
        series.rhs.push(rhs);
        series.slack.push(rhs - lhs);
        series.scale.push(y0.max(y).max(rhs));
    }
    Ok(series)
}

/// sup|ω| against k(t) = max(max|ω₀|, ‖γ‖_∞ max_Γ|v| + ‖g‖_∞) and its running maximum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxPrincipleSeries {
    pub times: Vec<f64>,
    pub sup_omega: Vec<f64>,
    pub k: Vec<f64>,
    /// max_{τ≤t} k(τ).
    pub reference: Vec<f64>,
    /// No bottom source, no explicit vorticity source and κ ≥ 0 at every stored time.
    pub clean: bool,
}

impl MaxPrincipleSeries {
    /// sup|ω(t)| ≤ reference(t) + tol at every time.
    pub fn holds(&self, tol: f64) -> bool {
        self.sup_omega.iter().zip(&self.reference).all(|(s, r)| *s <= r + tol)
    }

    /// The bound is only asserted in the clean case; otherwise it is reported.
    pub fn passes(&self, tol: f64) -> bool {
        !self.clean || self.holds(tol)
    }
}

pub fn max_principle_monitor(problem: &Problem<'_>, traj: &Trajectory) -> MaxPrincipleSeries {
    let scenario = problem.scenario;
    let omega0_max = traj.states[0].omega.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    let mut out = MaxPrincipleSeries {
        times: Vec::new(),
        sup_omega: Vec::new(),
        k: Vec::new(),
        reference: Vec::new(),
        clean: true,
    };
    let mut running = 0.0f64;
    for state in &traj.states {
        let terms = state_terms(problem, state, traj.config.source_variant);
        let k = omega0_max.max(terms.sup_gamma * terms.shore_speed + terms.sup_g);
        running = running.max(k);
        out.clean &= terms.source_abs.iter().all(|s| *s == 0.0)
            && scenario.source.at(state.t).iter().all(|a| *a == 0.0)
            && terms.kappa.iter().all(|k| *k >= 0.0);
        out.times.push(state.t);
        out.sup_omega.push(state.omega.iter().fold(0.0f64, |m, w| m.max(w.abs())));
        out.k.push(k);
        out.reference.push(running);
    }
    out
}
