//! Monitors of the a priori estimates on stored trajectories: weighted Lᵖ norms, the
//! Gronwall inequality, the maximum principle, compatibility of the flux data, weak
//! residuals, boundary-layer traces and the exponent bookkeeping.

mod monitors;
mod report;
mod traces;
mod weak;

pub use monitors::{gronwall_monitor, max_principle_monitor, GronwallSeries, MaxPrincipleSeries};
pub use report::{DiagnosticsReport, MonitorSet, ReportOptions, ReportRow};
pub use traces::{boundary_trace_monitor, TraceSeries};
pub use weak::{weak_residual, KernelForm, TestFunction, WeakForm};

use serde::Serialize;

use crate::domain::Domain;
use crate::elliptic::{div_h, StateFields};
use crate::error::{LakeError, Result};
use crate::scenario::{ScenarioData, SourceVariant};
use crate::solver::{Problem, Trajectory};
use crate::transport::{boundary_vorticity, face_and_link_fluxes, BoundaryVorticityData, SourceParts};

fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p <= 1.0 {
        return Err(LakeError::InvalidArgument(format!("exponent must lie in (1, ∞], got {p}")));
    }
    Ok(())
}

/// (Σ b|ω|^p |cell|)^{1/p}, or max|ω| for p = ∞.
pub fn weighted_lp_norm(domain: &Domain, omega: &[f64], b: &[f64], p: f64) -> Result<f64> {
    check_exponent(p)?;
    if p.is_infinite() {
        return Ok(omega.iter().fold(0.0f64, |m, w| m.max(w.abs())));
    }
    Ok(weighted_power(domain, omega, b, p).powf(1.0 / p))
}

/// Σ b|ω|^q |cell|.
pub(crate) fn weighted_power(domain: &Domain, omega: &[f64], b: &[f64], q: f64) -> f64 {
    omega.iter().zip(b).map(|(w, b)| b * w.abs().powf(q)).sum::<f64>() * domain.cell_volume()
}

/// |∮ b a ds − ∫ A dx| at time t.
pub fn compatibility_residual(domain: &Domain, scenario: &ScenarioData, t: f64) -> f64 {
    scenario.flux_imbalance(domain, t).abs()
}

/// Integrability exponents attached to p.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentTable {
    pub p: f64,
    pub p_tilde: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    /// Conjugate exponent, 1/p* + 1/p = 1.
    pub p_star: f64,
}

impl ExponentTable {
    /// |1/p₁ + 1/p₂ + 1/p₃ − 1|.
    pub fn holder_defect(&self) -> f64 {
        (self.p1.recip() + self.p2.recip() + self.p3.recip() - 1.0).abs()
    }
}

/// The exponent table of p; `eps` is the margin used at p = 2.
pub fn exponent_table(p: f64, eps: f64) -> Result<ExponentTable> {
    check_exponent(p)?;
    if !(eps > 0.0) || eps.is_infinite() {
        return Err(LakeError::InvalidArgument(format!("epsilon must be positive and finite, got {eps}")));
    }
    let conj = if p.is_infinite() { 1.0 } else { p / (p - 1.0) };
    let (p_tilde, p2) = if p.is_infinite() || p > 2.0 {
        (p, f64::INFINITY)
    } else if p == 2.0 {
        (2.0 + eps, 2.0 + 4.0 / eps)
    } else {
        (conj, p / (2.0 - p))
    };
    Ok(ExponentTable { p, p_tilde, p1: p_tilde, p2, p3: conj, p_star: conj })
}

/// Data of one stored state entering the estimates, evaluated at its time.
pub(crate) struct StateTerms {
    /// div_h(b v) per cell.
    pub a_eff: Vec<f64>,
    pub kappa: Vec<f64>,
    /// |−(v·∇⊥)(q/b)| + |rot(G/b)| per cell.
    pub source_abs: Vec<f64>,
    /// Outward link fluxes.
    pub link_flux: Vec<f64>,
    /// ω_Γ at link crossings.
    pub shore_links: Vec<f64>,
    /// max |v| on the shoreline nodes.
    pub shore_speed: f64,
    pub sup_gamma: f64,
    pub sup_g: f64,
}

pub(crate) fn state_terms(problem: &Problem<'_>, state: &StateFields, variant: SourceVariant) -> StateTerms {
    let domain = problem.domain;
    let scenario = problem.scenario;
    let t = state.t;
    let a = scenario.a.at(t);
    let shore = problem.trace.velocity(domain, &scenario.b_shore, &a, &state.stream, &state.flux);
    let data = BoundaryVorticityData::new(domain, scenario, t);
    let shore_nodes = boundary_vorticity(&shore.tangential, &data);
    let shore_links = domain.links.iter().map(|l| domain.boundary.interpolate(&shore_nodes, l.s)).collect();
    let shore_speed = shore.full.iter().fold(0.0f64, |m, v| m.max(v[0].hypot(v[1])));
    let cell_velocity = state.velocity.cell_centered(domain);
    let parts = SourceParts::new(domain, scenario, variant, &cell_velocity, t);
    let source_abs = parts.advective.iter().zip(&parts.curl).map(|(a, c)| a.abs() + c.abs()).collect();
    let (_, link_flux) = face_and_link_fluxes(domain, &problem.ops, &state.velocity);
    StateTerms {
        a_eff: div_h(domain, &problem.ops, &state.velocity),
        kappa: parts.kappa,
        source_abs,
        link_flux,
        shore_links,
        shore_speed,
        sup_gamma: data.sup_gamma(),
        sup_g: data.sup_g(),
    }
}

impl StateTerms {
    /// Σ over inflow links of |F| |ω_Γ|^q.
    pub fn inflow(&self, q: f64) -> f64 {
        self.link_flux
            .iter()
            .zip(&self.shore_links)
            .filter(|(f, _)| **f < 0.0)
            .map(|(f, w)| f.abs() * w.abs().powf(q))
            .sum()
    }

    /// Σ over links of |cell| ν |ω_Γ|^q / (θ_link h²), the Dirichlet part of the
    /// implicit diffusion.
    pub fn viscous(&self, domain: &Domain, nu: f64, q: f64) -> f64 {
        if nu == 0.0 {
            return 0.0;
        }
        let vol = domain.cell_volume();
        domain
            .links
            .iter()
            .zip(&self.shore_links)
            .map(|(l, w)| {
                let h = domain.side_spacing(l.dir);
                vol * nu * w.abs().powf(q) / (l.theta * h * h)
            })
            .sum()
    }
}

/// Sampled y = ∫b|ω|^p together with the coefficients D and B of the integral
/// inequality y ≤ y₀ + ∫[D(u + y) + B].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthSeries {
    pub times: Vec<f64>,
    pub y: Vec<f64>,
    pub d: Vec<f64>,
    pub b: Vec<f64>,
}

/// D = p‖(|A| + |κ|)/b‖_∞ + (p − 1) f and B = f + inflow + viscous shore term, with
/// f = (∫|S'|^p b^{1−p})^{1/p}, evaluated at every stored state.
pub fn lp_growth_series(problem: &Problem<'_>, traj: &Trajectory, p: f64) -> Result<GrowthSeries> {
    check_exponent(p)?;
    if p.is_infinite() {
        return Err(LakeError::InvalidArgument("the growth series needs a finite exponent".into()));
    }
    let domain = problem.domain;
    let b = &problem.scenario.b;
    let vol = domain.cell_volume();
    let mut out = GrowthSeries { times: Vec::new(), y: Vec::new(), d: Vec::new(), b: Vec::new() };
    for state in &traj.states {
        let terms = state_terms(problem, state, traj.config.source_variant);
        let f = (terms
            .source_abs
            .iter()
            .zip(b)
            .map(|(s, b)| s.powf(p) * b.powf(1.0 - p))
            .sum::<f64>()
            * vol)
            .powf(1.0 / p);
        let rate = terms
            .a_eff
            .iter()
            .zip(&terms.kappa)
            .zip(b)
            .map(|((a, k), b)| (a.abs() + k.abs()) / b)
            .fold(0.0f64, f64::max);
        out.times.push(state.t);
        out.y.push(weighted_power(domain, &state.omega, b, p));
        out.d.push(p * rate + (p - 1.0) * f);
        out.b.push(f + terms.inflow(p) + terms.viscous(domain, traj.config.nu, p));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, Shape};

    #[test]
    fn norms_of_constants() {
        let d = build_domain(&Shape::unit_square(), 16).unwrap();
        let two = vec![2.0; d.len()];
        let three = vec![3.0; d.len()];
        let v = weighted_lp_norm(&d, &two, &three, 2.0).unwrap();
        assert!((v - 2.0 * 3.0f64.sqrt()).abs() < 1e-12);
        assert_eq!(weighted_lp_norm(&d, &two, &three, f64::INFINITY).unwrap(), 2.0);
        assert!(weighted_lp_norm(&d, &two, &three, 1.0).is_err());
        assert!(weighted_lp_norm(&d, &two, &three, f64::NAN).is_err());
    }

    #[test]
    fn exponent_examples() {
        let t = exponent_table(3.0, 0.5).unwrap();
        assert_eq!((t.p_tilde, t.p2), (3.0, f64::INFINITY));
        assert!((t.p3 - 1.5).abs() < 1e-15);
        let t = exponent_table(2.0, 0.5).unwrap();
        assert_eq!((t.p_tilde, t.p2, t.p3), (2.5, 10.0, 2.0));
        let t = exponent_table(1.5, 0.5).unwrap();
        assert!((t.p_tilde - 3.0).abs() < 1e-12 && (t.p2 - 3.0).abs() < 1e-12 && (t.p3 - 3.0).abs() < 1e-12);
        let t = exponent_table(f64::INFINITY, 0.5).unwrap();
        assert_eq!(t.p3, 1.0);
        assert!(t.holder_defect() < 1e-15);
        assert!(exponent_table(1.0, 0.5).is_err());
    }

    #[test]
    fn perimeter_flux_is_unbalanced() {
        let d = build_domain(&Shape::unit_disk(), 32).unwrap();
        let s = ScenarioData::quiescent(&d).with_shore_flux(&d, |_, _, _| 1.0);
        let r = compatibility_residual(&d, &s, 0.0);
        assert!((r - 2.0 * std::f64::consts::PI).abs() < 1e-6, "{r}");
        let s = ScenarioData::quiescent(&d).with_shore_flux(&d, |_, _, s| s.sin());
        assert!(compatibility_residual(&d, &s, 0.0) < 1e-10);
    }
}
