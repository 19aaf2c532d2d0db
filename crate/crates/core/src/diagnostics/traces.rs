//! Boundary-layer quantities of the vanishing-viscosity limit, evaluated in shoreline
//! bands of width σ.

use serde::Serialize;

use super::{check_exponent, TestFunction};
use crate::error::{LakeError, Result};
use crate::solver::{Problem, Trajectory};

/// Per σ: the band quantity (1/σ)∫∫_{σ<d<2σ} b(v·∇d)|ω − ω̆|^q ψ and the initial-layer
/// quantity (1/σ)∫₀^σ∫ b|ω − ω₀|^q ψ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceSeries {
    pub q: f64,
    pub sigmas: Vec<f64>,
    pub boundary: Vec<f64>,
    pub initial: Vec<f64>,
}

impl TraceSeries {
    fn non_increasing_as_sigma_shrinks(&self, values: &[f64]) -> bool {
        let mut pairs: Vec<(f64, f64)> = self.sigmas.iter().cloned().zip(values.iter().cloned()).collect();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        pairs.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-9) + 1e-14)
    }

    /// Band quantities do not grow as σ decreases.
    pub fn boundary_trend(&self) -> bool {
        self.non_increasing_as_sigma_shrinks(&self.boundary)
    }

    pub fn initial_trend(&self) -> bool {
        self.non_increasing_as_sigma_shrinks(&self.initial)
    }
}

/// The extension ω̆ is constant along the inward normal from the shoreline value
/// ω_Γ(v) where a < 0, and equals ω elsewhere.
pub fn boundary_trace_monitor(
    problem: &Problem<'_>,
    traj: &Trajectory,
    sigmas: &[f64],
    q: f64,
    psi: &TestFunction,
) -> Result<TraceSeries> {
    check_exponent(q)?;
    if q.is_infinite() {
        return Err(LakeError::InvalidArgument("trace quantities need a finite exponent".into()));
    }
    let domain = problem.domain;
    let scenario = problem.scenario;
    let h = domain.grid.spacing();
    for &sigma in sigmas {
        if !(sigma >= 2.0 * h * (1.0 - 1e-9)) {
            return Err(LakeError::Sigma { sigma, reason: format!("under-resolved, needs at least 2h = {}", 2.0 * h) });
        }
        if sigma > 0.5 * domain.sigma0 {
            return Err(LakeError::Sigma {
                sigma,
                reason: format!("exceeds half the tubular radius {}", 0.5 * domain.sigma0),
            });
        }
    }
    let vol = domain.cell_volume();
    let b = &scenario.b;
    let times: Vec<f64> = traj.states.iter().map(|s| s.t).collect();
    let mut out = TraceSeries { q, sigmas: sigmas.to_vec(), boundary: Vec::new(), initial: Vec::new() };
    for &sigma in sigmas {
        // Band cells with the shoreline parameter of their foot point and ∇d = −n.
        let band: Vec<(usize, f64, [f64; 2])> = (0..domain.len())
            .filter(|&c| domain.distance[c] > sigma && domain.distance[c] < 2.0 * sigma)
            .map(|c| {
                let s = domain.boundary.locate(domain.grid.centers[c]);
                let n = domain.boundary.normal_at(s);
                (c, s, [-n[0], -n[1]])
            })
            .collect();
        let values: Vec<f64> = traj
            .states
            .iter()
            .map(|state| {
                let t = state.t;
                let a = scenario.a.at(t);
                let (shore, _) = problem.shore_vorticity(t, &state.stream, &state.flux);
                let velocity = state.velocity.cell_centered(domain);
                band.iter()
                    .map(|&(c, s, grad_d)| {
                        let w = state.omega[c];
                        let ext = if domain.boundary.interpolate(&a, s) < 0.0 {
                            domain.boundary.interpolate(&shore, s)
                        } else {
                            w
                        };
                        let v = velocity[c];
                        b[c] * (v[0] * grad_d[0] + v[1] * grad_d[1])
                            * (w - ext).abs().powf(q)
                            * psi.value(domain.grid.centers[c], t)
                    })
                    .sum::<f64>()
                    * vol
                    / sigma
            })
            .collect();
        out.boundary.push(trapezoid(&times, &values));
        out.initial.push(initial_layer(problem, traj, sigma, q, psi));
    }
    Ok(out)
}

fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

fn initial_layer(problem: &Problem<'_>, traj: &Trajectory, sigma: f64, q: f64, psi: &TestFunction) -> f64 {
    let domain = problem.domain;
    let b = &problem.scenario.b;
    let vol = domain.cell_volume();
    let omega0 = &traj.states[0].omega;
    let density = |t: f64, omega: &[f64]| -> f64 {
        omega
            .iter()
            .zip(omega0)
            .enumerate()
            .map(|(c, (w, w0))| b[c] * (w - w0).abs().powf(q) * psi.value(domain.grid.centers[c], t))
            .sum::<f64>()
            * vol
    };
    let mut times = Vec::new();
    let mut values = Vec::new();
    for pair in traj.states.windows(2) {
        let (s0, s1) = (&pair[0], &pair[1]);
        if times.is_empty() {
            times.push(s0.t);
            values.push(density(s0.t, &s0.omega));
        }
        if s1.t <= sigma {
            times.push(s1.t);
            values.push(density(s1.t, &s1.omega));
        } else {
            let f = (sigma - s0.t) / (s1.t - s0.t);
            let w: Vec<f64> = s0.omega.iter().zip(&s1.omega).map(|(a, b)| a + f * (b - a)).collect();
            times.push(sigma);
            values.push(density(sigma, &w));
            break;
        }
    }
    trapezoid(&times, &values) / sigma
}
