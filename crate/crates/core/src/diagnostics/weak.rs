//! Test functions and the residual of the weak formulation, in the classical form and
//! in the form where the stream part of the velocity enters through the Green kernel.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::elliptic::{greens_kernel, reconstruct_velocity, ShoreFlux, StateFields};
use crate::error::{LakeError, Result};
use crate::scenario::ScenarioData;
use crate::solver::{Problem, Trajectory};
use crate::transport::SourceParts;

/// ψ(x, t) = φ(|x − c|/ρ) χ(t) with the bump φ(r) = exp(1 − 1/(1 − r²)) for r < 1 and
/// χ(t) = cos²(πt/2T), so ψ(c, 0) = 1 and ψ vanishes at t = T.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub center: [f64; 2],
    pub radius: f64,
    pub t_end: f64,
}

impl TestFunction {
    pub fn new(center: [f64; 2], radius: f64, t_end: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(LakeError::InvalidArgument(format!("test function radius must be positive, got {radius}")));
        }
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(LakeError::InvalidArgument(format!("test function end time must be positive, got {t_end}")));
        }
        Ok(TestFunction { center, radius, t_end })
    }

    /// A bump placed off the centroid of the active cells, with support well inside.
    pub fn interior(domain: &Domain, t_end: f64) -> Result<Self> {
        let n = domain.len() as f64;
        let c = domain.grid.centers.iter().fold([0.0, 0.0], |a, p| [a[0] + p[0] / n, a[1] + p[1] / n]);
        let (lo, hi) = domain.shape.bounding_box();
        let center = [c[0] + 0.1 * (hi[0] - lo[0]), c[1] + 0.05 * (hi[1] - lo[1])];
        let depth = domain.signed_distance(center);
        if !(depth > 0.0) {
            return Err(LakeError::InvalidArgument("no interior point for the test function".into()));
        }
        Self::new(center, 0.6 * depth, t_end)
    }

    /// φ and ∇φ at p.
    pub fn spatial(&self, p: [f64; 2]) -> (f64, [f64; 2]) {
        let rho2 = self.radius * self.radius;
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        let u = (dx * dx + dy * dy) / rho2;
        if u >= 1.0 {
            return (0.0, [0.0, 0.0]);
        }
        let w = 1.0 - u;
        let phi = (1.0 - 1.0 / w).exp();
        let c = -phi * 2.0 / (rho2 * w * w);
        (phi, [c * dx, c * dy])
    }

    /// χ and χ'.
    pub fn temporal(&self, t: f64) -> (f64, f64) {
        if t >= self.t_end {
            return (0.0, 0.0);
        }
        let a = std::f64::consts::PI * t / (2.0 * self.t_end);
        let c = a.cos();
        (c * c, -std::f64::consts::PI / (2.0 * self.t_end) * (2.0 * a).sin())
    }

    pub fn value(&self, p: [f64; 2], t: f64) -> f64 {
        self.spatial(p).0 * self.temporal(t).0
    }

    /// Whether the support stays at positive distance from the shoreline.
    pub fn is_interior(&self, domain: &Domain) -> bool {
        domain.signed_distance(self.center) > self.radius
    }

    /// The support may only meet the shoreline where a < 0 (inflow).
    pub fn check_support(&self, domain: &Domain, scenario: &ScenarioData, t: f64) -> Result<()> {
        if self.is_interior(domain) {
            return Ok(());
        }
        let a = scenario.a.at(t);
        for (node, a) in domain.boundary.nodes.iter().zip(a.iter()) {
            if self.spatial(node.position).0 > 0.0 && *a >= 0.0 {
                return Err(LakeError::InvalidArgument(format!(
                    "test function support meets the shoreline outside the inflow part at s = {}",
                    node.s
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeakForm {
    Classical,
    Kernel,
}

/// The quadratic form F[ω, ω'] = ω·Mω' with M_ij = |cell| b_i b_j ∇φ(x_i)·P_ij
/// symmetrized, where P maps b ω to the cell-centered stream velocity through the
/// Green kernel. F[ω, ω] equals ∫bω v_h·∇φ for the stream velocity v_h of ω.
#[derive(Debug, Clone)]
pub struct KernelForm {
    pub matrix: DMatrix<f64>,
}

impl KernelForm {
    pub fn new(problem: &Problem<'_>, psi: &TestFunction, cap: usize) -> Result<Self> {
        let domain = problem.domain;
        let b = &problem.scenario.b;
        let green = greens_kernel(domain, b, &problem.scenario.b_shore, cap)?;
        let n = domain.len();
        let vol = domain.cell_volume();
        let grad: Vec<[f64; 2]> = domain.grid.centers.iter().map(|p| psi.spatial(*p).1).collect();
        let zero = vec![0.0; n];
        let zero_links = ShoreFlux::zeros(domain);
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            let h: Vec<f64> = green.matrix.column(j).iter().cloned().collect();
            let v = reconstruct_velocity(domain, &problem.ops, &h, &zero, &zero_links).cell_centered(domain);
            for i in 0..n {
                m[(i, j)] = vol * b[i] * b[j] * (grad[i][0] * v[i][0] + grad[i][1] * v[i][1]);
            }
        }
        let matrix = (&m + m.transpose()) * 0.5;
        Ok(KernelForm { matrix })
    }

    pub fn functional(&self, omega: &[f64], other: &[f64]) -> f64 {
        let n = self.matrix.nrows();
        (0..n)
            .map(|i| omega[i] * (0..n).map(|j| self.matrix[(i, j)] * other[j]).sum::<f64>())
            .sum()
    }

    pub fn asymmetry(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).abs().max()
    }
}

fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// |LHS − RHS| of
/// ∫∫ bω(ψ_t + v·∇ψ) − [κω + (v·∇⊥)(q/b) − rot(G/b)]ψ = −∫bω₀ψ(·,0) + ∫∫_{Γ⁻} b a ω_Γ ψ,
/// by cell quadrature in space and the trapezoid rule over the stored times. The
/// kernel form replaces ∫bω v·∇ψ by ∫bω ∇H·∇ψ + χ F[ω, ω]. The trajectory must reach
/// the end time of ψ.
pub fn weak_residual(problem: &Problem<'_>, traj: &Trajectory, psi: &TestFunction, form: WeakForm) -> Result<f64> {
    let domain = problem.domain;
    let scenario = problem.scenario;
    let tol = 1e-9 * psi.t_end;
    let states: Vec<&StateFields> = traj.states.iter().filter(|s| s.t <= psi.t_end + tol).collect();
    match states.last() {
        Some(s) if (s.t - psi.t_end).abs() <= tol => {}
        _ => {
            return Err(LakeError::InvalidArgument(format!(
                "trajectory has no state at the test function end time {}",
                psi.t_end
            )))
        }
    }
    let kernel = match form {
        WeakForm::Classical => None,
        WeakForm::Kernel => Some(KernelForm::new(problem, psi, crate::elliptic::DEFAULT_KERNEL_CAP)?),
    };
    let b = &scenario.b;
    let vol = domain.cell_volume();
    let spatial: Vec<(f64, [f64; 2])> = domain.grid.centers.iter().map(|p| psi.spatial(*p)).collect();
    let mut lhs = Vec::with_capacity(states.len());
    let mut shore = Vec::with_capacity(states.len());
    let zero = vec![0.0; domain.len()];
    for state in &states {
        let t = state.t;
        psi.check_support(domain, scenario, t)?;
        let (chi, dchi) = psi.temporal(t);
        let cell_velocity = state.velocity.cell_centered(domain);
        let parts = SourceParts::new(domain, scenario, traj.config.source_variant, &cell_velocity, t);
        let transport_velocity = match form {
            WeakForm::Classical => cell_velocity,
            WeakForm::Kernel => {
                let a = scenario.a.at(t);
                let source = scenario.source.at(t);
                let flux = problem.ops.shore_fluxes(domain, &a, &scenario.b_shore, &source, &state.flux);
                reconstruct_velocity(domain, &problem.ops, &zero, &state.flux, &flux).cell_centered(domain)
            }
        };
        let mut sum = 0.0;
        for (i, w) in state.omega.iter().enumerate() {
            let (phi, g) = spatial[i];
            if phi == 0.0 {
                continue;
            }
            let v = transport_velocity[i];
            let bracket = parts.kappa[i] * w - parts.advective[i] - parts.curl[i];
            sum += b[i] * w * (dchi * phi + chi * (v[0] * g[0] + v[1] * g[1])) - bracket * chi * phi;
        }
        sum *= vol;
        if let Some(k) = &kernel {
            sum += chi * k.functional(&state.omega, &state.omega);
        }
        lhs.push(sum);

        let (_, links) = problem.shore_vorticity(t, &state.stream, &state.flux);
        let (_, link_flux) = crate::transport::face_and_link_fluxes(domain, &problem.ops, &state.velocity);
        let inflow: f64 = domain
            .links
            .iter()
            .enumerate()
            .filter(|(k, _)| link_flux[*k] < 0.0)
            .map(|(k, l)| link_flux[k] * links[k] * psi.value(l.point, t))
            .sum();
        shore.push(inflow);
    }
    let times: Vec<f64> = states.iter().map(|s| s.t).collect();
    let (chi0, _) = psi.temporal(states[0].t);
    let initial: f64 = states[0]
        .omega
        .iter()
        .enumerate()
        .map(|(i, w)| b[i] * w * spatial[i].0)
        .sum::<f64>()
        * vol
        * chi0;
    Ok((trapezoid(&times, &lhs) + initial - trapezoid(&times, &shore)).abs())
}
