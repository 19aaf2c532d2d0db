//! Vorticity transport: the shoreline vorticity law, the source terms, the
//! upwind/implicit step and the time-lagged average of the vorticity.

mod history;
mod step;

pub use history::{clip, timelag_cutoff_average, VorticityHistory};
pub use step::{cfl_number, step_vorticity, StepData, StepOutcome};
pub(crate) use step::face_and_link_fluxes;

use crate::discrete::{cell_gradient, perp_advection};
use crate::domain::Domain;
use crate::scenario::{ScenarioData, SourceVariant};

/// Coefficients of the shoreline vorticity ω_Γ = γ v·s + g.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryVorticityData {
    /// γ = (2k − α)/b.
    pub gamma: Vec<f64>,
    /// g = (η − 2 ∂_s a)/b.
    pub g: Vec<f64>,
}

impl BoundaryVorticityData {
    /// Evaluates γ and g at time t, including the start-up gate of mollified scenarios.
    pub fn new(domain: &Domain, scenario: &ScenarioData, t: f64) -> Self {
        let gate = scenario.gate(t);
        let a = scenario.a.at(t);
        let da = domain.boundary.derivative(&a);
        let alpha = scenario.alpha.at(t);
        let eta = scenario.eta.at(t);
        let (gamma, g) = domain
            .boundary
            .nodes
            .iter()
            .enumerate()
            .map(|(k, node)| {
                let b = scenario.b_shore[k];
                (gate * (2.0 * node.curvature - alpha[k]) / b, gate * (eta[k] - 2.0 * da[k]) / b)
            })
            .unzip();
        BoundaryVorticityData { gamma, g }
    }

    pub fn sup_gamma(&self) -> f64 {
        self.gamma.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn sup_g(&self) -> f64 {
        self.g.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// ω_Γ = γ (v·s) + g at every shoreline node.
pub fn boundary_vorticity(tangential_velocity: &[f64], data: &BoundaryVorticityData) -> Vec<f64> {
    tangential_velocity
        .iter()
        .zip(data.gamma.iter().zip(&data.g))
        .map(|(vs, (gamma, g))| gamma * vs + g)
        .collect()
}

/// Right-hand side pieces of the vorticity equation at one time.
#[derive(Debug, Clone)]
pub struct SourceParts {
    /// Friction κ, applied implicitly as −κω.
    pub kappa: Vec<f64>,
    /// −(v·∇⊥)(q/b) with q = κ or A.
    pub advective: Vec<f64>,
    /// rot(G/b).
    pub curl: Vec<f64>,
}

impl SourceParts {
    pub fn new(
        domain: &Domain,
        scenario: &ScenarioData,
        variant: SourceVariant,
        cell_velocity: &[[f64; 2]],
        t: f64,
    ) -> Self {
        let kappa = scenario.kappa.at(t).into_owned();
        let q = match variant {
            SourceVariant::Kappa => kappa.clone(),
            SourceVariant::Source => scenario.source.at(t).into_owned(),
        };
        let advective = if q.iter().all(|v| *v == 0.0) {
            vec![0.0; domain.len()]
        } else {
            let ratio: Vec<f64> = q.iter().zip(&scenario.b).map(|(q, b)| q / b).collect();
            perp_advection(cell_velocity, &cell_gradient(domain, &ratio))
                .into_iter()
                .map(|v| -v)
                .collect()
        };
        SourceParts { kappa, advective, curl: scenario.curl_forcing(domain, t) }
    }

    /// Explicit part S' = −(v·∇⊥)(q/b) + rot(G/b).
    pub fn explicit(&self) -> Vec<f64> {
        self.advective.iter().zip(&self.curl).map(|(a, c)| a + c).collect()
    }

    /// Full source S = −κω + S'.
    pub fn total(&self, omega: &[f64]) -> Vec<f64> {
        omega
            .iter()
            .zip(&self.kappa)
            .zip(self.advective.iter().zip(&self.curl))
            .map(|((w, k), (a, c))| -k * w + a + c)
            .collect()
    }
}

/// S = −κω − (v·∇⊥)(q/b) + rot(G/b) at cells.
pub fn assemble_source(
    domain: &Domain,
    scenario: &ScenarioData,
    variant: SourceVariant,
    omega: &[f64],
    cell_velocity: &[[f64; 2]],
    t: f64,
) -> Vec<f64> {
    SourceParts::new(domain, scenario, variant, cell_velocity, t).total(omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, Shape};

    #[test]
    fn gamma_is_twice_the_curvature_for_plain_data() {
        let d = build_domain(&Shape::unit_disk(), 32).unwrap();
        let s = ScenarioData::quiescent(&d);
        let data = BoundaryVorticityData::new(&d, &s, 0.0);
        assert!(data.gamma.iter().all(|g| (g - 2.0).abs() < 1e-12));
        assert!(data.g.iter().all(|g| *g == 0.0));
        let w = boundary_vorticity(&vec![1.0; d.boundary.len()], &data);
        assert!(w.iter().all(|v| (v - 2.0).abs() < 1e-12));
    }

    #[test]
    fn affine_law() {
        let data = BoundaryVorticityData { gamma: vec![1.0; 3], g: vec![0.5; 3] };
        assert_eq!(boundary_vorticity(&[2.0; 3], &data), vec![2.5; 3]);
        let zero = BoundaryVorticityData { gamma: vec![0.0; 3], g: vec![0.0; 3] };
        assert_eq!(boundary_vorticity(&[7.0; 3], &zero), vec![0.0; 3]);
    }

    #[test]
    fn source_examples() {
        let d = build_domain(&Shape::unit_square(), 16).unwrap();
        let omega = d.sample(|x, y| x - y * y);
        let vel = vec![[0.3, -0.2]; d.len()];
        let s = ScenarioData::quiescent(&d);
        let zero = assemble_source(&d, &s, SourceVariant::Kappa, &omega, &vel, 0.0);
        assert!(zero.iter().all(|v| *v == 0.0));
        let s = s.with_friction(&d, |_, _| 1.0);
        let decay = assemble_source(&d, &s, SourceVariant::Kappa, &omega, &vel, 0.0);
        for (a, w) in decay.iter().zip(&omega) {
            assert!((a + w).abs() < 1e-14);
        }
        let s = s.with_forcing(&d, |_, _| 0.0, |x, _| x);
        let forced = assemble_source(&d, &s, SourceVariant::Kappa, &omega, &vel, 0.0);
        for (a, w) in forced.iter().zip(&omega) {
            assert!((a - (1.0 - w)).abs() < 1e-12);
        }
    }

    #[test]
    fn variant_selects_the_gradient_field() {
        let d = build_domain(&Shape::unit_square(), 16).unwrap();
        let s = ScenarioData::quiescent(&d).with_source(&d, |x, _| x);
        let vel = vec![[0.0, 1.0]; d.len()];
        let omega = vec![0.0; d.len()];
        let k = assemble_source(&d, &s, SourceVariant::Kappa, &omega, &vel, 0.0);
        assert!(k.iter().all(|v| *v == 0.0));
        // −(v·∇⊥)(x) = −(−u·0 + v·1) = −1.
        let a = assemble_source(&d, &s, SourceVariant::Source, &omega, &vel, 0.0);
        assert!(a.iter().all(|v| (v + 1.0).abs() < 1e-12));
    }
}
