//! Physical data of a lake scenario: depth, shoreline fluxes, slip coefficients,
//! friction, bottom source, forcing and the initial vorticity.

use std::borrow::Cow;
use std::fmt;
use std::sync::Arc;

use crate::discrete::cell_curl;
use crate::domain::{Domain, Mollifier};
use crate::error::{LakeError, Result};

/// Closure producing a field at time t.
pub type FieldFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// A field on cells or shoreline nodes, constant or given as a function of time.
#[derive(Clone)]
pub enum TimeField {
    Steady(Vec<f64>),
    Unsteady(FieldFn),
}

impl TimeField {
    pub fn zeros(n: usize) -> Self {
        TimeField::Steady(vec![0.0; n])
    }

    pub fn unsteady(f: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static) -> Self {
        TimeField::Unsteady(Arc::new(f))
    }

    pub fn at(&self, t: f64) -> Cow<'_, [f64]> {
        match self {
            TimeField::Steady(v) => Cow::Borrowed(v),
            TimeField::Unsteady(f) => Cow::Owned(f(t)),
        }
    }

    pub fn is_steady(&self) -> bool {
        matches!(self, TimeField::Steady(_))
    }

    /// True for a steady field that vanishes identically.
    pub fn is_zero(&self) -> bool {
        matches!(self, TimeField::Steady(v) if v.iter().all(|x| *x == 0.0))
    }

    /// Applies `g` to the values at every time.
    pub fn map(&self, g: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        match self {
            TimeField::Steady(v) => TimeField::Steady(g(v)),
            TimeField::Unsteady(f) => {
                let f = f.clone();
                TimeField::unsteady(move |t| g(&f(t)))
            }
        }
    }
}

impl fmt::Debug for TimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeField::Steady(v) => write!(f, "Steady({} values)", v.len()),
            TimeField::Unsteady(_) => write!(f, "Unsteady(..)"),
        }
    }
}

/// Momentum forcing, either as the vector G or directly as rot(G/b).
#[derive(Debug, Clone)]
pub enum Forcing {
    None,
    Field { gx: TimeField, gy: TimeField },
    Curl(TimeField),
}

/// Which field enters the transport source through (v·∇⊥)(q/b).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceVariant {
    /// q = κ, the form obtained by taking rot of the momentum equation.
    #[default]
    Kappa,
    /// q = A, the variant written in the regularized problem.
    #[serde(rename = "A", alias = "a")]
    Source,
}

/// Scenario fields sampled on a [`Domain`]: cell fields have one value per active
/// cell, shoreline fields one value per boundary node.
#[derive(Debug, Clone)]
pub struct ScenarioData {
    /// Depth b at cells.
    pub b: Vec<f64>,
    /// Depth b at shoreline nodes.
    pub b_shore: Vec<f64>,
    /// Prescribed normal velocity a at shoreline nodes.
    pub a: TimeField,
    pub alpha: TimeField,
    pub eta: TimeField,
    /// Friction κ at cells.
    pub kappa: TimeField,
    /// Bottom source A at cells.
    pub source: TimeField,
    pub forcing: Forcing,
    pub omega0: Vec<f64>,
    /// Integrability exponent of the vorticity, 1 < p ≤ ∞.
    pub p: f64,
    /// When set to θ, shoreline vorticity data vanish on [0, θ] and ramp in over [θ, 2θ].
    pub shore_gate: Option<f64>,
}

impl ScenarioData {
    /// Unit depth, no flow through the shore, no forcing and zero vorticity.
    pub fn quiescent(domain: &Domain) -> Self {
        let n = domain.len();
        let m = domain.boundary.len();
        ScenarioData {
            b: vec![1.0; n],
            b_shore: vec![1.0; m],
            a: TimeField::zeros(m),
            alpha: TimeField::zeros(m),
            eta: TimeField::zeros(m),
            kappa: TimeField::zeros(n),
            source: TimeField::zeros(n),
            forcing: Forcing::None,
            omega0: vec![0.0; n],
            p: 2.0,
            shore_gate: None,
        }
    }

    pub fn with_depth(mut self, domain: &Domain, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.b = domain.sample(&f);
        self.b_shore = domain.sample_boundary(|x, y, _| f(x, y));
        check_depth(domain, &self.b, &self.b_shore)?;
        Ok(self)
    }

    pub fn with_shore_flux(mut self, domain: &Domain, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        self.a = TimeField::Steady(domain.sample_boundary(f));
        self
    }

    pub fn with_slip(
        mut self,
        domain: &Domain,
        alpha: impl Fn(f64, f64, f64) -> f64,
        eta: impl Fn(f64, f64, f64) -> f64,
    ) -> Self {
        self.alpha = TimeField::Steady(domain.sample_boundary(alpha));
        self.eta = TimeField::Steady(domain.sample_boundary(eta));
        self
    }

    pub fn with_friction(mut self, domain: &Domain, f: impl Fn(f64, f64) -> f64) -> Self {
        self.kappa = TimeField::Steady(domain.sample(f));
        self
    }

    pub fn with_source(mut self, domain: &Domain, f: impl Fn(f64, f64) -> f64) -> Self {
        self.source = TimeField::Steady(domain.sample(f));
        self
    }

    pub fn with_forcing(
        mut self,
        domain: &Domain,
        gx: impl Fn(f64, f64) -> f64,
        gy: impl Fn(f64, f64) -> f64,
    ) -> Self {
        self.forcing = Forcing::Field {
            gx: TimeField::Steady(domain.sample(gx)),
            gy: TimeField::Steady(domain.sample(gy)),
        };
        self
    }

    pub fn with_initial_vorticity(mut self, domain: &Domain, f: impl Fn(f64, f64) -> f64) -> Self {
        self.omega0 = domain.sample(f);
        self
    }

    pub fn b_min(&self) -> f64 {
        self.b.iter().chain(&self.b_shore).cloned().fold(f64::INFINITY, f64::min)
    }

    /// Checks sizes, positivity of the depth, κ ≥ 0 at t = 0 and finiteness of ω₀.
    pub fn validate(&self, domain: &Domain) -> Result<()> {
        let n = domain.len();
        let m = domain.boundary.len();
        let bad = |what: &str| Err(LakeError::InvalidArgument(what.to_string()));
        if self.b.len() != n || self.omega0.len() != n || self.b_shore.len() != m {
            return bad("scenario fields do not match the domain");
        }
        check_depth(domain, &self.b, &self.b_shore)?;
        for (name, field, len) in [
            ("a", &self.a, m),
            ("alpha", &self.alpha, m),
            ("eta", &self.eta, m),
            ("kappa", &self.kappa, n),
            ("A", &self.source, n),
        ] {
            let v = field.at(0.0);
            if v.len() != len {
                return bad(&format!("field {name} has {} values, expected {len}", v.len()));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return bad(&format!("field {name} is not finite"));
            }
        }
        if self.kappa.at(0.0).iter().any(|&k| k < 0.0) {
            return bad("friction kappa must be non-negative");
        }
        if self.omega0.iter().any(|x| !x.is_finite()) {
            return bad("initial vorticity is not finite");
        }
        if !(self.p > 1.0) {
            return bad("exponent p must exceed 1");
        }
        Ok(())
    }

    /// True when no field depends on time.
    pub fn is_steady(&self) -> bool {
        let forcing = match &self.forcing {
            Forcing::None => true,
            Forcing::Field { gx, gy } => gx.is_steady() && gy.is_steady(),
            Forcing::Curl(c) => c.is_steady(),
        };
        forcing
            && self.a.is_steady()
            && self.alpha.is_steady()
            && self.eta.is_steady()
            && self.kappa.is_steady()
            && self.source.is_steady()
            && self.shore_gate.is_none()
    }

    /// True when the flux potential H does not change in time.
    pub fn flux_is_steady(&self) -> bool {
        self.a.is_steady() && self.source.is_steady()
    }

    /// rot(G/b) at cells.
    pub fn curl_forcing(&self, domain: &Domain, t: f64) -> Vec<f64> {
        match &self.forcing {
            Forcing::None => vec![0.0; domain.len()],
            Forcing::Curl(c) => c.at(t).into_owned(),
            Forcing::Field { gx, gy } => {
                let fx: Vec<f64> = gx.at(t).iter().zip(&self.b).map(|(g, b)| g / b).collect();
                let fy: Vec<f64> = gy.at(t).iter().zip(&self.b).map(|(g, b)| g / b).collect();
                cell_curl(domain, &fx, &fy)
            }
        }
    }

    /// Multiplier of the shoreline vorticity data at time t.
    pub fn gate(&self, t: f64) -> f64 {
        match self.shore_gate {
            None => 1.0,
            Some(theta) => {
                let r = ((t - theta) / theta).clamp(0.0, 1.0);
                r * r * (3.0 - 2.0 * r)
            }
        }
    }

    /// Signed imbalance ∮ b a ds − ∫ A dx of the flux data at time t.
    pub fn flux_imbalance(&self, domain: &Domain, t: f64) -> f64 {
        imbalance(domain, &self.b_shore, &self.a.at(t), &self.source.at(t))
    }

    /// Scale used for the compatibility tolerance, ‖A‖₁ + ‖b a‖₁.
    pub fn flux_scale(&self, domain: &Domain, t: f64) -> f64 {
        let a = self.a.at(t);
        let ba: Vec<f64> = a.iter().zip(&self.b_shore).map(|(a, b)| (a * b).abs()).collect();
        let src: Vec<f64> = self.source.at(t).iter().map(|v| v.abs()).collect();
        domain.boundary.integrate(&ba) + domain.integrate(&src)
    }

    /// Returns a copy whose shoreline flux is adjusted, a ← a − c|a|, so that the
    /// compatibility residual vanishes; when a ≡ 0 the source A is shifted instead.
    pub fn balanced(&self, domain: &Domain) -> Self {
        let b_shore = self.b_shore.clone();
        let ds: Vec<f64> = domain.boundary.nodes.iter().map(|n| n.ds).collect();
        let vol = domain.cell_volume();
        let mut out = self.clone();
        if self.a.is_steady() && self.source.is_steady() {
            let (a, src) = balance_pair(&b_shore, &ds, vol, &self.a.at(0.0), &self.source.at(0.0));
            out.a = TimeField::Steady(a);
            out.source = TimeField::Steady(src);
        } else {
            let a = self.a.clone();
            let s = self.source.clone();
            let (b2, ds2) = (b_shore.clone(), ds.clone());
            out.a = TimeField::unsteady(move |t| balance_pair(&b2, &ds2, vol, &a.at(t), &s.at(t)).0);
            let a = self.a.clone();
            let s = self.source.clone();
            out.source = TimeField::unsteady(move |t| balance_pair(&b_shore, &ds, vol, &a.at(t), &s.at(t)).1);
        }
        out
    }

    /// Copy with every datum smoothed at scale θ and the shoreline vorticity data
    /// switched off on [0, θ]; the flux pair is re-balanced afterwards.
    pub fn mollified(&self, domain: &Domain, theta: f64) -> Self {
        let cell = Arc::new(Mollifier::new(domain, theta));
        let shore = Arc::new(domain.clone());
        let smooth_cells = |f: &TimeField| {
            let m = cell.clone();
            f.map(move |v| m.apply(v))
        };
        let smooth_shore = |f: &TimeField| {
            let d = shore.clone();
            f.map(move |v| crate::domain::mollify_boundary(&d, v, theta))
        };
        let mut out = self.clone();
        out.a = smooth_shore(&self.a);
        out.alpha = smooth_shore(&self.alpha);
        out.eta = smooth_shore(&self.eta);
        out.kappa = smooth_cells(&self.kappa);
        out.source = smooth_cells(&self.source);
        out.forcing = match &self.forcing {
            Forcing::None => Forcing::None,
            Forcing::Field { gx, gy } => Forcing::Field { gx: smooth_cells(gx), gy: smooth_cells(gy) },
            Forcing::Curl(c) => Forcing::Curl(smooth_cells(c)),
        };
        out.omega0 = cell.apply_initial(&self.omega0);
        out.shore_gate = Some(theta);
        out.balanced(domain)
    }
}

fn check_depth(domain: &Domain, b: &[f64], b_shore: &[f64]) -> Result<()> {
    for (k, &v) in b.iter().enumerate() {
        if !(v > 0.0 && v.is_finite()) {
            let [x, y] = domain.grid.centers[k];
            return Err(LakeError::NonPositiveDepth { value: v, x, y });
        }
    }
    for (k, &v) in b_shore.iter().enumerate() {
        if !(v > 0.0 && v.is_finite()) {
            let [x, y] = domain.boundary.nodes[k].position;
            return Err(LakeError::NonPositiveDepth { value: v, x, y });
        }
    }
    Ok(())
}

fn imbalance(domain: &Domain, b_shore: &[f64], a: &[f64], source: &[f64]) -> f64 {
    let ba: Vec<f64> = a.iter().zip(b_shore).map(|(a, b)| a * b).collect();
    domain.boundary.integrate(&ba) - domain.integrate(source)
}

fn balance_pair(b_shore: &[f64], ds: &[f64], vol: f64, a: &[f64], source: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let flux: f64 = a.iter().zip(b_shore).zip(ds).map(|((a, b), w)| a * b * w).sum();
    let total: f64 = source.iter().sum::<f64>() * vol;
    let r = flux - total;
    let weight: f64 = a.iter().zip(b_shore).zip(ds).map(|((a, b), w)| a.abs() * b * w).sum();
    if weight > 0.0 {
        let c = r / weight;
        (a.iter().map(|v| v - c * v.abs()).collect(), source.to_vec())
    } else {
        let shift = r / (vol * source.len() as f64);
        (a.to_vec(), source.iter().map(|v| v + shift).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, Shape};
    use std::f64::consts::TAU;

    #[test]
    fn sine_flux_is_compatible_and_uniform_flux_is_not() {
        let d = build_domain(&Shape::unit_disk(), 32).unwrap();
        let s = ScenarioData::quiescent(&d).with_shore_flux(&d, |_, _, s| s.sin());
        assert!(s.flux_imbalance(&d, 0.0).abs() < 1e-10);
        let s = ScenarioData::quiescent(&d).with_shore_flux(&d, |_, _, _| 1.0);
        assert!((s.flux_imbalance(&d, 0.0) - TAU).abs() < 1e-12);
    }

    #[test]
    fn balancing_keeps_the_sign_pattern() {
        let d = build_domain(&Shape::unit_disk(), 32).unwrap();
        let s = ScenarioData::quiescent(&d)
            .with_shore_flux(&d, |x, _, _| x + 0.2)
            .with_source(&d, |_, y| 0.1 * y)
            .balanced(&d);
        assert!(s.flux_imbalance(&d, 0.0).abs() < 1e-13);
        let before = d.sample_boundary(|x, _, _| x + 0.2);
        for (a, b) in s.a.at(0.0).iter().zip(&before) {
            assert!(a * b >= 0.0);
        }
    }

    #[test]
    fn zero_flux_balances_through_the_source() {
        let d = build_domain(&Shape::unit_square(), 16).unwrap();
        let s = ScenarioData::quiescent(&d).with_source(&d, |_, _| 1.0).balanced(&d);
        assert!(s.flux_imbalance(&d, 0.0).abs() < 1e-13);
        assert!(s.source.at(0.0).iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn depth_must_be_positive() {
        let d = build_domain(&Shape::unit_square(), 16).unwrap();
        assert!(matches!(
            ScenarioData::quiescent(&d).with_depth(&d, |x, _| x - 0.01),
            Err(LakeError::NonPositiveDepth { .. })
        ));
    }

    #[test]
    fn gate_ramps_smoothly() {
        let d = build_domain(&Shape::unit_square(), 16).unwrap();
        let mut s = ScenarioData::quiescent(&d);
        s.shore_gate = Some(0.1);
        assert_eq!(s.gate(0.05), 0.0);
        assert_eq!(s.gate(0.1), 0.0);
        assert!((s.gate(0.15) - 0.5).abs() < 1e-12);
        assert_eq!(s.gate(0.3), 1.0);
    }

    #[test]
    fn curl_of_linear_forcing() {
        let d = build_domain(&Shape::unit_disk(), 32).unwrap();
        let s = ScenarioData::quiescent(&d).with_forcing(&d, |_, _| 0.0, |x, _| x);
        for c in s.curl_forcing(&d, 0.0) {
            assert!((c - 1.0).abs() < 1e-12);
        }
    }
}
