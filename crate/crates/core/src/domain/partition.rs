use super::Domain;
use crate::error::{LakeError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FlowClass {
    Inflow,
    Tangential,
    Outflow,
}

/// Shoreline nodes split by the sign of the prescribed normal velocity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryPartition {
    pub inflow: Vec<usize>,
    pub tangential: Vec<usize>,
    pub outflow: Vec<usize>,
}

impl BoundaryPartition {
    pub fn classify(&self, node: usize) -> FlowClass {
        if self.inflow.binary_search(&node).is_ok() {
            FlowClass::Inflow
        } else if self.outflow.binary_search(&node).is_ok() {
            FlowClass::Outflow
        } else {
            FlowClass::Tangential
        }
    }
}

/// Classifies nodes by the sign of `a`; |a| ≤ `eps_rel`·max|a| counts as zero.
pub fn partition_boundary(a: &[f64], eps_rel: f64) -> BoundaryPartition {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let eps = eps_rel * scale;
    let mut part = BoundaryPartition { inflow: Vec::new(), tangential: Vec::new(), outflow: Vec::new() };
    for (k, &v) in a.iter().enumerate() {
        if v < -eps {
            part.inflow.push(k);
        } else if v > eps {
            part.outflow.push(k);
        } else {
            part.tangential.push(k);
        }
    }
    part
}

/// Piecewise-linear cutoff in the distance: 0 below σ, 1 above 2σ.
pub fn cutoff_one_sigma(domain: &Domain, sigma: f64) -> Result<Vec<f64>> {
    if !(sigma > 0.0 && sigma < 0.5 * domain.sigma0) {
        return Err(LakeError::Sigma {
            sigma,
            reason: format!("need 0 < sigma < {:.4e} (half the smooth tube width)", 0.5 * domain.sigma0),
        });
    }
    Ok(domain.distance.iter().map(|&d| cutoff_value(d, sigma)).collect())
}

pub(crate) fn cutoff_value(d: f64, sigma: f64) -> f64 {
    ((d - sigma) / sigma).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, Shape};

    #[test]
    fn zero_flux_is_all_tangential() {
        let p = partition_boundary(&[0.0; 10], 1e-12);
        assert_eq!(p.tangential.len(), 10);
        assert!(p.inflow.is_empty() && p.outflow.is_empty());
    }

    #[test]
    fn sine_splits_in_half() {
        let d = build_domain(&Shape::unit_disk(), 32).unwrap();
        let a = d.sample_boundary(|_, _, s| s.sin());
        let p = partition_boundary(&a, 1e-12);
        let n = d.boundary.len();
        assert_eq!(p.inflow.len(), p.outflow.len());
        assert_eq!(p.inflow.len() + p.outflow.len() + p.tangential.len(), n);
        assert!(p.tangential.len() <= 2);
        assert_eq!(p, partition_boundary(&a, 1e-12));
    }

    #[test]
    fn uniform_inflow() {
        let p = partition_boundary(&[-1.0; 7], 1e-12);
        assert_eq!(p.inflow, (0..7).collect::<Vec<_>>());
        assert_eq!(p.classify(3), FlowClass::Inflow);
    }

    #[test]
    fn cutoff_values() {
        assert_eq!(cutoff_value(0.3, 0.1), 1.0);
        assert_eq!(cutoff_value(0.05, 0.1), 0.0);
        assert!((cutoff_value(0.15, 0.1) - 0.5).abs() < 1e-15);
        let d = build_domain(&Shape::unit_disk(), 32).unwrap();
        assert!(cutoff_one_sigma(&d, 0.1).is_ok());
        assert!(cutoff_one_sigma(&d, 0.3).is_err());
    }
}
