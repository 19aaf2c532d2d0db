//! Traces of cell fields on the shoreline nodes by local least-squares quadratics.

use nalgebra::{DMatrix, SVD};

use crate::domain::Domain;

/// Minimum number of cells in a fit.
const MIN_POINTS: usize = 12;
/// Initial fit radius in grid spacings.
const FIT_RADIUS: f64 = 5.0;
/// Cells closer to the shore than this many spacings are left out of the fits: the
/// embedded-boundary solutions carry an O(h²) offset there that a fit through them
/// would turn into an O(h) slope.
const SKIP_LAYER: f64 = 1.0;

/// Precomputed fit weights at every shoreline node.
#[derive(Debug, Clone)]
pub struct ShoreTrace {
    value: Vec<Vec<(usize, f64)>>,
    gradient: Vec<Vec<(usize, [f64; 2])>>,
}

/// Velocity traced to the shoreline nodes.
#[derive(Debug, Clone)]
pub struct ShoreVelocity {
    pub full: Vec<[f64; 2]>,
    /// v·s with s the counterclockwise unit tangent.
    pub tangential: Vec<f64>,
}

impl ShoreTrace {
    pub fn new(domain: &Domain) -> Self {
        let grid = &domain.grid;
        let h = grid.spacing();
        let n = domain.boundary.len();
        let mut value = Vec::with_capacity(n);
        let mut gradient = Vec::with_capacity(n);
        for node in &domain.boundary.nodes {
            let x0 = node.position;
            let mut radius = FIT_RADIUS * h;
            let cells = loop {
                let found = cells_within(domain, x0, radius);
                let deep: Vec<usize> =
                    found.iter().copied().filter(|&c| domain.distance[c] >= SKIP_LAYER * h).collect();
                if deep.len() >= MIN_POINTS {
                    break deep;
                }
                if radius > 20.0 * h {
                    break found;
                }
                radius *= 1.25;
            };
            let points: Vec<[f64; 2]> = cells.iter().map(|&c| grid.centers[c]).collect();
            let pinv = fit_pseudo_inverse(&points, x0, h);
            value.push(cells.iter().enumerate().map(|(k, &c)| (c, pinv[(0, k)])).collect());
            gradient.push(
                cells
                    .iter()
                    .enumerate()
                    .map(|(k, &c)| (c, [pinv[(1, k)] / h, pinv[(2, k)] / h]))
                    .collect(),
            );
        }
        ShoreTrace { value, gradient }
    }

    /// Extrapolated values of a cell field at the shoreline nodes.
    pub fn value(&self, f: &[f64]) -> Vec<f64> {
        self.value.iter().map(|w| w.iter().map(|&(c, a)| a * f[c]).sum()).collect()
    }

    /// Gradient of a cell field at the shoreline nodes.
    pub fn gradient(&self, f: &[f64]) -> Vec<[f64; 2]> {
        apply_gradient(&self.gradient, f)
    }

    /// v = −(1/b)∇⊥h + ∇H at the nodes, using h = 0 and ∂H/∂n = a on the shore.
    pub fn velocity(
        &self,
        domain: &Domain,
        b_shore: &[f64],
        a: &[f64],
        stream: &[f64],
        flux_potential: &[f64],
    ) -> ShoreVelocity {
        let gh = self.gradient(stream);
        let gbig = self.gradient(flux_potential);
        let mut full = Vec::with_capacity(gh.len());
        let mut tangential = Vec::with_capacity(gh.len());
        for (k, node) in domain.boundary.nodes.iter().enumerate() {
            let n = node.normal;
            let t = node.tangent;
            let dn_h = gh[k][0] * n[0] + gh[k][1] * n[1];
            let vt = -dn_h / b_shore[k] + gbig[k][0] * t[0] + gbig[k][1] * t[1];
            let vn = a[k];
            tangential.push(vt);
            full.push([vt * t[0] + vn * n[0], vt * t[1] + vn * n[1]]);
        }
        ShoreVelocity { full, tangential }
    }
}

fn apply_gradient(weights: &[Vec<(usize, [f64; 2])>], f: &[f64]) -> Vec<[f64; 2]> {
    weights
        .iter()
        .map(|w| {
            w.iter().fold([0.0, 0.0], |acc, &(c, g)| [acc[0] + g[0] * f[c], acc[1] + g[1] * f[c]])
        })
        .collect()
}

fn cells_within(domain: &Domain, x0: [f64; 2], radius: f64) -> Vec<usize> {
    let grid = &domain.grid;
    let i0 = ((x0[0] - radius - grid.origin[0]) / grid.dx).floor() as isize;
    let i1 = ((x0[0] + radius - grid.origin[0]) / grid.dx).ceil() as isize;
    let j0 = ((x0[1] - radius - grid.origin[1]) / grid.dy).floor() as isize;
    let j1 = ((x0[1] + radius - grid.origin[1]) / grid.dy).ceil() as isize;
    let mut out = Vec::new();
    for j in j0..=j1 {
        for i in i0..=i1 {
            if let Some(c) = grid.active(i, j) {
                let p = grid.centers[c];
                if (p[0] - x0[0]).hypot(p[1] - x0[1]) <= radius {
                    out.push(c);
                }
            }
        }
    }
    out
}

/// Pseudo-inverse of the quadratic design matrix in coordinates scaled by `h`;
/// row 0 gives the value weights, rows 1 and 2 the scaled gradient weights.
fn fit_pseudo_inverse(points: &[[f64; 2]], x0: [f64; 2], h: f64) -> DMatrix<f64> {
    let m = DMatrix::from_fn(points.len(), 6, |r, c| {
        let xi = (points[r][0] - x0[0]) / h;
        let eta = (points[r][1] - x0[1]) / h;
        match c {
            0 => 1.0,
            1 => xi,
            2 => eta,
            3 => xi * xi,
            4 => xi * eta,
            _ => eta * eta,
        }
    });
    SVD::new(m, true, true)
        .pseudo_inverse(1e-10)
        .expect("SVD computed with both factors")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, Shape};
    use crate::elliptic::{Operators, SolveOptions};

    #[test]
    fn quadratics_are_traced_exactly() {
        let d = build_domain(&Shape::unit_disk(), 32).unwrap();
        let trace = ShoreTrace::new(&d);
        let f = d.sample(|x, y| 1.0 + 2.0 * x - y + x * y + 0.5 * y * y);
        let vals = trace.value(&f);
        let grads = trace.gradient(&f);
        for (k, n) in d.boundary.nodes.iter().enumerate() {
            let [x, y] = n.position;
            assert!((vals[k] - (1.0 + 2.0 * x - y + x * y + 0.5 * y * y)).abs() < 1e-9);
            assert!((grads[k][0] - (2.0 + y)).abs() < 1e-8);
            assert!((grads[k][1] - (-1.0 + x + y)).abs() < 1e-8);
        }
    }

    #[test]
    fn rigid_rotation_has_unit_tangential_speed() {
        let d = build_domain(&Shape::unit_disk(), 128).unwrap();
        let b = vec![1.0; d.len()];
        let bs = vec![1.0; d.boundary.len()];
        let ops = Operators::new(&d, &b, &bs);
        let mut h = vec![0.0; d.len()];
        ops.solve_dirichlet(&vec![2.0; d.len()], &mut h, SolveOptions { tol: 1e-12, ..Default::default() })
            .unwrap();
        let trace = ShoreTrace::new(&d);
        let zero = vec![0.0; d.boundary.len()];
        let v = trace.velocity(&d, &bs, &zero, &h, &vec![0.0; d.len()]);
        for vt in v.tangential {
            assert!((vt - 1.0).abs() < 5e-4, "{vt}");
        }
    }
}
