//! Cell-centered difference operators shared by the source terms and the monitors.

use crate::domain::{Dir, Domain};

/// Gradient at cell centers: central where both neighbors are active, one-sided
/// where only one is, zero for an isolated direction.
pub fn cell_gradient(domain: &Domain, f: &[f64]) -> Vec<[f64; 2]> {
    let grid = &domain.grid;
    (0..grid.len())
        .map(|c| {
            let diff = |plus: Dir, minus: Dir, h: f64| {
                match (grid.neighbor(c, plus), grid.neighbor(c, minus)) {
                    (Some(p), Some(m)) => (f[p] - f[m]) / (2.0 * h),
                    (Some(p), None) => (f[p] - f[c]) / h,
                    (None, Some(m)) => (f[c] - f[m]) / h,
                    (None, None) => 0.0,
                }
            };
            [diff(Dir::East, Dir::West, grid.dx), diff(Dir::North, Dir::South, grid.dy)]
        })
        .collect()
}

/// Scalar curl ∂_x F_y − ∂_y F_x of a cell vector field.
pub fn cell_curl(domain: &Domain, fx: &[f64], fy: &[f64]) -> Vec<f64> {
    let gx = cell_gradient(domain, fy);
    let gy = cell_gradient(domain, fx);
    gx.iter().zip(&gy).map(|(a, b)| a[0] - b[1]).collect()
}

/// (v·∇⊥) f = −u ∂_y f + v ∂_x f at cell centers.
pub fn perp_advection(velocity: &[[f64; 2]], grad: &[[f64; 2]]) -> Vec<f64> {
    velocity
        .iter()
        .zip(grad)
        .map(|(v, g)| -v[0] * g[1] + v[1] * g[0])
        .collect()
}

pub fn max_abs(f: &[f64]) -> f64 {
    f.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, Shape};

    #[test]
    fn gradient_is_exact_for_linear_fields() {
        let d = build_domain(&Shape::unit_disk(), 32).unwrap();
        let f = d.sample(|x, y| 3.0 * x - 2.0 * y + 1.0);
        for g in cell_gradient(&d, &f) {
            assert!((g[0] - 3.0).abs() < 1e-12 && (g[1] + 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn curl_of_rotation_field() {
        let d = build_domain(&Shape::unit_square(), 16).unwrap();
        let fx = d.sample(|_, y| -y);
        let fy = d.sample(|x, _| x);
        for c in cell_curl(&d, &fx, &fy) {
            assert!((c - 2.0).abs() < 1e-12);
        }
    }
}
