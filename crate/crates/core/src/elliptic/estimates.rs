//! Discrete stand-ins for the Sobolev norms in the elliptic estimates.
//!
//! Second differences are taken only where the full 3×3 stencil is active and first
//! differences where all four neighbors are, so no boundary closure enters the proxies.

use crate::domain::{Dir, Domain};

fn lq(values: impl Iterator<Item = f64>, vol: f64, q: f64) -> f64 {
    if q.is_infinite() {
        values.fold(0.0f64, |m, v| m.max(v.abs()))
    } else {
        (values.map(|v| v.abs().powf(q)).sum::<f64>() * vol).powf(1.0 / q)
    }
}

/// ‖f‖_q + ‖D²f‖_q over cells with a full 3×3 stencil; `q = ∞` gives max norms.
pub fn w2_proxy(domain: &Domain, f: &[f64], q: f64) -> f64 {
    let grid = &domain.grid;
    let (dx, dy) = (grid.dx, grid.dy);
    let vol = domain.cell_volume();
    let mut second = Vec::new();
    for (c, &(i, j)) in grid.cells.iter().enumerate() {
        let (i, j) = (i as isize, j as isize);
        let at = |di: isize, dj: isize| grid.active(i + di, j + dj);
        let mut st = [[0.0; 3]; 3];
        let mut full = true;
        for (a, di) in (-1..=1).enumerate() {
            for (bb, dj) in (-1..=1).enumerate() {
                match at(di, dj) {
                    Some(k) => st[a][bb] = f[k],
                    None => full = false,
                }
            }
        }
        if !full {
            continue;
        }
        let fxx = (st[2][1] - 2.0 * f[c] + st[0][1]) / (dx * dx);
        let fyy = (st[1][2] - 2.0 * f[c] + st[1][0]) / (dy * dy);
        let fxy = (st[2][2] - st[2][0] - st[0][2] + st[0][0]) / (4.0 * dx * dy);
        second.extend([fxx, fxy, fxy, fyy]);
    }
    lq(f.iter().cloned(), vol, q) + lq(second.into_iter(), vol, q)
}

/// ‖v‖_q + ‖∇v‖_q for a cell-centered vector field, differences where all four neighbors exist.
pub fn velocity_w1_proxy(domain: &Domain, velocity: &[[f64; 2]], q: f64) -> f64 {
    let grid = &domain.grid;
    let vol = domain.cell_volume();
    let mut first = Vec::new();
    for c in 0..grid.len() {
        let nb: Vec<Option<usize>> = Dir::ALL.iter().map(|&d| grid.neighbor(c, d)).collect();
        if let [Some(e), Some(w), Some(n), Some(s)] = nb[..] {
            for k in 0..2 {
                first.push((velocity[e][k] - velocity[w][k]) / (2.0 * grid.dx));
                first.push((velocity[n][k] - velocity[s][k]) / (2.0 * grid.dy));
            }
        }
    }
    let values = velocity.iter().flat_map(|v| [v[0], v[1]]);
    lq(values, vol, q) + lq(first.into_iter(), vol, q)
}

/// Ratios echoing the elliptic and velocity estimates at exponent q.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateFit {
    /// ‖h‖_{W²_q} / ‖bω‖_q.
    pub w2_ratio: f64,
    /// ‖v‖_{W¹_q} / (‖ω‖_q + ‖A‖_q + ‖a‖_{W¹_q(Γ)}).
    pub velocity_constant: f64,
}

impl EstimateFit {
    #[allow(clippy::too_many_arguments)]
    pub fn measure(
        domain: &Domain,
        b: &[f64],
        omega: &[f64],
        stream: &[f64],
        velocity: &[[f64; 2]],
        source: &[f64],
        a: &[f64],
        q: f64,
    ) -> Self {
        let vol = domain.cell_volume();
        let b_omega: Vec<f64> = b.iter().zip(omega).map(|(b, w)| b * w).collect();
        let rhs = lq(b_omega.into_iter(), vol, q);
        let w2 = w2_proxy(domain, stream, q);
        let da = domain.boundary.derivative(a);
        let bnd = |f: &[f64]| -> f64 {
            if q.is_infinite() {
                f.iter().fold(0.0f64, |m, v| m.max(v.abs()))
            } else {
                let vals: Vec<f64> = f.iter().map(|v| v.abs().powf(q)).collect();
                domain.boundary.integrate(&vals).powf(1.0 / q)
            }
        };
        let data = lq(omega.iter().cloned(), vol, q) + lq(source.iter().cloned(), vol, q) + bnd(a) + bnd(&da);
        let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
        EstimateFit {
            w2_ratio: ratio(w2, rhs),
            velocity_constant: ratio(velocity_w1_proxy(domain, velocity, q), data),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, Shape};

    #[test]
    fn quadratic_has_exact_second_differences() {
        let d = build_domain(&Shape::unit_square(), 16).unwrap();
        let f = d.sample(|x, y| x * x + 3.0 * x * y);
        // Interior: fxx = 2, fxy = 3, fyy = 0.
        let inf = w2_proxy(&d, &f, f64::INFINITY);
        let fmax = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((inf - fmax - 3.0).abs() < 1e-9);
    }

    #[test]
    fn constant_velocity_has_no_gradient() {
        let d = build_domain(&Shape::unit_square(), 16).unwrap();
        let v = vec![[1.0, 0.0]; d.len()];
        assert!((velocity_w1_proxy(&d, &v, 2.0) - 1.0).abs() < 1e-12);
    }
}
