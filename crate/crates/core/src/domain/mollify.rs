//! Tent-kernel smoothing of cell and shoreline fields.
//!
//! The cell kernel is the radial tent (1 − r/θ)₊ restricted to active cells and
//! rescaled symmetrically (Sinkhorn) so that every row and column sums to one. The
//! smoothing then preserves constants and does not increase any L_q norm.

use super::Domain;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MollifyMode {
    /// Plain smoothing of a cell field.
    Interior,
    /// Smoothing along the shoreline of a node field.
    Boundary,
    /// Smoothing of initial data, forced to zero where d < θ.
    Initial,
}

/// Reusable smoothing operator for one domain and scale.
#[derive(Debug, Clone)]
pub struct Mollifier {
    theta: f64,
    active: bool,
    rows: Vec<Vec<(usize, f64)>>,
    distance: Vec<f64>,
}

impl Mollifier {
    pub fn new(domain: &Domain, theta: f64) -> Self {
        let grid = &domain.grid;
        let active = theta >= grid.spacing();
        if !active {
            log::warn!(
                "mollification scale {theta} below grid spacing {}; data left unsmoothed",
                grid.spacing()
            );
            return Mollifier { theta, active, rows: Vec::new(), distance: domain.distance.clone() };
        }
        let ri = (theta / grid.dx).ceil() as isize;
        let rj = (theta / grid.dy).ceil() as isize;
        let mut rows = Vec::with_capacity(grid.len());
        for (c, &(i, j)) in grid.cells.iter().enumerate() {
            let mut row = Vec::new();
            for dj in -rj..=rj {
                for di in -ri..=ri {
                    if let Some(nb) = grid.active(i as isize + di, j as isize + dj) {
                        let r = (di as f64 * grid.dx).hypot(dj as f64 * grid.dy);
                        let w = 1.0 - r / theta;
                        if w > 0.0 {
                            row.push((nb, w));
                        }
                    }
                }
            }
            debug_assert!(row.iter().any(|&(k, _)| k == c));
            rows.push(row);
        }
        // Symmetric Sinkhorn scaling d_i K_ij d_j with unit row sums.
        let n = rows.len();
        let mut d = vec![1.0; n];
        for _ in 0..2000 {
            let kd: Vec<f64> = rows.iter().map(|r| r.iter().map(|&(j, w)| w * d[j]).sum()).collect();
            let mut worst: f64 = 0.0;
            for i in 0..n {
                worst = worst.max((d[i] * kd[i] - 1.0).abs());
            }
            if worst < 1e-15 {
                break;
            }
            for i in 0..n {
                d[i] = (d[i] / kd[i]).sqrt();
            }
        }
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, w) in row.iter_mut() {
                *w *= d[i] * d[*j];
            }
        }
        Mollifier { theta, active, rows, distance: domain.distance.clone() }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Smooths a cell field.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        if !self.active {
            return f.to_vec();
        }
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(j, w)| w * f[j]).sum())
            .collect()
    }

    /// Smooths initial data after removing it from the layer d < 2θ; the result vanishes for d < θ.
    pub fn apply_initial(&self, f: &[f64]) -> Vec<f64> {
        if !self.active {
            return f.to_vec();
        }
        let cut: Vec<f64> = f
            .iter()
            .zip(&self.distance)
            .map(|(&v, &d)| if d >= 2.0 * self.theta { v } else { 0.0 })
            .collect();
        self.apply(&cut)
            .into_iter()
            .zip(&self.distance)
            .map(|(v, &d)| if d < self.theta { 0.0 } else { v })
            .collect()
    }
}

/// Periodic tent smoothing of a shoreline field over arc length θ.
pub fn mollify_boundary(domain: &Domain, values: &[f64], theta: f64) -> Vec<f64> {
    let curve = &domain.boundary;
    let n = curve.len();
    let mean_ds = curve.length / n as f64;
    if theta < 2.0 * mean_ds {
        log::warn!("shoreline smoothing scale {theta} below node spacing; data left unsmoothed");
        return values.to_vec();
    }
    (0..n)
        .map(|k| {
            let sk = curve.nodes[k].s;
            let mut num = 0.0;
            let mut den = 0.0;
            for (j, node) in curve.nodes.iter().enumerate() {
                let mut r = (node.s - sk).rem_euclid(curve.length);
                r = r.min(curve.length - r);
                let w = (1.0 - r / theta).max(0.0) * node.ds;
                if w > 0.0 {
                    num += w * values[j];
                    den += w;
                }
            }
            num / den
        })
        .collect()
}

/// One-shot smoothing; see [`Mollifier`] to reuse the cell kernel.
pub fn mollify_data(domain: &Domain, values: &[f64], theta: f64, mode: MollifyMode) -> Vec<f64> {
    match mode {
        MollifyMode::Boundary => mollify_boundary(domain, values, theta),
        MollifyMode::Interior => Mollifier::new(domain, theta).apply(values),
        MollifyMode::Initial => Mollifier::new(domain, theta).apply_initial(values),
    }
}

/// Smoothing of a cell field, the common case of [`mollify_data`].
pub fn mollify_field(domain: &Domain, values: &[f64], theta: f64) -> Vec<f64> {
    mollify_data(domain, values, theta, MollifyMode::Interior)
}

/// Norm ratios ‖f^θ‖_q / ‖f‖_q reported by the smoothing monitor.
#[derive(Debug, Clone, Copy)]
pub struct Mollified {
    pub l1_ratio: f64,
    pub l2_ratio: f64,
    pub max_ratio: f64,
}

impl Mollified {
    pub fn measure(original: &[f64], smoothed: &[f64]) -> Self {
        let norm = |f: &[f64], q: f64| f.iter().map(|v| v.abs().powf(q)).sum::<f64>().powf(1.0 / q);
        let max = |f: &[f64]| f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let ratio = |a: f64, b: f64| if b == 0.0 { 0.0 } else { a / b };
        Mollified {
            l1_ratio: ratio(norm(smoothed, 1.0), norm(original, 1.0)),
            l2_ratio: ratio(norm(smoothed, 2.0), norm(original, 2.0)),
            max_ratio: ratio(max(smoothed), max(original)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, Shape};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constants_are_preserved() {
        let d = build_domain(&Shape::unit_disk(), 32).unwrap();
        let f = vec![3.5; d.len()];
        for v in mollify_data(&d, &f, 0.2, MollifyMode::Interior) {
            assert!((v - 3.5).abs() < 1e-12);
        }
        let g = vec![-2.0; d.boundary.len()];
        for v in mollify_data(&d, &g, 0.2, MollifyMode::Boundary) {
            assert!((v + 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn initial_mode_vanishes_near_the_shore() {
        let d = build_domain(&Shape::unit_disk(), 64).unwrap();
        let f = vec![1.0; d.len()];
        let m = mollify_data(&d, &f, 0.1, MollifyMode::Initial);
        for (v, dist) in m.iter().zip(&d.distance) {
            if *dist < 0.1 {
                assert_eq!(*v, 0.0);
            }
            if *dist > 0.35 {
                assert!((v - 1.0).abs() < 1e-12);
            }
            assert!((-1e-12..=1.0 + 1e-12).contains(v));
        }
    }

    #[test]
    fn random_fields_do_not_grow() {
        let d = build_domain(&Shape::unit_square(), 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let f: Vec<f64> = (0..d.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let m = Mollified::measure(&f, &mollify_field(&d, &f, 0.15));
            assert!(m.l2_ratio <= 1.0 + 1e-12);
            assert!(m.l1_ratio <= 1.0 + 1e-12);
            assert!(m.max_ratio <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn below_spacing_is_a_no_op() {
        let d = build_domain(&Shape::unit_square(), 16).unwrap();
        let f: Vec<f64> = (0..d.len()).map(|k| k as f64).collect();
        assert_eq!(mollify_field(&d, &f, 0.01), f);
    }
}
