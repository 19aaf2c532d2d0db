//! Velocity v = −(1/b)∇⊥h + ∇H on cell sides.
//!
//! Normal components come from the same differences as the operators, tangential
//! ones from node values of h and H. With this pairing the discrete curl of v equals
//! the Dirichlet operator applied to h and the discrete divergence of b v equals the
//! Neumann balance, both exactly up to the linear solver tolerance.

use super::{Operators, ShoreFlux};
use crate::domain::{Dir, Domain, Side};

/// Cartesian velocity (u, v) on every interior face and shoreline link.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub faces: Vec<[f64; 2]>,
    pub links: Vec<[f64; 2]>,
}

impl VelocityField {
    pub fn zeros(domain: &Domain) -> Self {
        VelocityField { faces: vec![[0.0; 2]; domain.faces.len()], links: vec![[0.0; 2]; domain.links.len()] }
    }

    /// Velocity on the given side of a cell.
    pub fn side(&self, side: Side) -> [f64; 2] {
        match side {
            Side::Face(k) => self.faces[k],
            Side::Link(k) => self.links[k],
        }
    }

    /// Cell-centered velocity from the normal components of opposite sides.
    pub fn cell_centered(&self, domain: &Domain) -> Vec<[f64; 2]> {
        domain
            .sides
            .iter()
            .map(|s| {
                let u = 0.5 * (self.side(s[Dir::East.index()])[0] + self.side(s[Dir::West.index()])[0]);
                let v = 0.5 * (self.side(s[Dir::North.index()])[1] + self.side(s[Dir::South.index()])[1]);
                [u, v]
            })
            .collect()
    }

    /// Largest side speed, max(|u|, |v|).
    pub fn max_speed(&self) -> f64 {
        self.faces
            .iter()
            .chain(&self.links)
            .fold(0.0f64, |m, v| m.max(v[0].abs()).max(v[1].abs()))
    }

    /// Outward volume fluxes b v·n |f| of every side of a cell, in [`Dir::ALL`] order.
    pub fn outward_fluxes(&self, domain: &Domain, ops: &Operators, cell: usize) -> [f64; 4] {
        let mut out = [0.0; 4];
        for dir in Dir::ALL {
            let side = domain.sides[cell][dir.index()];
            let (b, vel) = match side {
                Side::Face(k) => (ops.face_b[k], self.faces[k]),
                Side::Link(k) => (ops.link_b[k], self.links[k]),
            };
            let normal = if dir.is_x() { vel[0] } else { vel[1] };
            out[dir.index()] = dir.sign() * b * normal * domain.side_length(dir);
        }
        out
    }
}

/// Builds the side velocities from h, H and the shoreline fluxes recovered for H.
pub fn reconstruct_velocity(
    domain: &Domain,
    ops: &Operators,
    stream: &[f64],
    flux_potential: &[f64],
    shore_flux: &ShoreFlux,
) -> VelocityField {
    let grid = &domain.grid;
    let (dx, dy) = (grid.dx, grid.dy);
    let (h_node, big_h_node) = node_values(domain, stream, flux_potential);

    let faces = domain
        .faces
        .iter()
        .zip(&ops.face_b)
        .zip(&shore_flux.faces)
        .map(|((f, &b), &extra)| {
            let [n0, n1] = f.nodes;
            let (lo, hi) = (f.lo, f.hi);
            if f.x_normal {
                let u = (h_node[n1] - h_node[n0]) / (dy * b)
                    + (flux_potential[hi] - flux_potential[lo]) / dx
                    + extra / (b * dy);
                let v = -(stream[hi] - stream[lo]) / (dx * b) + (big_h_node[n1] - big_h_node[n0]) / dy;
                [u, v]
            } else {
                let v = -(h_node[n1] - h_node[n0]) / (dx * b)
                    + (flux_potential[hi] - flux_potential[lo]) / dy
                    + extra / (b * dx);
                let u = (stream[hi] - stream[lo]) / (dy * b) + (big_h_node[n1] - big_h_node[n0]) / dx;
                [u, v]
            }
        })
        .collect();

    let links = domain
        .links
        .iter()
        .enumerate()
        .map(|(k, l)| {
            let b = ops.link_b[k];
            let [n0, n1] = l.nodes;
            let normal = l.dir.sign() * shore_flux.links[k] / (b * domain.side_length(l.dir));
            // h vanishes on the shore at distance θΔ from the center.
            let gap = l.theta * domain.side_spacing(l.dir);
            let hc = stream[l.cell];
            if l.dir.is_x() {
                let v = l.dir.sign() * hc / (gap * b) + (big_h_node[n1] - big_h_node[n0]) / dy;
                [normal, v]
            } else {
                let u = -l.dir.sign() * hc / (gap * b) + (big_h_node[n1] - big_h_node[n0]) / dx;
                [u, normal]
            }
        })
        .collect();

    VelocityField { faces, links }
}

/// Node values: h averaged over the four cells (zero on nodes touching the exterior),
/// H averaged over the adjacent active cells.
fn node_values(domain: &Domain, stream: &[f64], flux_potential: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let grid = &domain.grid;
    let mut h = vec![0.0; grid.node_count()];
    let mut big_h = vec![0.0; grid.node_count()];
    for jn in 0..=grid.ny {
        for in_ in 0..=grid.nx {
            let node = grid.node_index(in_, jn);
            let mut sum_h = 0.0;
            let mut sum_big = 0.0;
            let mut count = 0;
            for (di, dj) in [(-1, -1), (0, -1), (-1, 0), (0, 0)] {
                if let Some(c) = grid.active(in_ as isize + di, jn as isize + dj) {
                    sum_h += stream[c];
                    sum_big += flux_potential[c];
                    count += 1;
                }
            }
            if count > 0 {
                big_h[node] = sum_big / count as f64;
            }
            if !domain.wall_node[node] {
                h[node] = 0.25 * sum_h;
            }
        }
    }
    (h, big_h)
}

/// Discrete curl per cell: circulation of the tangential components divided by the cell area.
pub fn rot_h(domain: &Domain, velocity: &VelocityField) -> Vec<f64> {
    let (dx, dy) = (domain.grid.dx, domain.grid.dy);
    let vol = domain.cell_volume();
    domain
        .sides
        .iter()
        .map(|s| {
            let ve = velocity.side(s[Dir::East.index()])[1];
            let vw = velocity.side(s[Dir::West.index()])[1];
            let un = velocity.side(s[Dir::North.index()])[0];
            let us = velocity.side(s[Dir::South.index()])[0];
            ((ve - vw) * dy - (un - us) * dx) / vol
        })
        .collect()
}

/// Discrete div(b v) per cell from the outward side fluxes.
pub fn div_h(domain: &Domain, ops: &Operators, velocity: &VelocityField) -> Vec<f64> {
    let vol = domain.cell_volume();
    (0..domain.len())
        .map(|c| velocity.outward_fluxes(domain, ops, c).iter().sum::<f64>() / vol)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, Shape};
    use crate::elliptic::SolveOptions;

    #[test]
    fn rot_and_div_match_the_potential_equations() {
        let d = build_domain(&Shape::Ellipse { center: [0.0, 0.0], semi_axes: [1.0, 0.7] }, 40).unwrap();
        let b = d.sample(|x, y| 1.0 + 0.25 * x - 0.1 * y * y);
        let bs = d.sample_boundary(|x, y, _| 1.0 + 0.25 * x - 0.1 * y * y);
        let ops = Operators::new(&d, &b, &bs);
        let omega = d.sample(|x, y| (2.0 * x).sin() + y);
        let opts = SolveOptions { tol: 1e-13, ..Default::default() };
        let mut h = vec![0.0; d.len()];
        ops.solve_dirichlet(&omega, &mut h, opts).unwrap();
        let a = d.sample_boundary(|x, _, s| x + 0.3 * (2.0 * s).cos());
        let source = d.sample(|_, y| 0.5 * y);
        let mut big_h = vec![0.0; d.len()];
        ops.solve_neumann(&d, &a, &bs, &source, &mut big_h, opts).unwrap();
        let flux = ops.shore_fluxes(&d, &a, &bs, &source, &big_h);
        let v = reconstruct_velocity(&d, &ops, &h, &big_h, &flux);
        let rot = rot_h(&d, &v);
        let div = div_h(&d, &ops, &v);
        let scale = omega.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for i in 0..d.len() {
            assert!((rot[i] - omega[i]).abs() < 1e-8 * scale.max(1.0), "rot at {i}");
            assert!((div[i] - source[i]).abs() < 1e-8, "div at {i}");
        }
    }

    #[test]
    fn uniform_flow_through_the_square() {
        let d = build_domain(&Shape::unit_square(), 16).unwrap();
        let b = vec![1.0; d.len()];
        let bs = vec![1.0; d.boundary.len()];
        let ops = Operators::new(&d, &b, &bs);
        let big_h = d.sample(|x, _| x - 0.5);
        let a: Vec<f64> = d.boundary.nodes.iter().map(|n| n.normal[0]).collect();
        let flux = ops.shore_fluxes(&d, &a, &bs, &vec![0.0; d.len()], &big_h);
        let v = reconstruct_velocity(&d, &ops, &vec![0.0; d.len()], &big_h, &flux);
        for c in v.cell_centered(&d) {
            assert!((c[0] - 1.0).abs() < 1e-12 && c[1].abs() < 1e-12);
        }
    }
}
