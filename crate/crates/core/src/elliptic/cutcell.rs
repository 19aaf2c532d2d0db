//! Cut-cell finite volumes for div(b∇H) = A with prescribed shoreline flux b a.
//!
//! Unknowns live on every grid cell that meets the lake, active cells first. Each
//! control volume is the part of its cell inside the shoreline, with the shoreline
//! linearized between level-set values at the grid nodes. Faces carry the fraction of
//! their length inside, and the shoreline flux enters through the pieces of the
//! boundary polyline that fall in the cell.

use std::collections::VecDeque;

use crate::domain::{Dir, Domain};
use crate::linalg::Csr;

/// A piece of the boundary polyline inside one cut cell; the data are interpolated
/// between two boundary nodes.
#[derive(Debug, Clone, Copy)]
struct Piece {
    cell: usize,
    nodes: (usize, usize),
    frac: f64,
    /// Arc length of the piece.
    length: f64,
}

#[derive(Debug, Clone)]
pub struct CutCells {
    /// Unknowns; the first `domain.len()` are the active cells in domain order.
    pub len: usize,
    /// |cell ∩ lake| per unknown.
    pub volume: Vec<f64>,
    /// Active cell supplying the source value of each extra unknown.
    donor: Vec<usize>,
    pieces: Vec<Piece>,
}

/// Area of {φ > 0} in the rectangle with the given corner values (counterclockwise
/// from the lower left), with φ linear along every edge.
fn inside_area(phi: [f64; 4], dx: f64, dy: f64) -> f64 {
    if phi.iter().all(|v| *v >= 0.0) {
        return dx * dy;
    }
    if phi.iter().all(|v| *v < 0.0) {
        return 0.0;
    }
    let corners = [[0.0, 0.0], [dx, 0.0], [dx, dy], [0.0, dy]];
    let mut poly: Vec<[f64; 2]> = Vec::with_capacity(8);
    for k in 0..4 {
        let (a, b) = (k, (k + 1) % 4);
        if phi[a] >= 0.0 {
            poly.push(corners[a]);
        }
        if (phi[a] >= 0.0) != (phi[b] >= 0.0) {
            let t = phi[a] / (phi[a] - phi[b]);
            poly.push([
                corners[a][0] + t * (corners[b][0] - corners[a][0]),
                corners[a][1] + t * (corners[b][1] - corners[a][1]),
            ]);
        }
    }
    let n = poly.len();
    0.5 * (0..n)
        .map(|k| {
            let (p, q) = (poly[k], poly[(k + 1) % n]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum::<f64>()
        .abs()
}

/// Fraction of a segment inside, for level-set values at its ends.
fn inside_fraction(a: f64, b: f64) -> f64 {
    match (a >= 0.0, b >= 0.0) {
        (true, true) => 1.0,
        (false, false) => 0.0,
        (true, false) => a / (a - b),
        (false, true) => b / (b - a),
    }
}

impl CutCells {
    /// The cut cells and the matrix of −div(b∇·) on them.
    pub fn new(domain: &Domain, b: &[f64], b_shore: &[f64]) -> (Self, Csr) {
        let grid = &domain.grid;
        let (nx, ny) = (grid.nx, grid.ny);
        let (dx, dy) = (grid.dx, grid.dy);
        let n_active = domain.len();
        let h = dx.max(dy);

        // Level set at the nodes of cells near the shoreline; deep nodes are inside.
        let mut phi = vec![f64::INFINITY; grid.node_count()];
        let mut candidate = vec![false; nx * ny];
        for (c, &(i, j)) in grid.cells.iter().enumerate() {
            let near = domain.distance[c] < 1.5 * h;
            for dj in -1isize..=1 {
                for di in -1isize..=1 {
                    let (ii, jj) = (i as isize + di, j as isize + dj);
                    if ii < 0 || jj < 0 || ii as usize >= nx || jj as usize >= ny {
                        continue;
                    }
                    let (ii, jj) = (ii as usize, jj as usize);
                    let outside = grid.active(ii as isize, jj as isize).is_none();
                    if outside {
                        candidate[jj * nx + ii] = true;
                    }
                    if near || outside {
                        for (ni, nj) in [(ii, jj), (ii + 1, jj), (ii + 1, jj + 1), (ii, jj + 1)] {
                            let node = grid.node_index(ni, nj);
                            if phi[node].is_infinite() {
                                phi[node] = domain.signed_distance(grid.node_position(node));
                            }
                        }
                    }
                }
            }
        }
        let corner_phi = |i: usize, j: usize| {
            [
                phi[grid.node_index(i, j)],
                phi[grid.node_index(i + 1, j)],
                phi[grid.node_index(i + 1, j + 1)],
                phi[grid.node_index(i, j + 1)],
            ]
        };

        // Unknowns: active cells, then extra cells reached through faces partly inside.
        let mut index = vec![usize::MAX; nx * ny];
        let mut cells: Vec<(usize, usize)> = grid.cells.clone();
        for (c, &(i, j)) in grid.cells.iter().enumerate() {
            index[j * nx + i] = c;
        }
        let face_fraction = |i: usize, j: usize, dir: Dir| -> f64 {
            let (a, b) = match dir {
                Dir::East => (grid.node_index(i + 1, j), grid.node_index(i + 1, j + 1)),
                Dir::West => (grid.node_index(i, j), grid.node_index(i, j + 1)),
                Dir::North => (grid.node_index(i, j + 1), grid.node_index(i + 1, j + 1)),
                Dir::South => (grid.node_index(i, j), grid.node_index(i + 1, j)),
            };
            inside_fraction(phi[a], phi[b])
        };
        let dirs = [Dir::East, Dir::West, Dir::North, Dir::South];
        let mut queue: VecDeque<usize> = (0..n_active).collect();
        while let Some(u) = queue.pop_front() {
            let (i, j) = cells[u];
            for dir in dirs {
                let (oi, oj) = dir.offset();
                let (ii, jj) = (i as isize + oi, j as isize + oj);
                if ii < 0 || jj < 0 || ii as usize >= nx || jj as usize >= ny {
                    continue;
                }
                let k = jj as usize * nx + ii as usize;
                if index[k] != usize::MAX || !candidate[k] || face_fraction(i, j, dir) <= 0.0 {
                    continue;
                }
                index[k] = cells.len();
                cells.push((ii as usize, jj as usize));
                queue.push_back(index[k]);
            }
        }
        let len = cells.len();

        let volume: Vec<f64> = cells
            .iter()
            .enumerate()
            .map(|(u, &(i, j))| {
                let area = inside_area(corner_phi(i, j), dx, dy);
                // An active cell keeps a positive volume even if the linearized shoreline misses its center.
                if u < n_active {
                    area.max(1e-3 * dx * dy)
                } else {
                    area
                }
            })
            .collect();
        let center = |(i, j): (usize, usize)| [grid.origin[0] + (i as f64 + 0.5) * dx, grid.origin[1] + (j as f64 + 0.5) * dy];
        let depth: Vec<f64> = (0..len)
            .map(|u| {
                if u < n_active {
                    b[u]
                } else {
                    domain.boundary.interpolate(b_shore, domain.boundary.locate(center(cells[u])))
                }
            })
            .collect();
        let donor: Vec<usize> = (n_active..len)
            .map(|u| {
                let p = center(cells[u]);
                let dist = |c: usize| {
                    let q = grid.centers[c];
                    (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)
                };
                let (i, j) = cells[u];
                let mut best: Option<usize> = None;
                for dj in -2isize..=2 {
                    for di in -2isize..=2 {
                        if let Some(c) = grid.active(i as isize + di, j as isize + dj) {
                            if best.map_or(true, |b| dist(c) < dist(b)) {
                                best = Some(c);
                            }
                        }
                    }
                }
                best.unwrap_or_else(|| (0..n_active).min_by(|&a, &b| dist(a).total_cmp(&dist(b))).unwrap_or(0))
            })
            .collect();

        let mut entries = Vec::with_capacity(5 * len);
        for u in 0..len {
            let (i, j) = cells[u];
            for dir in [Dir::East, Dir::North] {
                let (oi, oj) = dir.offset();
                let (ii, jj) = (i as isize + oi, j as isize + oj);
                if ii < 0 || jj < 0 || ii as usize >= nx || jj as usize >= ny {
                    continue;
                }
                let v = index[jj as usize * nx + ii as usize];
                if v == usize::MAX {
                    continue;
                }
                let mut frac = face_fraction(i, j, dir);
                if u < n_active && v < n_active {
                    frac = frac.max(1e-2);
                }
                if frac <= 0.0 {
                    continue;
                }
                let ratio = if dir.is_x() { dy / dx } else { dx / dy };
                let w = 0.5 * (depth[u] + depth[v]) * frac * ratio;
                entries.extend([(u, u, w), (v, v, w), (u, v, -w), (v, u, -w)]);
            }
            entries.push((u, u, 0.0));
        }
        let matrix = Csr::from_triplets(len, entries);

        let pieces = boundary_pieces(domain, &index, &cells, n_active);
        (CutCells { len, volume, donor, pieces }, matrix)
    }

    /// Right-hand side Σ_pieces b a − A|cell ∩ lake| per unknown, balanced to sum zero:
    /// the shoreline flux is shifted by a multiple of its magnitude, or the source by its
    /// mean when no flux is prescribed. Also returns that shift of the source.
    pub fn rhs(&self, domain: &Domain, a: &[f64], b_shore: &[f64], source: &[f64]) -> (Vec<f64>, f64) {
        let n_active = domain.len();
        let src = |u: usize| if u < n_active { source[u] } else { source[self.donor[u - n_active]] };
        let mut flux = vec![0.0; self.len];
        for p in &self.pieces {
            let (k, l) = p.nodes;
            let value = |v: &[f64]| (1.0 - p.frac) * v[k] + p.frac * v[l];
            flux[p.cell] += p.length * value(a) * value(b_shore);
        }
        let total_source: f64 = (0..self.len).map(|u| src(u) * self.volume[u]).sum();
        let total_flux: f64 = flux.iter().sum();
        let weight: f64 = flux.iter().map(|f| f.abs()).sum();
        let mut shift = 0.0;
        if weight > 0.0 {
            let c = (total_source - total_flux) / weight;
            flux.iter_mut().for_each(|f| *f += c * f.abs());
        } else {
            shift = total_source / self.volume.iter().sum::<f64>();
        }
        let rhs = (0..self.len).map(|u| flux[u] - (src(u) - shift) * self.volume[u]).collect();
        (rhs, shift)
    }

    /// Initial guess on all unknowns from active-cell values.
    pub fn extend(&self, active: &[f64]) -> Vec<f64> {
        let mut out = active.to_vec();
        out.extend(self.donor.iter().map(|&c| active[c]));
        out
    }
}

/// Splits every segment of the boundary polyline at the grid lines and assigns each
/// piece to the unknown of the cell holding its midpoint.
fn boundary_pieces(domain: &Domain, index: &[usize], cells: &[(usize, usize)], n_active: usize) -> Vec<Piece> {
    let grid = &domain.grid;
    let nodes = &domain.boundary.nodes;
    let n = nodes.len();
    let mut pieces = Vec::with_capacity(3 * n);
    for k in 0..n {
        let l = (k + 1) % n;
        let (p, q) = (nodes[k].position, nodes[l].position);
        let mut cuts = vec![0.0, 1.0];
        for axis in 0..2 {
            let (origin, step) = if axis == 0 { (grid.origin[0], grid.dx) } else { (grid.origin[1], grid.dy) };
            let (a, b) = ((p[axis] - origin) / step, (q[axis] - origin) / step);
            let (lo, hi) = (a.min(b), a.max(b));
            let mut line = lo.floor() + 1.0;
            while line < hi {
                cuts.push((line - a) / (b - a));
                line += 1.0;
            }
        }
        cuts.sort_by(f64::total_cmp);
        for w in cuts.windows(2) {
            if w[1] <= w[0] {
                continue;
            }
            let t = 0.5 * (w[0] + w[1]);
            let mid = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
            let i = (((mid[0] - grid.origin[0]) / grid.dx).floor() as isize).clamp(0, grid.nx as isize - 1) as usize;
            let j = (((mid[1] - grid.origin[1]) / grid.dy).floor() as isize).clamp(0, grid.ny as isize - 1) as usize;
            let mut cell = index[j * grid.nx + i];
            if cell == usize::MAX {
                // Piece in a cell cut off from the lake: hand it to the nearest unknown.
                let dist = |u: usize| {
                    let (ci, cj) = cells[u];
                    (ci as f64 - i as f64).powi(2) + (cj as f64 - j as f64).powi(2)
                };
                cell = (0..cells.len()).min_by(|&a, &b| dist(a).total_cmp(&dist(b))).unwrap_or(0);
            }
            debug_assert!(cell < cells.len() && n_active <= cells.len());
            pieces.push(Piece { cell, nodes: (k, l), frac: t, length: (w[1] - w[0]) * nodes[k].ds });
        }
    }
    pieces
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn areas_of_simple_cuts() {
        assert_eq!(inside_area([1.0; 4], 2.0, 1.0), 2.0);
        assert_eq!(inside_area([-1.0; 4], 2.0, 1.0), 0.0);
        // Vertical line through the middle of a unit square.
        assert!((inside_area([1.0, -1.0, -1.0, 1.0], 1.0, 1.0) - 0.5).abs() < 1e-15);
        // One corner inside, cut at the edge midpoints.
        assert!((inside_area([1.0, -1.0, -3.0, -1.0], 1.0, 1.0) - 0.125).abs() < 1e-15);
        assert_eq!(inside_fraction(1.0, -3.0), 0.25);
    }
}
