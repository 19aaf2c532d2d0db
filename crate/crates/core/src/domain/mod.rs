//! Lake geometry on a uniform Cartesian grid.
//!
//! A cell is active when its center lies strictly inside the lake, so the discrete
//! domain is a staircase of whole cells. Boundary data live on a separate arc-length
//! mesh of nodes that traverse the shoreline counterclockwise.

mod mollify;
mod partition;
mod shape;

pub use mollify::{mollify_boundary, mollify_data, mollify_field, Mollified, Mollifier, MollifyMode};
pub use partition::{cutoff_one_sigma, partition_boundary, BoundaryPartition, FlowClass};
pub use shape::Shape;

use std::collections::VecDeque;

use crate::error::{LakeError, Result};

/// Minimum number of cells per side accepted by [`build_domain`].
pub const MIN_RESOLUTION: usize = 16;

/// Smallest admissible crossing fraction for a boundary link.
pub(crate) const THETA_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dir {
    East,
    West,
    North,
    South,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::East, Dir::West, Dir::North, Dir::South];

    pub fn offset(self) -> (isize, isize) {
        match self {
            Dir::East => (1, 0),
            Dir::West => (-1, 0),
            Dir::North => (0, 1),
            Dir::South => (0, -1),
        }
    }

    pub fn unit(self) -> [f64; 2] {
        let (i, j) = self.offset();
        [i as f64, j as f64]
    }

    pub fn is_x(self) -> bool {
        matches!(self, Dir::East | Dir::West)
    }

    /// +1 when the direction points along the positive axis.
    pub fn sign(self) -> f64 {
        match self {
            Dir::East | Dir::North => 1.0,
            Dir::West | Dir::South => -1.0,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Face between two active cells; `lo` is the west (or south) cell.
#[derive(Debug, Clone, Copy)]
pub struct Face {
    pub lo: usize,
    pub hi: usize,
    pub x_normal: bool,
    /// Grid nodes at the two ends of the face, ordered along the increasing tangential axis.
    pub nodes: [usize; 2],
}

/// Cell side that crosses the shoreline.
#[derive(Debug, Clone, Copy)]
pub struct Link {
    pub cell: usize,
    pub dir: Dir,
    /// Fraction of the center-to-center distance at which the shoreline is crossed.
    pub theta: f64,
    pub point: [f64; 2],
    /// Arc-length coordinate of the crossing point.
    pub s: f64,
    /// Outward unit normal of the shoreline at the crossing.
    pub normal: [f64; 2],
    pub nodes: [usize; 2],
}

impl Link {
    /// n · n_f, the cosine between the shoreline normal and the cell side normal.
    pub fn normal_alignment(&self) -> f64 {
        let u = self.dir.unit();
        self.normal[0] * u[0] + self.normal[1] * u[1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Face(usize),
    Link(usize),
}

#[derive(Debug, Clone)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub origin: [f64; 2],
    pub dx: f64,
    pub dy: f64,
    /// Active index per grid cell, `usize::MAX` when inactive.
    pub index: Vec<usize>,
    /// Grid coordinates (i, j) of every active cell.
    pub cells: Vec<(usize, usize)>,
    pub centers: Vec<[f64; 2]>,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn active(&self, i: isize, j: isize) -> Option<usize> {
        if i < 0 || j < 0 || i as usize >= self.nx || j as usize >= self.ny {
            return None;
        }
        let k = self.index[j as usize * self.nx + i as usize];
        (k != usize::MAX).then_some(k)
    }

    pub fn neighbor(&self, cell: usize, dir: Dir) -> Option<usize> {
        let (i, j) = self.cells[cell];
        let (di, dj) = dir.offset();
        self.active(i as isize + di, j as isize + dj)
    }

    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    pub fn node_position(&self, node: usize) -> [f64; 2] {
        let i = node % (self.nx + 1);
        let j = node / (self.nx + 1);
        [self.origin[0] + i as f64 * self.dx, self.origin[1] + j as f64 * self.dy]
    }

    pub fn node_count(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    pub fn spacing(&self) -> f64 {
        self.dx.max(self.dy)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BoundaryNode {
    pub position: [f64; 2],
    pub s: f64,
    /// Quadrature weight of the node in arc length.
    pub ds: f64,
    pub normal: [f64; 2],
    pub tangent: [f64; 2],
    pub curvature: f64,
}

/// Closed shoreline sampled counterclockwise.
#[derive(Debug, Clone)]
pub struct BoundaryCurve {
    pub nodes: Vec<BoundaryNode>,
    pub length: f64,
    /// Sharp corners as (arc-length position, turning angle).
    pub corners: Vec<(f64, f64)>,
}

impl BoundaryCurve {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Quadrature ∮ f ds.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.nodes.iter().zip(values).map(|(n, v)| n.ds * v).sum()
    }

    /// Total turning, ∮ k ds plus sharp corner angles.
    pub fn total_turning(&self) -> f64 {
        let smooth: f64 = self.nodes.iter().map(|n| n.curvature * n.ds).sum();
        smooth + self.corners.iter().map(|c| c.1).sum::<f64>()
    }

    fn wrap(&self, s: f64) -> f64 {
        s.rem_euclid(self.length)
    }

    /// Index of the node at or before `s` and the fraction towards the next node.
    pub fn bracket(&self, s: f64) -> (usize, usize, f64) {
        let n = self.nodes.len();
        let s = self.wrap(s);
        let k = match self.nodes.binary_search_by(|node| node.s.total_cmp(&s)) {
            Ok(k) => k,
            Err(0) => n - 1,
            Err(k) => k - 1,
        };
        let next = (k + 1) % n;
        let start = self.nodes[k].s;
        let mut end = self.nodes[next].s;
        if end <= start {
            end += self.length;
        }
        let mut ss = s;
        if ss < start {
            ss += self.length;
        }
        (k, next, ((ss - start) / (end - start)).clamp(0.0, 1.0))
    }

    /// Linear interpolation of a node field at arc length `s`.
    pub fn interpolate(&self, values: &[f64], s: f64) -> f64 {
        let (k, next, f) = self.bracket(s);
        (1.0 - f) * values[k] + f * values[next]
    }

    /// Outward unit normal at arc length `s`, interpolated between nodes.
    pub fn normal_at(&self, s: f64) -> [f64; 2] {
        let (k, next, f) = self.bracket(s);
        let a = self.nodes[k].normal;
        let b = self.nodes[next].normal;
        let n = [(1.0 - f) * a[0] + f * b[0], (1.0 - f) * a[1] + f * b[1]];
        let l = n[0].hypot(n[1]);
        [n[0] / l, n[1] / l]
    }

    /// Centered second-order derivative along the arc on the periodic node mesh.
    pub fn derivative(&self, values: &[f64]) -> Vec<f64> {
        let n = self.nodes.len();
        (0..n)
            .map(|k| {
                let prev = (k + n - 1) % n;
                let next = (k + 1) % n;
                let hm = (self.nodes[k].s - self.nodes[prev].s).rem_euclid(self.length);
                let hp = (self.nodes[next].s - self.nodes[k].s).rem_euclid(self.length);
                let (fm, f0, fp) = (values[prev], values[k], values[next]);
                (hm * hm * (fp - f0) + hp * hp * (f0 - fm)) / (hm * hp * (hm + hp))
            })
            .collect()
    }

    /// Arc-length coordinate of the shoreline point closest to `p`.
    pub fn locate(&self, p: [f64; 2]) -> f64 {
        let n = self.nodes.len();
        let dist2 = |q: [f64; 2]| (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2);
        let k = (0..n)
            .min_by(|&a, &b| dist2(self.nodes[a].position).total_cmp(&dist2(self.nodes[b].position)))
            .unwrap_or(0);
        let mut best = (dist2(self.nodes[k].position), self.nodes[k].s);
        for (a, b) in [((k + n - 1) % n, k), (k, (k + 1) % n)] {
            let pa = self.nodes[a].position;
            let pb = self.nodes[b].position;
            let d = [pb[0] - pa[0], pb[1] - pa[1]];
            let l2 = d[0] * d[0] + d[1] * d[1];
            let t = (((p[0] - pa[0]) * d[0] + (p[1] - pa[1]) * d[1]) / l2).clamp(0.0, 1.0);
            let q = [pa[0] + t * d[0], pa[1] + t * d[1]];
            let dq = dist2(q);
            if dq < best.0 {
                let span = (self.nodes[b].s - self.nodes[a].s).rem_euclid(self.length);
                best = (dq, self.wrap(self.nodes[a].s + t * span));
            }
        }
        best.1
    }

    /// Signed distance to the node polyline, positive inside.
    fn polyline_distance(&self, p: [f64; 2]) -> f64 {
        let n = self.nodes.len();
        let mut best = f64::INFINITY;
        let mut winding = 0i32;
        for k in 0..n {
            let a = self.nodes[k].position;
            let b = self.nodes[(k + 1) % n].position;
            let d = [b[0] - a[0], b[1] - a[1]];
            let w = [p[0] - a[0], p[1] - a[1]];
            let t = ((w[0] * d[0] + w[1] * d[1]) / (d[0] * d[0] + d[1] * d[1])).clamp(0.0, 1.0);
            best = best.min((w[0] - t * d[0]).hypot(w[1] - t * d[1]));
            let cross = d[0] * w[1] - d[1] * w[0];
            if a[1] <= p[1] {
                if b[1] > p[1] && cross > 0.0 {
                    winding += 1;
                }
            } else if b[1] <= p[1] && cross < 0.0 {
                winding -= 1;
            }
        }
        if winding != 0 {
            best
        } else {
            -best
        }
    }
}

/// Grid, shoreline and the discrete topology shared by all operators.
#[derive(Debug, Clone)]
pub struct Domain {
    pub shape: Shape,
    pub resolution: usize,
    pub grid: Grid,
    pub boundary: BoundaryCurve,
    /// Signed distance at active cell centers.
    pub distance: Vec<f64>,
    pub faces: Vec<Face>,
    pub links: Vec<Link>,
    /// Sides of every active cell in [`Dir::ALL`] order.
    pub sides: Vec<[Side; 4]>,
    /// Grid nodes touching at least one inactive cell.
    pub wall_node: Vec<bool>,
    /// Width of the tube around the shoreline where the distance is smooth.
    pub sigma0: f64,
    pub max_curvature: f64,
}

impl Domain {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn cell_volume(&self) -> f64 {
        self.grid.cell_volume()
    }

    /// Area of the discrete (staircase) domain.
    pub fn area(&self) -> f64 {
        self.len() as f64 * self.cell_volume()
    }

    /// Cell quadrature Σ f_i |cell|.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() * self.cell_volume()
    }

    pub fn signed_distance(&self, p: [f64; 2]) -> f64 {
        signed_distance_of(&self.shape, &self.boundary, p)
    }

    /// Evaluates `f(x, y)` at every active cell center.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.grid.centers.iter().map(|c| f(c[0], c[1])).collect()
    }

    /// Evaluates `f(x, y, s)` at every shoreline node.
    pub fn sample_boundary(&self, f: impl Fn(f64, f64, f64) -> f64) -> Vec<f64> {
        self.boundary
            .nodes
            .iter()
            .map(|n| f(n.position[0], n.position[1], n.s))
            .collect()
    }

    /// Face area |f| of a side in the given direction.
    pub fn side_length(&self, dir: Dir) -> f64 {
        if dir.is_x() {
            self.grid.dy
        } else {
            self.grid.dx
        }
    }

    /// Center-to-center spacing across a side in the given direction.
    pub fn side_spacing(&self, dir: Dir) -> f64 {
        if dir.is_x() {
            self.grid.dx
        } else {
            self.grid.dy
        }
    }

    /// Cells adjacent to the shoreline.
    pub fn boundary_cells(&self) -> Vec<usize> {
        let mut flag = vec![false; self.len()];
        for l in &self.links {
            flag[l.cell] = true;
        }
        (0..self.len()).filter(|&i| flag[i]).collect()
    }
}

fn signed_distance_of(shape: &Shape, boundary: &BoundaryCurve, p: [f64; 2]) -> f64 {
    shape
        .analytic_distance(p)
        .unwrap_or_else(|| boundary.polyline_distance(p))
}

/// Builds the grid over the bounding box of `shape` with `resolution` cells per side.
pub fn build_domain(shape: &Shape, resolution: usize) -> Result<Domain> {
    shape.validate()?;
    if resolution < MIN_RESOLUTION {
        return Err(LakeError::ResolutionTooCoarse {
            resolution,
            reason: format!("at least {MIN_RESOLUTION} cells per side are required"),
        });
    }
    let (lo, hi) = shape.bounding_box();
    let dx = (hi[0] - lo[0]) / resolution as f64;
    let dy = (hi[1] - lo[1]) / resolution as f64;
    let h = dx.max(dy);

    let (samples, corners) = shape::sample_boundary(shape, 0.5 * dx.min(dy))?;
    let length = match shape {
        Shape::Ellipse { .. } => {
            let last = samples.last().expect("boundary has nodes");
            last.s + last.ds
        }
        _ => samples.iter().map(|s| s.ds).sum(),
    };
    let nodes: Vec<BoundaryNode> = samples
        .iter()
        .map(|s| BoundaryNode {
            position: s.position,
            s: s.s,
            ds: s.ds,
            normal: [s.tangent[1], -s.tangent[0]],
            tangent: s.tangent,
            curvature: s.curvature,
        })
        .collect();
    let boundary = BoundaryCurve { nodes, length, corners };
    let max_curvature = boundary
        .nodes
        .iter()
        .map(|n| n.curvature.abs())
        .fold(0.0, f64::max);
    if max_curvature * h > 0.5 {
        return Err(LakeError::ResolutionTooCoarse {
            resolution,
            reason: format!(
                "curvature {max_curvature:.3} needs spacing below {:.3e}, have {h:.3e}",
                0.5 / max_curvature
            ),
        });
    }

    let nx = resolution;
    let ny = resolution;
    let center = |i: usize, j: usize| [lo[0] + (i as f64 + 0.5) * dx, lo[1] + (j as f64 + 0.5) * dy];
    let mut inside = vec![false; nx * ny];
    let mut full_distance = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let d = signed_distance_of(shape, &boundary, center(i, j));
            full_distance[j * nx + i] = d;
            inside[j * nx + i] = d > 0.0;
        }
    }
    keep_largest_component(&mut inside, nx, ny);

    let mut index = vec![usize::MAX; nx * ny];
    let mut cells = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if inside[j * nx + i] {
                index[j * nx + i] = cells.len();
                cells.push((i, j));
            }
        }
    }
    if cells.is_empty() {
        return Err(LakeError::ResolutionTooCoarse {
            resolution,
            reason: "no cell center lies inside the shape".into(),
        });
    }
    let centers: Vec<[f64; 2]> = cells.iter().map(|&(i, j)| center(i, j)).collect();
    let distance: Vec<f64> = cells.iter().map(|&(i, j)| full_distance[j * nx + i]).collect();
    let grid = Grid { nx, ny, origin: lo, dx, dy, index, cells, centers };

    let mut wall_node = vec![false; grid.node_count()];
    for jn in 0..=ny {
        for in_ in 0..=nx {
            let touching_outside = [(-1, -1), (0, -1), (-1, 0), (0, 0)].iter().any(|(di, dj)| {
                grid.active(in_ as isize + di, jn as isize + dj).is_none()
            });
            wall_node[grid.node_index(in_, jn)] = touching_outside;
        }
    }

    let side_nodes = |i: usize, j: usize, dir: Dir| -> [usize; 2] {
        match dir {
            Dir::East => [grid.node_index(i + 1, j), grid.node_index(i + 1, j + 1)],
            Dir::West => [grid.node_index(i, j), grid.node_index(i, j + 1)],
            Dir::North => [grid.node_index(i, j + 1), grid.node_index(i + 1, j + 1)],
            Dir::South => [grid.node_index(i, j), grid.node_index(i + 1, j)],
        }
    };

    let mut faces = Vec::new();
    let mut links = Vec::new();
    let mut sides = vec![[Side::Face(0); 4]; grid.len()];
    for (c, &(i, j)) in grid.cells.iter().enumerate() {
        for dir in [Dir::East, Dir::North] {
            if let Some(nb) = grid.neighbor(c, dir) {
                let f = faces.len();
                faces.push(Face { lo: c, hi: nb, x_normal: dir.is_x(), nodes: side_nodes(i, j, dir) });
                sides[c][dir.index()] = Side::Face(f);
                let back = if dir == Dir::East { Dir::West } else { Dir::South };
                sides[nb][back.index()] = Side::Face(f);
            }
        }
        for dir in Dir::ALL {
            if grid.neighbor(c, dir).is_some() {
                continue;
            }
            let p0 = grid.centers[c];
            let u = dir.unit();
            let span = if dir.is_x() { dx } else { dy };
            let along = |t: f64| [p0[0] + t * span * u[0], p0[1] + t * span * u[1]];
            let theta = crossing_fraction(|t| signed_distance_of(shape, &boundary, along(t)));
            let point = along(theta);
            let s = boundary.locate(point);
            let normal = boundary.normal_at(s);
            sides[c][dir.index()] = Side::Link(links.len());
            links.push(Link {
                cell: c,
                dir,
                theta: theta.max(THETA_FLOOR),
                point,
                s,
                normal,
                nodes: side_nodes(i, j, dir),
            });
        }
    }

    let inradius = distance.iter().cloned().fold(0.0, f64::max);
    let sigma0 = if max_curvature > 0.0 {
        (0.5 / max_curvature).min(0.5 * inradius)
    } else {
        0.5 * inradius
    };

    Ok(Domain {
        shape: shape.clone(),
        resolution,
        grid,
        boundary,
        distance,
        faces,
        links,
        sides,
        wall_node,
        sigma0,
        max_curvature,
    })
}

/// Root of a function positive at 0 on [0, 1]; 1/2 when there is no sign change.
fn crossing_fraction(f: impl Fn(f64) -> f64) -> f64 {
    let (mut a, mut b) = (0.0, 1.0);
    let fb = f(b);
    if fb > 0.0 {
        return 0.5;
    }
    if fb == 0.0 {
        return 1.0;
    }
    for _ in 0..64 {
        let m = 0.5 * (a + b);
        if f(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Drops every inside cell not 4-connected to the largest inside component.
fn keep_largest_component(inside: &mut [bool], nx: usize, ny: usize) {
    let mut label = vec![usize::MAX; nx * ny];
    let mut sizes = Vec::new();
    for start in 0..nx * ny {
        if !inside[start] || label[start] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        let mut size = 0;
        let mut queue = VecDeque::from([start]);
        label[start] = id;
        while let Some(k) = queue.pop_front() {
            size += 1;
            let (i, j) = (k % nx, k / nx);
            let mut push = |ii: usize, jj: usize| {
                let q = jj * nx + ii;
                if inside[q] && label[q] == usize::MAX {
                    label[q] = id;
                    queue.push_back(q);
                }
            };
            if i > 0 {
                push(i - 1, j);
            }
            if i + 1 < nx {
                push(i + 1, j);
            }
            if j > 0 {
                push(i, j - 1);
            }
            if j + 1 < ny {
                push(i, j + 1);
            }
        }
        sizes.push(size);
    }
    if let Some(best) = (0..sizes.len()).max_by_key(|&k| sizes[k]) {
        for (k, flag) in inside.iter_mut().enumerate() {
            *flag = *flag && label[k] == best;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn unit_disk_curvature_is_one() {
        let d = build_domain(&Shape::unit_disk(), 64).unwrap();
        for n in &d.boundary.nodes {
            assert!((n.curvature - 1.0).abs() < 1e-12);
            assert!((n.normal[0] * n.tangent[0] + n.normal[1] * n.tangent[1]).abs() < 1e-14);
            assert!((n.normal[0].hypot(n.normal[1]) - 1.0).abs() < 1e-14);
        }
        assert!((d.boundary.length - TAU).abs() < 1e-12);
    }

    #[test]
    fn rounded_square_curvature() {
        let shape = Shape::Rectangle { min: [0.0, 0.0], max: [1.0, 1.0], corner_radius: 0.2 };
        let d = build_domain(&shape, 64).unwrap();
        let mut flat = 0;
        let mut round = 0;
        for n in &d.boundary.nodes {
            let [x, y] = n.position;
            let on_flat = (0.2..=0.8).contains(&x) || (0.2..=0.8).contains(&y);
            if on_flat {
                assert_eq!(n.curvature, 0.0);
                flat += 1;
            } else {
                assert!((n.curvature - 5.0).abs() < 1e-12);
                round += 1;
            }
        }
        assert!(flat > 0 && round > 0);
    }

    #[test]
    fn ellipse_curvature_at_major_vertex() {
        let shape = Shape::Ellipse { center: [0.0, 0.0], semi_axes: [2.0, 1.0] };
        let d = build_domain(&shape, 64).unwrap();
        let first = d.boundary.nodes[0];
        assert_eq!(first.position, [2.0, 0.0]);
        assert!((first.curvature - 2.0).abs() < 1e-12);
    }

    #[test]
    fn disk_signed_distance() {
        let d = build_domain(&Shape::unit_disk(), 32).unwrap();
        assert_eq!(d.signed_distance([0.0, 0.0]), 1.0);
        assert_eq!(d.signed_distance([1.0, 0.0]), 0.0);
        assert_eq!(d.signed_distance([1.5, 0.0]), -0.5);
    }

    #[test]
    fn gauss_bonnet_for_every_shape() {
        let shapes = [
            Shape::unit_disk(),
            Shape::unit_square(),
            Shape::Rectangle { min: [-1.0, 0.0], max: [2.0, 1.0], corner_radius: 0.25 },
            Shape::Ellipse { center: [0.3, 0.0], semi_axes: [1.5, 1.0] },
            Shape::Polygon {
                vertices: vec![[0.0, 0.0], [2.0, 0.0], [2.5, 1.5], [0.5, 2.0]],
                corner_radius: 0.3,
            },
        ];
        for shape in shapes {
            let d = build_domain(&shape, 64).unwrap();
            let turning = d.boundary.total_turning();
            assert!((turning / TAU - 1.0).abs() < 0.01, "{shape:?}: {turning}");
        }
    }

    #[test]
    fn arc_length_increases_and_nodes_run_counterclockwise() {
        let shape = Shape::Polygon {
            vertices: vec![[0.0, 0.0], [0.5, 2.0], [2.5, 1.5], [2.0, 0.0]],
            corner_radius: 0.3,
        };
        let d = build_domain(&shape, 48).unwrap();
        let nodes = &d.boundary.nodes;
        assert!(nodes.windows(2).all(|w| w[1].s > w[0].s));
        assert!(nodes.last().unwrap().s < d.boundary.length);
        let area: f64 = (0..nodes.len())
            .map(|k| {
                let a = nodes[k].position;
                let b = nodes[(k + 1) % nodes.len()].position;
                a[0] * b[1] - b[0] * a[1]
            })
            .sum();
        assert!(area > 0.0);
        // Normals point away from the polygon.
        for n in nodes {
            let out = [n.position[0] + 1e-3 * n.normal[0], n.position[1] + 1e-3 * n.normal[1]];
            assert!(d.signed_distance(out) < 0.0);
        }
    }

    #[test]
    fn coarse_or_curved_grids_are_rejected() {
        assert!(matches!(
            build_domain(&Shape::unit_disk(), 8),
            Err(LakeError::ResolutionTooCoarse { .. })
        ));
        let tight = Shape::Rectangle { min: [0.0, 0.0], max: [4.0, 4.0], corner_radius: 0.1 };
        assert!(matches!(build_domain(&tight, 16), Err(LakeError::ResolutionTooCoarse { .. })));
        let sharp = Shape::Polygon { vertices: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], corner_radius: 0.0 };
        assert!(matches!(build_domain(&sharp, 32), Err(LakeError::UnsupportedShape(_))));
    }

    #[test]
    fn square_links_cross_at_half_spacing() {
        let d = build_domain(&Shape::unit_square(), 16).unwrap();
        assert_eq!(d.len(), 256);
        assert_eq!(d.links.len(), 64);
        for l in &d.links {
            assert!((l.theta - 0.5).abs() < 1e-12);
            assert!((l.normal_alignment() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn disk_links_land_on_the_circle() {
        let d = build_domain(&Shape::unit_disk(), 32).unwrap();
        for l in &d.links {
            assert!((l.point[0].hypot(l.point[1]) - 1.0).abs() < 1e-12);
            let ang = l.point[1].atan2(l.point[0]).rem_euclid(TAU);
            let ds = (ang - l.s).abs();
            assert!(ds.min(TAU - ds) < 1e-3, "s {} vs angle {}", l.s, ang);
            assert!(l.normal_alignment() > 0.0);
        }
        assert!((d.area() - PI).abs() < 0.1);
    }

    #[test]
    fn derivative_of_sine_on_circle() {
        let d = build_domain(&Shape::unit_disk(), 64).unwrap();
        let f = d.sample_boundary(|_, _, s| s.sin());
        let df = d.boundary.derivative(&f);
        for (n, v) in d.boundary.nodes.iter().zip(df) {
            assert!((v - n.s.cos()).abs() < 1e-4);
        }
    }
}
