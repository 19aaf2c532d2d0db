use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{LakeError, Result};

/// Lake outline. Every variant is traversed counterclockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
pub enum Shape {
    Disk {
        #[serde(default)]
        center: [f64; 2],
        radius: f64,
    },
    Ellipse {
        #[serde(default)]
        center: [f64; 2],
        semi_axes: [f64; 2],
    },
    /// Axis-aligned rectangle; `corner_radius = 0` gives sharp corners.
    Rectangle {
        min: [f64; 2],
        max: [f64; 2],
        #[serde(default)]
        corner_radius: f64,
    },
    /// Polygon whose corners are replaced by circular fillets.
    Polygon {
        vertices: Vec<[f64; 2]>,
        corner_radius: f64,
    },
}

impl Shape {
    pub fn unit_disk() -> Self {
        Shape::Disk { center: [0.0, 0.0], radius: 1.0 }
    }

    pub fn unit_square() -> Self {
        Shape::Rectangle { min: [0.0, 0.0], max: [1.0, 1.0], corner_radius: 0.0 }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(LakeError::UnsupportedShape(m.to_string()));
        match self {
            Shape::Disk { radius, center } => {
                if !(radius.is_finite() && *radius > 0.0) || !finite2(center) {
                    return bad("disk radius must be positive and finite");
                }
            }
            Shape::Ellipse { semi_axes, center } => {
                if !semi_axes.iter().all(|a| a.is_finite() && *a > 0.0) || !finite2(center) {
                    return bad("ellipse semi-axes must be positive and finite");
                }
            }
            Shape::Rectangle { min, max, corner_radius } => {
                if !finite2(min) || !finite2(max) || max[0] <= min[0] || max[1] <= min[1] {
                    return bad("rectangle needs min < max");
                }
                let half = 0.5 * (max[0] - min[0]).min(max[1] - min[1]);
                if !(corner_radius.is_finite() && *corner_radius >= 0.0 && *corner_radius <= half)
                {
                    return bad("rectangle corner radius must lie in [0, half the short side]");
                }
            }
            Shape::Polygon { vertices, corner_radius } => {
                if vertices.len() < 3 || !vertices.iter().all(finite2) {
                    return bad("polygon needs at least three finite vertices");
                }
                if !(corner_radius.is_finite() && *corner_radius > 0.0) {
                    return bad("polygon corners must be rounded (corner_radius > 0)");
                }
                if signed_area(vertices).abs() < 1e-14 {
                    return bad("degenerate polygon");
                }
            }
        }
        Ok(())
    }

    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        match self {
            Shape::Disk { center, radius } => (
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            ),
            Shape::Ellipse { center, semi_axes } => (
                [center[0] - semi_axes[0], center[1] - semi_axes[1]],
                [center[0] + semi_axes[0], center[1] + semi_axes[1]],
            ),
            Shape::Rectangle { min, max, .. } => (*min, *max),
            Shape::Polygon { vertices, .. } => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for v in vertices {
                    for k in 0..2 {
                        lo[k] = lo[k].min(v[k]);
                        hi[k] = hi[k].max(v[k]);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Exact signed distance where a closed form exists.
    pub(crate) fn analytic_distance(&self, p: [f64; 2]) -> Option<f64> {
        match self {
            Shape::Disk { center, radius } => {
                Some(radius - ((p[0] - center[0]).hypot(p[1] - center[1])))
            }
            Shape::Rectangle { min, max, corner_radius } => {
                let c = [0.5 * (min[0] + max[0]), 0.5 * (min[1] + max[1])];
                let e = [0.5 * (max[0] - min[0]), 0.5 * (max[1] - min[1])];
                let r = *corner_radius;
                let q = [
                    (p[0] - c[0]).abs() - e[0] + r,
                    (p[1] - c[1]).abs() - e[1] + r,
                ];
                let outside = q[0].max(0.0).hypot(q[1].max(0.0));
                let inside = q[0].max(q[1]).min(0.0);
                Some(-(outside + inside - r))
            }
            _ => None,
        }
    }

    /// Exact signed distance is available (disk, rectangle); otherwise it is node-sampled.
    pub fn has_exact_distance(&self) -> bool {
        matches!(self, Shape::Disk { .. } | Shape::Rectangle { .. })
    }
}

fn finite2(p: &[f64; 2]) -> bool {
    p[0].is_finite() && p[1].is_finite()
}

pub(crate) fn signed_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
        * 0.5
}

/// Sampled boundary node before arc-length bookkeeping.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Sample {
    pub position: [f64; 2],
    pub tangent: [f64; 2],
    pub curvature: f64,
    pub s: f64,
    pub ds: f64,
}

#[derive(Debug, Clone, Copy)]
enum Piece {
    Segment { p0: [f64; 2], p1: [f64; 2] },
    Arc { center: [f64; 2], radius: f64, start: f64, sweep: f64 },
}

impl Piece {
    fn length(&self) -> f64 {
        match *self {
            Piece::Segment { p0, p1 } => (p1[0] - p0[0]).hypot(p1[1] - p0[1]),
            Piece::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    fn eval(&self, u: f64) -> ([f64; 2], [f64; 2], f64) {
        match *self {
            Piece::Segment { p0, p1 } => {
                let l = self.length();
                let t = [(p1[0] - p0[0]) / l, (p1[1] - p0[1]) / l];
                ([p0[0] + u * t[0], p0[1] + u * t[1]], t, 0.0)
            }
            Piece::Arc { center, radius, start, sweep } => {
                let sgn = sweep.signum();
                let ang = start + sgn * u / radius;
                let (s, c) = ang.sin_cos();
                (
                    [center[0] + radius * c, center[1] + radius * s],
                    [-sgn * s, sgn * c],
                    sgn / radius,
                )
            }
        }
    }
}

fn rectangle_path(min: [f64; 2], max: [f64; 2], r: f64) -> Vec<Piece> {
    let cx = 0.5 * (min[0] + max[0]);
    let mut path = Vec::with_capacity(9);
    let seg = |a: [f64; 2], b: [f64; 2]| Piece::Segment { p0: a, p1: b };
    let arc = |c: [f64; 2], start: f64| Piece::Arc { center: c, radius: r, start, sweep: FRAC_PI_2 };
    path.push(seg([cx, min[1]], [max[0] - r, min[1]]));
    if r > 0.0 {
        path.push(arc([max[0] - r, min[1] + r], -FRAC_PI_2));
    }
    path.push(seg([max[0], min[1] + r], [max[0], max[1] - r]));
    if r > 0.0 {
        path.push(arc([max[0] - r, max[1] - r], 0.0));
    }
    path.push(seg([max[0] - r, max[1]], [min[0] + r, max[1]]));
    if r > 0.0 {
        path.push(arc([min[0] + r, max[1] - r], FRAC_PI_2));
    }
    path.push(seg([min[0], max[1] - r], [min[0], min[1] + r]));
    if r > 0.0 {
        path.push(arc([min[0] + r, min[1] + r], PI));
    }
    path.push(seg([min[0] + r, min[1]], [cx, min[1]]));
    path
}

fn polygon_path(vertices: &[[f64; 2]], r: f64) -> Result<Vec<Piece>> {
    let mut v = vertices.to_vec();
    if signed_area(&v) < 0.0 {
        v.reverse();
    }
    let n = v.len();
    let unit = |a: [f64; 2], b: [f64; 2]| {
        let l = (b[0] - a[0]).hypot(b[1] - a[1]);
        [(b[0] - a[0]) / l, (b[1] - a[1]) / l]
    };
    // Fillet at every vertex: (entry tangent point, exit tangent point, arc).
    let mut fillets = Vec::with_capacity(n);
    for i in 0..n {
        let prev = v[(i + n - 1) % n];
        let next = v[(i + 1) % n];
        let u1 = unit(prev, v[i]);
        let u2 = unit(v[i], next);
        let turn = (u1[0] * u2[1] - u1[1] * u2[0]).atan2(u1[0] * u2[0] + u1[1] * u2[1]);
        if turn.abs() < 1e-12 {
            fillets.push((v[i], v[i], None));
            continue;
        }
        if turn.abs() > PI - 1e-9 {
            return Err(LakeError::UnsupportedShape("polygon folds back on itself".into()));
        }
        let t = r * (0.5 * turn.abs()).tan();
        let a = [v[i][0] - u1[0] * t, v[i][1] - u1[1] * t];
        let b = [v[i][0] + u2[0] * t, v[i][1] + u2[1] * t];
        let sg = turn.signum();
        let center = [a[0] - sg * u1[1] * r, a[1] + sg * u1[0] * r];
        let start = (a[1] - center[1]).atan2(a[0] - center[0]);
        fillets.push((a, b, Some(Piece::Arc { center, radius: r, start, sweep: turn })));
    }
    let edge_run = |i: usize| {
        let from = fillets[i].1;
        let to = fillets[(i + 1) % n].0;
        let edge = unit(v[i], v[(i + 1) % n]);
        (to[0] - from[0]) * edge[0] + (to[1] - from[1]) * edge[1]
    };
    if (0..n).any(|i| edge_run(i) < -1e-12) {
        return Err(LakeError::UnsupportedShape(
            "polygon corner radius too large for its edges".into(),
        ));
    }
    // Start at the middle of the first straight run, walk every edge and fillet once.
    let mid = {
        let (a, b) = (fillets[0].1, fillets[1].0);
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    };
    let mut path = Vec::with_capacity(2 * n + 1);
    path.push(Piece::Segment { p0: mid, p1: fillets[1].0 });
    for k in 1..=n {
        let i = k % n;
        if let Some(arc) = fillets[i].2 {
            path.push(arc);
        }
        let exit = fillets[i].1;
        let entry = if i == 0 { mid } else { fillets[(i + 1) % n].0 };
        path.push(Piece::Segment { p0: exit, p1: entry });
    }
    path.retain(|p| p.length() > 1e-15);
    Ok(path)
}

fn sample_path(path: &[Piece], n: usize, offset: f64) -> Vec<Sample> {
    let total: f64 = path.iter().map(Piece::length).sum();
    let h = total / n as f64;
    let mut out = Vec::with_capacity(n);
    let mut piece = 0;
    let mut base = 0.0;
    for k in 0..n {
        let s = (k as f64 + offset) * h;
        while piece + 1 < path.len() && s >= base + path[piece].length() {
            base += path[piece].length();
            piece += 1;
        }
        let (position, tangent, curvature) = path[piece].eval(s - base);
        out.push(Sample { position, tangent, curvature, s, ds: h });
    }
    out
}

/// Signed turning angle between consecutive chords, divided by the mean chord length.
fn finite_difference_curvature(samples: &mut [Sample]) {
    let n = samples.len();
    let pos: Vec<[f64; 2]> = samples.iter().map(|s| s.position).collect();
    for k in 0..n {
        let a = pos[(k + n - 1) % n];
        let b = pos[k];
        let c = pos[(k + 1) % n];
        let u = [b[0] - a[0], b[1] - a[1]];
        let w = [c[0] - b[0], c[1] - b[1]];
        let turn = (u[0] * w[1] - u[1] * w[0]).atan2(u[0] * w[0] + u[1] * w[1]);
        let mean = 0.5 * (u[0].hypot(u[1]) + w[0].hypot(w[1]));
        samples[k].curvature = turn / mean;
    }
}

/// Samples the boundary with spacing close to `target_ds`, starting where the shape's
/// parametrization starts (angle zero for disks and ellipses).
pub(crate) fn sample_boundary(shape: &Shape, target_ds: f64) -> Result<(Vec<Sample>, Vec<(f64, f64)>)> {
    let count = |len: f64| ((len / target_ds).ceil() as usize).max(64);
    match shape {
        Shape::Disk { center, radius } => {
            let path = [Piece::Arc { center: *center, radius: *radius, start: 0.0, sweep: TAU }];
            let n = count(path[0].length());
            Ok((sample_path(&path, n, 0.0), Vec::new()))
        }
        Shape::Rectangle { min, max, corner_radius } => {
            let path = rectangle_path(*min, *max, *corner_radius);
            let path: Vec<Piece> = path.into_iter().filter(|p| p.length() > 0.0).collect();
            let total: f64 = path.iter().map(Piece::length).sum();
            let n = count(total);
            let samples = sample_path(&path, n, 0.5);
            let mut corners = Vec::new();
            if *corner_radius == 0.0 {
                let w = max[0] - min[0];
                let hgt = max[1] - min[1];
                let mut s = 0.5 * w;
                for side in [hgt, w, hgt, w] {
                    corners.push((s, FRAC_PI_2));
                    s += side;
                }
            }
            Ok((samples, corners))
        }
        Shape::Polygon { vertices, corner_radius } => {
            let path = polygon_path(vertices, *corner_radius)?;
            let total: f64 = path.iter().map(Piece::length).sum();
            let mut samples = sample_path(&path, count(total), 0.5);
            finite_difference_curvature(&mut samples);
            Ok((samples, Vec::new()))
        }
        Shape::Ellipse { center, semi_axes } => {
            let [a, b] = *semi_axes;
            let speed = |t: f64| (a * t.sin()).hypot(b * t.cos());
            // Perimeter by the periodic trapezoid rule on a fine parameter grid.
            let fine = 4096;
            let dt_f = TAU / fine as f64;
            let total: f64 = (0..fine).map(|i| speed(i as f64 * dt_f)).sum::<f64>() * dt_f;
            let n = count(total);
            let dt = TAU / n as f64;
            let mut s = 0.0;
            let mut out = Vec::with_capacity(n);
            for k in 0..n {
                let t = k as f64 * dt;
                let (st, ct) = t.sin_cos();
                let sp = speed(t);
                let curvature = a * b / (a * a * st * st + b * b * ct * ct).powf(1.5);
                out.push(Sample {
                    position: [center[0] + a * ct, center[1] + b * st],
                    tangent: [-a * st / sp, b * ct / sp],
                    curvature,
                    s,
                    ds: sp * dt,
                });
                // Simpson over [t, t + dt] for the arc-length coordinate.
                s += dt / 6.0 * (sp + 4.0 * speed(t + 0.5 * dt) + speed(t + dt));
            }
            Ok((out, Vec::new()))
        }
    }
}
