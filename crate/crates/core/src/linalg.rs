//! Sparse matrices and preconditioned conjugate gradients.
//!
//! All reductions run sequentially in index order so that results are bit-reproducible.

use crate::error::{LakeError, Result};

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct Csr {
    n: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<f64>,
}

impl Csr {
    /// Assembles from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(n: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0; n + 1];
        let mut col: Vec<usize> = Vec::with_capacity(entries.len());
        let mut val: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *val.last_mut().expect("entry exists") += v;
                continue;
            }
            col.push(c);
            val.push(v);
            row_ptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        Csr { n, row_ptr, col, val }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col[span.clone()].iter().cloned().zip(self.val[span].iter().cloned())
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|r| self.row(r).find(|&(c, _)| c == r).map_or(0.0, |e| e.1))
            .collect()
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.val[k] * x[self.col[k]];
            }
            *out = acc;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec(x, &mut y);
        y
    }

    /// Dense copy, for small systems.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.n]; self.n];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, v) in self.row(r) {
                row[c] += v;
            }
        }
        m
    }
}

/// Symmetric positive (semi-)definite operator.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply_into(&self, x: &[f64], y: &mut [f64]);
    fn diagonal(&self) -> Vec<f64>;
}

impl LinearOperator for Csr {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec(x, y)
    }

    fn diagonal(&self) -> Vec<f64> {
        Csr::diagonal(self)
    }
}

/// diag(d) + scale·A.
pub struct Shifted<'a> {
    pub base: &'a Csr,
    pub scale: f64,
    pub shift: &'a [f64],
}

impl LinearOperator for Shifted<'_> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.base.mul_vec(x, y);
        for i in 0..y.len() {
            y[i] = self.shift[i] * x[i] + self.scale * y[i];
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        self.base
            .diagonal()
            .iter()
            .zip(self.shift)
            .map(|(a, d)| d + self.scale * a)
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CgOptions {
    /// Relative residual target ‖b − Ax‖₂ ≤ tol·‖b‖₂.
    pub tol: f64,
    pub max_iter: usize,
    /// Treat constants as the null space: project the residual and return a mean-zero solution.
    pub mean_zero: bool,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions { tol: 1e-9, max_iter: 20_000, mean_zero: false }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn remove_mean(v: &mut [f64]) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= m);
}

/// Jacobi-preconditioned conjugate gradients; `x` holds the initial guess on entry.
pub fn pcg(op: &impl LinearOperator, rhs: &[f64], x: &mut [f64], opts: &CgOptions) -> Result<CgStats> {
    let n = op.dim();
    assert_eq!(rhs.len(), n);
    assert_eq!(x.len(), n);
    let mut b = rhs.to_vec();
    if opts.mean_zero {
        remove_mean(&mut b);
    }
    let bnorm = dot(&b, &b).sqrt();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgStats::default());
    }
    let inv_diag: Vec<f64> = op
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    if opts.mean_zero {
        remove_mean(x);
    }
    let mut ax = vec![0.0; n];
    op.apply_into(x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    if opts.mean_zero {
        remove_mean(&mut r);
    }
    let target = opts.tol * bnorm;
    let mut rnorm = dot(&r, &r).sqrt();
    if rnorm <= target {
        return Ok(CgStats { iterations: 0, relative_residual: rnorm / bnorm });
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=opts.max_iter {
        op.apply_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if opts.mean_zero {
            remove_mean(&mut r);
        }
        rnorm = dot(&r, &r).sqrt();
        if rnorm <= target {
            if opts.mean_zero {
                remove_mean(x);
            }
            // Confirm against the true residual to guard against drift.
            op.apply_into(x, &mut ax);
            let mut tr: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
            if opts.mean_zero {
                remove_mean(&mut tr);
            }
            let true_norm = dot(&tr, &tr).sqrt();
            if true_norm <= 10.0 * target {
                return Ok(CgStats { iterations: it, relative_residual: true_norm / bnorm });
            }
            r = tr;
            rnorm = true_norm;
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(LakeError::SolverDiverged { iterations: opts.max_iter, residual: rnorm / bnorm })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize, dirichlet: bool) -> Csr {
        let mut e = Vec::new();
        for i in 0..n {
            let mut d = 0.0;
            if i > 0 {
                e.push((i, i - 1, -1.0));
                d += 1.0;
            } else if dirichlet {
                d += 1.0;
            }
            if i + 1 < n {
                e.push((i, i + 1, -1.0));
                d += 1.0;
            } else if dirichlet {
                d += 1.0;
            }
            e.push((i, i, d));
        }
        Csr::from_triplets(n, e)
    }

    #[test]
    fn solves_dirichlet_chain() {
        let a = laplace_1d(50, true);
        let exact: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.apply(&exact);
        let mut x = vec![0.0; 50];
        let stats = pcg(&a, &b, &mut x, &CgOptions { tol: 1e-13, ..Default::default() }).unwrap();
        assert!(stats.relative_residual <= 1e-12);
        for (u, v) in x.iter().zip(&exact) {
            assert!((u - v).abs() < 1e-9);
        }
    }

    #[test]
    fn singular_chain_returns_mean_zero() {
        let a = laplace_1d(40, false);
        let exact: Vec<f64> = (0..40).map(|i| (i as f64 * 0.2).cos()).collect();
        let b = a.apply(&exact);
        let mut x = vec![1.0; 40];
        let opts = CgOptions { tol: 1e-12, mean_zero: true, ..Default::default() };
        pcg(&a, &b, &mut x, &opts).unwrap();
        let mean = exact.iter().sum::<f64>() / 40.0;
        assert!(x.iter().sum::<f64>().abs() < 1e-10);
        for (u, v) in x.iter().zip(&exact) {
            assert!((u - (v - mean)).abs() < 1e-8);
        }
    }

    #[test]
    fn duplicates_are_summed() {
        let m = Csr::from_triplets(2, vec![(0, 0, 1.0), (0, 0, 2.0), (1, 0, -1.0), (1, 1, 4.0)]);
        assert_eq!(m.diagonal(), vec![3.0, 4.0]);
        assert_eq!(m.apply(&[1.0, 1.0]), vec![3.0, 3.0]);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = laplace_1d(10, true);
        let mut x = vec![5.0; 10];
        let s = pcg(&a, &[0.0; 10], &mut x, &CgOptions::default()).unwrap();
        assert_eq!(s.iterations, 0);
        assert!(x.iter().all(|v| *v == 0.0));
    }
}
