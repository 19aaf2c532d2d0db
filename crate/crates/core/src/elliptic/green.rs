//! Dense discrete Green kernel of the weighted Dirichlet operator.

use nalgebra::DMatrix;

use super::Operators;
use crate::domain::Domain;
use crate::error::{LakeError, Result};

/// Default limit on the number of active cells for dense kernels.
pub const DEFAULT_KERNEL_CAP: usize = 32 * 32;

/// Inverse of the weighted Dirichlet matrix; column j is the response to a unit
/// right-hand side at cell j, so `K[i][j] / |cell|` approximates K₁(x_i, x_j).
#[derive(Debug, Clone)]
pub struct GreenKernel {
    pub matrix: DMatrix<f64>,
    pub cell_volume: f64,
}

impl GreenKernel {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// h = K·rhs.
    pub fn apply(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.matrix[(i, j)] * rhs[j]).sum())
            .collect()
    }

    /// Pointwise kernel value K₁(x_i, x_j).
    pub fn kernel(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)] / self.cell_volume
    }

    /// Largest |K[i][j] − K[j][i]|.
    pub fn asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..i {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)]).abs());
            }
        }
        worst
    }
}

/// Builds the kernel by a dense Cholesky factorization; refuses grids above `cap` cells.
pub fn greens_kernel(domain: &Domain, b: &[f64], b_shore: &[f64], cap: usize) -> Result<GreenKernel> {
    let n = domain.len();
    if n > cap {
        return Err(LakeError::GridTooLarge { cells: n, cap });
    }
    let ops = Operators::new(domain, b, b_shore);
    let dense = ops.dirichlet.to_dense();
    let m = DMatrix::from_fn(n, n, |i, j| dense[i][j]);
    let chol = m
        .cholesky()
        .ok_or_else(|| LakeError::InvalidArgument("Dirichlet operator is not positive definite".into()))?;
    Ok(GreenKernel { matrix: chol.inverse(), cell_volume: domain.cell_volume() })
}
