//! Weighted Poisson problems for the stream potential h and the flux potential H.
//!
//! Both operators use the 5-point flux form. Face coefficients come from the arithmetic
//! mean of the depth, b_f, entering as 1/b_f for h and as b_f for H. Where a cell side
//! crosses the shoreline the Dirichlet problem uses a symmetric ghost-fluid row (only
//! the diagonal changes). The Neumann problem is solved on cut cells, and the link
//! fluxes are recovered afterwards so that div_h(b v) = A holds cell by cell.

mod cutcell;
mod estimates;
mod green;
mod trace;
mod velocity;

pub use estimates::{velocity_w1_proxy, w2_proxy, EstimateFit};
pub use green::{greens_kernel, GreenKernel, DEFAULT_KERNEL_CAP};
pub use trace::{ShoreTrace, ShoreVelocity};
pub use velocity::{div_h, reconstruct_velocity, rot_h, VelocityField};

use crate::domain::{Domain, Side};

use crate::error::{LakeError, Result};
use crate::linalg::{pcg, CgOptions, CgStats, Csr};
use cutcell::CutCells;

/// Fields of one time level.
#[derive(Debug, Clone)]
pub struct StateFields {
    pub t: f64,
    /// Modified vorticity ω.
    pub omega: Vec<f64>,
    /// Stream potential h, zero on the shore.
    pub stream: Vec<f64>,
    /// Flux potential H, mean zero.
    pub flux: Vec<f64>,
    pub velocity: VelocityField,
}

/// Linear-solver settings for the elliptic problems.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-9, max_iter: 50_000 }
    }
}

/// Outward shoreline fluxes b v·n |f| per link, and extra fluxes from lo to hi per
/// interior face (zero away from the shore).
#[derive(Debug, Clone, PartialEq)]
pub struct ShoreFlux {
    pub links: Vec<f64>,
    pub faces: Vec<f64>,
}

impl ShoreFlux {
    pub fn zeros(domain: &Domain) -> Self {
        ShoreFlux { links: vec![0.0; domain.links.len()], faces: vec![0.0; domain.faces.len()] }
    }

    pub fn is_zero(&self) -> bool {
        self.links.iter().chain(&self.faces).all(|f| *f == 0.0)
    }
}

/// Discrete operators that depend only on the domain and the depth.
#[derive(Debug, Clone)]
pub struct Operators {
    /// Depth at interior faces, (b_lo + b_hi)/2.
    pub face_b: Vec<f64>,
    /// Depth at shoreline links, mean of the cell value and the shore value at the crossing.
    pub link_b: Vec<f64>,
    /// −div((1/b)∇·) with h = 0 on the shore.
    pub dirichlet: Csr,
    /// −div(b∇·) on the cut cells with no boundary terms (positive semi-definite).
    pub neumann: Csr,
    cut: CutCells,
    /// −Δ with Dirichlet data on the shore, used for diffusion.
    pub laplace: Csr,
}

impl Operators {
    pub fn new(domain: &Domain, b: &[f64], b_shore: &[f64]) -> Self {
        let n = domain.len();
        let grid = &domain.grid;
        let face_b: Vec<f64> = domain.faces.iter().map(|f| 0.5 * (b[f.lo] + b[f.hi])).collect();
        let link_b: Vec<f64> = domain
            .links
            .iter()
            .map(|l| 0.5 * (b[l.cell] + domain.boundary.interpolate(b_shore, l.s)))
            .collect();
        let mut dir_e = Vec::with_capacity(5 * n);
        let mut lap_e = Vec::with_capacity(5 * n);
        for (k, f) in domain.faces.iter().enumerate() {
            let w = if f.x_normal { 1.0 / (grid.dx * grid.dx) } else { 1.0 / (grid.dy * grid.dy) };
            for (list, c) in [(&mut dir_e, w / face_b[k]), (&mut lap_e, w)] {
                list.push((f.lo, f.lo, c));
                list.push((f.hi, f.hi, c));
                list.push((f.lo, f.hi, -c));
                list.push((f.hi, f.lo, -c));
            }
        }
        for (k, l) in domain.links.iter().enumerate() {
            let h = domain.side_spacing(l.dir);
            let w = 1.0 / (h * h * l.theta);
            dir_e.push((l.cell, l.cell, w / link_b[k]));
            lap_e.push((l.cell, l.cell, w));
        }
        let (cut, neumann) = CutCells::new(domain, b, b_shore);
        Operators {
            face_b,
            link_b,
            dirichlet: Csr::from_triplets(n, dir_e),
            neumann,
            cut,
            laplace: Csr::from_triplets(n, lap_e),
        }
    }

    /// Solves −div((1/b)∇h) = rhs with h = 0 on the shore; `h` is the initial guess.
    pub fn solve_dirichlet(&self, rhs: &[f64], h: &mut [f64], opts: SolveOptions) -> Result<CgStats> {
        let cg = CgOptions { tol: opts.tol, max_iter: opts.max_iter, mean_zero: false };
        pcg(&self.dirichlet, rhs, h, &cg)
    }

    /// Solves div(b∇H) = A with ∂H/∂n = a on the shore on the cut cells; `big_h`
    /// holds the initial guess and receives H on the active cells with mean zero.
    pub fn solve_neumann(
        &self,
        domain: &Domain,
        a: &[f64],
        b_shore: &[f64],
        source: &[f64],
        big_h: &mut [f64],
        opts: SolveOptions,
    ) -> Result<CgStats> {
        let (rhs, _) = self.cut.rhs(domain, a, b_shore, source);
        let mut x = self.cut.extend(big_h);
        let cg = CgOptions { tol: opts.tol, max_iter: opts.max_iter, mean_zero: true };
        let stats = pcg(&self.neumann, &rhs, &mut x, &cg)?;
        let n = domain.len();
        let mean = x[..n].iter().sum::<f64>() / n as f64;
        big_h.iter_mut().zip(&x).for_each(|(h, v)| *h = v - mean);
        Ok(stats)
    }

    /// Outward fluxes through the shoreline links that close the balance
    /// Σ outward b v·n |f| = A |cell| on every active cell, given H.
    ///
    /// Each link starts from b a (n·n_f)|f| and the cell residual is spread over the
    /// links of the cell in proportion to |f|(|n·n_f| + 10⁻³). A cell without links
    /// passes its residual through a face to a neighbor that has links; those face
    /// corrections are returned as well.
    pub fn shore_fluxes(&self, domain: &Domain, a: &[f64], b_shore: &[f64], source: &[f64], big_h: &[f64]) -> ShoreFlux {
        let (_, shift) = self.cut.rhs(domain, a, b_shore, source);
        let vol = domain.cell_volume();
        let mut residual: Vec<f64> = source.iter().map(|s| (s - shift) * vol).collect();
        for (k, f) in domain.faces.iter().enumerate() {
            let spacing = if f.x_normal { domain.grid.dx } else { domain.grid.dy };
            let length = if f.x_normal { domain.grid.dy } else { domain.grid.dx };
            let out_lo = self.face_b[k] * (big_h[f.hi] - big_h[f.lo]) / spacing * length;
            residual[f.lo] -= out_lo;
            residual[f.hi] += out_lo;
        }
        let mut has_link = vec![false; domain.len()];
        for l in &domain.links {
            has_link[l.cell] = true;
        }
        let mut faces = vec![0.0; domain.faces.len()];
        for c in 0..domain.len() {
            if has_link[c] || residual[c] == 0.0 {
                continue;
            }
            let target = domain.sides[c].iter().find_map(|side| match *side {
                Side::Face(k) => {
                    let f = &domain.faces[k];
                    let other = if f.lo == c { f.hi } else { f.lo };
                    has_link[other].then_some((k, other))
                }
                Side::Link(_) => None,
            });
            // Deep cells only carry the linear-solver residual, which stays in place.
            if let Some((k, other)) = target {
                let r = residual[c];
                faces[k] += if domain.faces[k].lo == c { r } else { -r };
                residual[other] += r;
                residual[c] = 0.0;
            }
        }
        let estimate: Vec<f64> = domain
            .links
            .iter()
            .map(|l| {
                let a_s = domain.boundary.interpolate(a, l.s);
                let b_s = domain.boundary.interpolate(b_shore, l.s);
                b_s * a_s * l.normal_alignment() * domain.side_length(l.dir)
            })
            .collect();
        let weight: Vec<f64> =
            domain.links.iter().map(|l| domain.side_length(l.dir) * (l.normal_alignment().abs() + 1e-3)).collect();
        let mut excess = vec![0.0; domain.len()];
        let mut total_weight = vec![0.0; domain.len()];
        for (k, l) in domain.links.iter().enumerate() {
            excess[l.cell] += estimate[k];
            total_weight[l.cell] += weight[k];
        }
        let links = domain
            .links
            .iter()
            .enumerate()
            .map(|(k, l)| estimate[k] + (residual[l.cell] - excess[l.cell]) * weight[k] / total_weight[l.cell])
            .collect();
        ShoreFlux { links, faces }
    }

    /// Applies −div((1/b)∇·) to a cell field.
    pub fn apply_dirichlet(&self, h: &[f64]) -> Vec<f64> {
        self.dirichlet.apply(h)
    }
}

/// One-shot solve of −div((1/b)∇h) = rhs, h = 0 on the shore.
pub fn solve_dirichlet_weighted(
    domain: &Domain,
    b: &[f64],
    b_shore: &[f64],
    rhs: &[f64],
    opts: SolveOptions,
) -> Result<Vec<f64>> {
    check_positive(b)?;
    check_positive(b_shore)?;
    let ops = Operators::new(domain, b, b_shore);
    let mut h = vec![0.0; domain.len()];
    ops.solve_dirichlet(rhs, &mut h, opts)?;
    Ok(h)
}

/// One-shot solve of div(b∇H) = A, ∂H/∂n = a; rejects data violating ∮ b a = ∫ A
/// beyond `tol_comp`·(‖A‖₁ + ‖b a‖₁).
pub fn solve_neumann_weighted(
    domain: &Domain,
    b: &[f64],
    b_shore: &[f64],
    source: &[f64],
    a: &[f64],
    tol_comp: f64,
    opts: SolveOptions,
) -> Result<Vec<f64>> {
    check_positive(b)?;
    check_positive(b_shore)?;
    let ba: Vec<f64> = a.iter().zip(b_shore).map(|(a, b)| a * b).collect();
    let residual = (domain.boundary.integrate(&ba) - domain.integrate(source)).abs();
    let abs_ba: Vec<f64> = ba.iter().map(|v| v.abs()).collect();
    let abs_src: Vec<f64> = source.iter().map(|v| v.abs()).collect();
    let tolerance = tol_comp * (domain.boundary.integrate(&abs_ba) + domain.integrate(&abs_src));
    if residual > tolerance {
        return Err(LakeError::Incompatible { residual, tolerance });
    }
    let ops = Operators::new(domain, b, b_shore);
    let mut big_h = vec![0.0; domain.len()];
    ops.solve_neumann(domain, a, b_shore, source, &mut big_h, opts)?;
    Ok(big_h)
}

fn check_positive(b: &[f64]) -> Result<()> {
    match b.iter().find(|v| !(**v > 0.0)) {
        Some(v) => Err(LakeError::InvalidArgument(format!("depth must be positive, found {v}"))),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, Shape};
    use crate::linalg::LinearOperator;

    fn max_err(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn zero_rhs_gives_zero_potentials() {
        let d = build_domain(&Shape::unit_disk(), 32).unwrap();
        let b = vec![1.0; d.len()];
        let bs = vec![1.0; d.boundary.len()];
        let h = solve_dirichlet_weighted(&d, &b, &bs, &vec![0.0; d.len()], SolveOptions::default()).unwrap();
        assert!(h.iter().all(|v| *v == 0.0));
        let z = vec![0.0; d.boundary.len()];
        let hh = solve_neumann_weighted(&d, &b, &bs, &vec![0.0; d.len()], &z, 1e-8, SolveOptions::default())
            .unwrap();
        assert!(hh.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn disk_poisson_is_second_order() {
        let mut errs = Vec::new();
        for n in [32, 64] {
            let d = build_domain(&Shape::unit_disk(), n).unwrap();
            let b = vec![1.0; d.len()];
            let bs = vec![1.0; d.boundary.len()];
            let opts = SolveOptions { tol: 1e-12, ..Default::default() };
            let h = solve_dirichlet_weighted(&d, &b, &bs, &vec![1.0; d.len()], opts).unwrap();
            let exact = d.sample(|x, y| (1.0 - x * x - y * y) / 4.0);
            errs.push(max_err(&h, &exact));
        }
        let ratio = errs[0] / errs[1];
        assert!((3.2..=4.8).contains(&ratio), "errors {errs:?}");
    }

    #[test]
    fn operators_are_symmetric() {
        let d = build_domain(&Shape::Ellipse { center: [0.0, 0.0], semi_axes: [1.2, 0.8] }, 20).unwrap();
        let b = d.sample(|x, y| 1.0 + 0.3 * x * y);
        let bs = d.sample_boundary(|x, y, _| 1.0 + 0.3 * x * y);
        let ops = Operators::new(&d, &b, &bs);
        for m in [&ops.dirichlet, &ops.neumann, &ops.laplace] {
            let dense = m.to_dense();
            for i in 0..dense.len() {
                for j in 0..i {
                    assert_eq!(dense[i][j], dense[j][i]);
                }
            }
        }
        let ones = vec![1.0; ops.neumann.dim()];
        let mut y = vec![0.0; ops.neumann.dim()];
        ops.neumann.apply_into(&ones, &mut y);
        assert!(y.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn incompatible_neumann_data_are_rejected() {
        let d = build_domain(&Shape::unit_disk(), 32).unwrap();
        let b = vec![1.0; d.len()];
        let bs = vec![1.0; d.boundary.len()];
        let a = vec![1.0; d.boundary.len()];
        match solve_neumann_weighted(&d, &b, &bs, &vec![0.0; d.len()], &a, 1e-8, SolveOptions::default()) {
            Err(LakeError::Incompatible { residual, .. }) => {
                assert!((residual - std::f64::consts::TAU).abs() < 1e-6)
            }
            other => panic!("expected incompatibility, got {other:?}"),
        }
    }

    #[test]
    fn linear_flux_potential_on_the_square_is_exact() {
        let d = build_domain(&Shape::unit_square(), 32).unwrap();
        let b = vec![1.0; d.len()];
        let bs = vec![1.0; d.boundary.len()];
        let a: Vec<f64> = d.boundary.nodes.iter().map(|n| n.normal[0]).collect();
        let opts = SolveOptions { tol: 1e-12, ..Default::default() };
        let hh = solve_neumann_weighted(&d, &b, &bs, &vec![0.0; d.len()], &a, 1e-8, opts).unwrap();
        let exact = d.sample(|x, _| x - 0.5);
        assert!(max_err(&hh, &exact) < 1e-9);
    }
}
