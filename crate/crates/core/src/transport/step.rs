//! One time step of ∂_t(bω) + div(bωv) = −κω + S' + νΔω.
//!
//! Advection is explicit first-order upwind in flux form; friction and diffusion are
//! implicit. Inflow links carry the shoreline vorticity, outflow links the cell value.
//! For ν > 0 the shoreline vorticity is imposed as Dirichlet data on every link.

use crate::domain::Domain;
use crate::elliptic::{Operators, VelocityField};
use crate::error::{LakeError, Result};
use crate::linalg::{pcg, CgOptions, Shifted};

/// Inputs of a step, all evaluated at the new time level.
#[derive(Debug, Clone, Copy)]
pub struct StepData<'a> {
    pub velocity: &'a VelocityField,
    /// Friction κ at cells.
    pub kappa: &'a [f64],
    /// Explicit source S' = −(v·∇⊥)(q/b) + rot(G/b).
    pub source: &'a [f64],
    /// ω_Γ at the crossing point of every link.
    pub shore_vorticity: &'a [f64],
    pub nu: f64,
    pub dt: f64,
    /// Largest admissible advective Courant number.
    pub cfl_max: f64,
    /// Relative tolerance of the implicit diffusion solve.
    pub tol: f64,
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub omega: Vec<f64>,
    pub cfl: f64,
    /// Net advective flux out of each cell, Σ F ω_upwind.
    pub advective_flux: Vec<f64>,
}

/// Outward side fluxes of every cell: face fluxes lo→hi and outward link fluxes.
pub(crate) fn face_and_link_fluxes(domain: &Domain, ops: &Operators, velocity: &VelocityField) -> (Vec<f64>, Vec<f64>) {
    let faces = domain
        .faces
        .iter()
        .enumerate()
        .map(|(k, f)| {
            let u = if f.x_normal { velocity.faces[k][0] } else { velocity.faces[k][1] };
            let len = if f.x_normal { domain.grid.dy } else { domain.grid.dx };
            ops.face_b[k] * u * len
        })
        .collect();
    let links = domain
        .links
        .iter()
        .enumerate()
        .map(|(k, l)| {
            let u = l.dir.unit();
            let v = velocity.links[k];
            ops.link_b[k] * (v[0] * u[0] + v[1] * u[1]) * domain.side_length(l.dir)
        })
        .collect();
    (faces, links)
}

/// Δt · max_i Σ_out F / (b_i |cell|).
pub fn cfl_number(domain: &Domain, ops: &Operators, b: &[f64], velocity: &VelocityField, dt: f64) -> f64 {
    let (faces, links) = face_and_link_fluxes(domain, ops, velocity);
    let mut out = vec![0.0; domain.len()];
    for (f, &flux) in domain.faces.iter().zip(&faces) {
        if flux > 0.0 {
            out[f.lo] += flux;
        } else {
            out[f.hi] -= flux;
        }
    }
    for (l, &flux) in domain.links.iter().zip(&links) {
        if flux > 0.0 {
            out[l.cell] += flux;
        }
    }
    let vol = domain.cell_volume();
    dt * out.iter().zip(b).map(|(o, b)| o / (b * vol)).fold(0.0, f64::max)
}

/// Advances ω by one step of length `data.dt`.
pub fn step_vorticity(
    domain: &Domain,
    ops: &Operators,
    b: &[f64],
    omega: &[f64],
    data: &StepData<'_>,
) -> Result<StepOutcome> {
    let n = domain.len();
    let dt = data.dt;
    let cfl = cfl_number(domain, ops, b, data.velocity, dt);
    if cfl > data.cfl_max {
        return Err(LakeError::CflViolation { cfl, limit: data.cfl_max });
    }
    let (faces, links) = face_and_link_fluxes(domain, ops, data.velocity);
    let mut net = vec![0.0; n];
    for (f, &flux) in domain.faces.iter().zip(&faces) {
        let up = if flux > 0.0 { omega[f.lo] } else { omega[f.hi] };
        net[f.lo] += flux * up;
        net[f.hi] -= flux * up;
    }
    for (k, (l, &flux)) in domain.links.iter().zip(&links).enumerate() {
        let up = if flux >= 0.0 { omega[l.cell] } else { data.shore_vorticity[k] };
        net[l.cell] += flux * up;
    }
    let vol = domain.cell_volume();
    let mut rhs: Vec<f64> = (0..n)
        .map(|i| b[i] * omega[i] - dt * net[i] / vol + dt * data.source[i])
        .collect();
    let diag: Vec<f64> = (0..n).map(|i| b[i] + dt * data.kappa[i]).collect();

    let new = if data.nu > 0.0 {
        for (k, l) in domain.links.iter().enumerate() {
            let h = domain.side_spacing(l.dir);
            rhs[l.cell] += dt * data.nu * data.shore_vorticity[k] / (l.theta * h * h);
        }
        let op = Shifted { base: &ops.laplace, scale: dt * data.nu, shift: &diag };
        let mut x = omega.to_vec();
        let opts = CgOptions { tol: data.tol, max_iter: 50_000, mean_zero: false };
        pcg(&op, &rhs, &mut x, &opts)?;
        x
    } else {
        rhs.iter().zip(&diag).map(|(r, d)| r / d).collect()
    };
    Ok(StepOutcome { omega: new, cfl, advective_flux: net })
}
