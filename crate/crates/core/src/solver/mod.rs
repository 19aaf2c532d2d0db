//! Time loop of the regularized problem: each step couples the elliptic solves for
//! the lagged, clipped vorticity with one transport step through a Picard iteration.

mod gronwall;
mod study;

pub use gronwall::{discrete_gronwall_bound, gronwall_precondition, lagged_integral_solution};
pub use study::{theta_study, thread_pool, viscosity_study, StudyKind, StudyReport, StudyRow};

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::elliptic::{
    reconstruct_velocity, Operators, ShoreFlux, ShoreTrace, SolveOptions, StateFields, VelocityField,
};
use crate::error::{LakeError, Result};
use crate::scenario::{ScenarioData, SourceVariant};
use crate::transport::{
    boundary_vorticity, cfl_number, step_vorticity, BoundaryVorticityData, SourceParts, StepData,
    VorticityHistory,
};

/// Time-step policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeStep {
    Fixed(f64),
    /// Adapted every step to half the admissible Courant number.
    Cfl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Artificial viscosity ν ≥ 0.
    pub nu: f64,
    /// Lag θ of the time average.
    pub theta: f64,
    /// Cutoff level R; `None` derives it from a pilot run.
    pub r: Option<f64>,
    /// Final time T.
    pub t_end: f64,
    pub dt: TimeStep,
    /// Largest admissible advective Courant number.
    pub cfl: f64,
    /// Upper bound on adaptive steps; defaults to θ/4.
    pub dt_max: Option<f64>,
    pub tol_lin: f64,
    pub tol_fp: f64,
    pub max_picard: usize,
    pub relaxation: f64,
    /// Compatibility tolerance relative to ‖A‖₁ + ‖b a‖₁.
    pub tol_comp: f64,
    pub source_variant: SourceVariant,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            nu: 0.0,
            theta: 0.05,
            r: None,
            t_end: 1.0,
            dt: TimeStep::Cfl,
            cfl: 0.9,
            dt_max: None,
            tol_lin: 1e-9,
            tol_fp: 1e-8,
            max_picard: 50,
            relaxation: 1.0,
            tol_comp: 1e-8,
            source_variant: SourceVariant::Kappa,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(LakeError::InvalidArgument(m.to_string()));
        if !(self.nu >= 0.0) {
            return bad("nu must be non-negative");
        }
        if !(self.theta > 0.0) {
            return bad("theta must be positive");
        }
        if let Some(r) = self.r {
            if !(r > 0.0) {
                return bad("cutoff R must be positive");
            }
        }
        if !(self.t_end >= 0.0) {
            return bad("final time must be non-negative");
        }
        if let TimeStep::Fixed(dt) = self.dt {
            if !(dt > 0.0) {
                return bad("time step must be positive");
            }
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad("cfl must lie in (0, 1]");
        }
        if !(self.tol_fp > 0.0) || !(self.tol_lin > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.max_picard == 0 {
            return bad("max_picard must be at least 1");
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return bad("relaxation must lie in (0, 1]");
        }
        Ok(())
    }

    fn solve_options(&self) -> SolveOptions {
        SolveOptions { tol: self.tol_lin, ..Default::default() }
    }
}

/// Domain, data and the operators built from them.
pub struct Problem<'a> {
    pub domain: &'a Domain,
    pub scenario: &'a ScenarioData,
    pub ops: Operators,
    pub trace: ShoreTrace,
}

/// Flux potential H and the outward link fluxes at one time.
#[derive(Debug, Clone)]
pub struct FluxState {
    pub potential: Vec<f64>,
    pub shore_flux: ShoreFlux,
}

impl<'a> Problem<'a> {
    pub fn new(domain: &'a Domain, scenario: &'a ScenarioData) -> Result<Self> {
        scenario.validate(domain)?;
        Ok(Problem {
            domain,
            scenario,
            ops: Operators::new(domain, &scenario.b, &scenario.b_shore),
            trace: ShoreTrace::new(domain),
        })
    }

    /// Checks ∮ b a = ∫ A at time t.
    pub fn check_compatibility(&self, t: f64, tol_comp: f64) -> Result<()> {
        let residual = self.scenario.flux_imbalance(self.domain, t).abs();
        let tolerance = tol_comp * self.scenario.flux_scale(self.domain, t);
        if residual > tolerance {
            return Err(LakeError::Incompatible { residual, tolerance });
        }
        Ok(())
    }

    /// Solves for H at time t, warm-started from `guess`.
    pub fn flux_state(&self, t: f64, guess: Option<&[f64]>, config: &SolverConfig) -> Result<FluxState> {
        self.check_compatibility(t, config.tol_comp)?;
        let a = self.scenario.a.at(t);
        let source = self.scenario.source.at(t);
        let mut potential = guess.map_or_else(|| vec![0.0; self.domain.len()], |g| g.to_vec());
        if a.iter().chain(source.iter()).all(|v| *v == 0.0) {
            potential.iter_mut().for_each(|v| *v = 0.0);
            return Ok(FluxState { potential, shore_flux: ShoreFlux::zeros(self.domain) });
        }
        let opts = SolveOptions { tol: config.tol_lin.min(1e-11), ..config.solve_options() };
        let b_shore = &self.scenario.b_shore;
        self.ops.solve_neumann(self.domain, &a, b_shore, &source, &mut potential, opts)?;
        let shore_flux = self.ops.shore_fluxes(self.domain, &a, b_shore, &source, &potential);
        Ok(FluxState { potential, shore_flux })
    }

    /// ω_Γ at shoreline nodes and at link crossings for the given potentials.
    pub fn shore_vorticity(&self, t: f64, stream: &[f64], flux: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let a = self.scenario.a.at(t);
        let shore = self.trace.velocity(self.domain, &self.scenario.b_shore, &a, stream, flux);
        let data = BoundaryVorticityData::new(self.domain, self.scenario, t);
        let nodes = boundary_vorticity(&shore.tangential, &data);
        let links = self
            .domain
            .links
            .iter()
            .map(|l| self.domain.boundary.interpolate(&nodes, l.s))
            .collect();
        (nodes, links)
    }

    /// Velocity for a given stream potential and flux state.
    pub fn velocity(&self, stream: &[f64], flux: &FluxState) -> VelocityField {
        reconstruct_velocity(self.domain, &self.ops, stream, &flux.potential, &flux.shore_flux)
    }
}

/// Per-step record of the time loop.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub t: f64,
    pub dt: f64,
    pub cfl: f64,
    pub picard_iterations: usize,
    /// ‖v_k − v_{k−1}‖_∞ for k ≥ 1.
    pub residuals: Vec<f64>,
    /// Set when the residuals did not decrease monotonically.
    pub non_monotone: bool,
}

/// States at every step; `states[0]` is the initial state.
#[derive(Debug)]
pub struct Trajectory {
    pub states: Vec<StateFields>,
    pub steps: Vec<StepReport>,
    pub config: SolverConfig,
    /// Cutoff level used, possibly derived from a pilot run.
    pub cutoff: f64,
    /// Error that ended the run early.
    pub failure: Option<LakeError>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }

    pub fn last(&self) -> &StateFields {
        self.states.last().expect("trajectory holds the initial state")
    }

    /// Largest sup|ω| over all stored states.
    pub fn sup_omega(&self) -> f64 {
        self.states
            .iter()
            .flat_map(|s| s.omega.iter())
            .fold(0.0f64, |m, w| m.max(w.abs()))
    }
}

fn max_difference(a: &VelocityField, b: &VelocityField) -> f64 {
    a.faces
        .iter()
        .zip(&b.faces)
        .chain(a.links.iter().zip(&b.links))
        .fold(0.0f64, |m, (x, y)| m.max((x[0] - y[0]).abs()).max((x[1] - y[1]).abs()))
}

/// Advances `state` by `dt` with a Picard iteration on the velocity; the history must
/// end with `state`.
pub fn solve_viscous_step(
    problem: &Problem<'_>,
    state: &StateFields,
    history: &VorticityHistory,
    flux: &FluxState,
    config: &SolverConfig,
    cutoff: f64,
    dt: f64,
) -> Result<(StateFields, StepReport)> {
    let domain = problem.domain;
    let scenario = problem.scenario;
    let t1 = state.t + dt;
    let kappa = scenario.kappa.at(t1);
    let b = &scenario.b;
    let opts = config.solve_options();
    let mut guess: Cow<'_, [f64]> = Cow::Borrowed(&state.omega);
    let mut stream = state.stream.clone();
    let mut previous: Option<VelocityField> = None;
    let mut residuals = Vec::new();
    for k in 0..config.max_picard {
        let avg = history.average(t1, cutoff, Some((t1, &guess)));
        let rhs: Vec<f64> = avg.iter().zip(b).map(|(w, b)| w * b).collect();
        problem.ops.solve_dirichlet(&rhs, &mut stream, opts)?;
        let velocity = problem.velocity(&stream, flux);
        let converged = match &previous {
            Some(p) => {
                let r = max_difference(&velocity, p);
                residuals.push(r);
                r <= config.tol_fp
            }
            None => false,
        };
        let (_, shore_links) = problem.shore_vorticity(t1, &stream, &flux.potential);
        let cell_velocity = velocity.cell_centered(domain);
        let source = SourceParts::new(domain, scenario, config.source_variant, &cell_velocity, t1).explicit();
        let data = StepData {
            velocity: &velocity,
            kappa: &kappa,
            source: &source,
            shore_vorticity: &shore_links,
            nu: config.nu,
            dt,
            cfl_max: config.cfl,
            tol: (config.tol_lin * 1e-3).max(1e-14),
        };
        let outcome = step_vorticity(domain, &problem.ops, b, &state.omega, &data)?;
        if converged {
            let non_monotone = residuals.windows(2).any(|w| w[1] > w[0]);
            let report = StepReport {
                t: t1,
                dt,
                cfl: outcome.cfl,
                picard_iterations: k + 1,
                residuals,
                non_monotone,
            };
            let next = StateFields {
                t: t1,
                omega: outcome.omega,
                stream,
                flux: flux.potential.clone(),
                velocity,
            };
            return Ok((next, report));
        }
        let relax = config.relaxation;
        guess = if relax == 1.0 {
            Cow::Owned(outcome.omega)
        } else {
            Cow::Owned(outcome.omega.iter().zip(guess.iter()).map(|(n, o)| relax * n + (1.0 - relax) * o).collect())
        };
        previous = Some(velocity);
    }
    Err(LakeError::FixedPoint { t: t1, residuals })
}

/// Initial state: ω₀ with the potentials of the (empty) lagged average at t = 0.
pub fn initial_state(problem: &Problem<'_>, flux: &FluxState) -> StateFields {
    let n = problem.domain.len();
    let stream = vec![0.0; n];
    let velocity = problem.velocity(&stream, flux);
    StateFields {
        t: 0.0,
        omega: problem.scenario.omega0.clone(),
        stream,
        flux: flux.potential.clone(),
        velocity,
    }
}

/// Runs from t = 0 to T. Step failures end the run early and are recorded in the
/// returned trajectory; invalid input is an error.
pub fn run_simulation(domain: &Domain, scenario: &ScenarioData, config: &SolverConfig) -> Result<Trajectory> {
    config.validate()?;
    let problem = Problem::new(domain, scenario)?;
    problem.check_compatibility(0.0, config.tol_comp)?;
    let cutoff = match config.r {
        Some(r) => r,
        None => pilot_cutoff(&problem, config)?,
    };
    Ok(run_with_cutoff(&problem, config, cutoff))
}

/// R = 2·sup|ω| of an uncut run with twice the step size, at least 1 when everything vanishes.
fn pilot_cutoff(problem: &Problem<'_>, config: &SolverConfig) -> Result<f64> {
    let mut pilot = config.clone();
    pilot.r = Some(f64::INFINITY);
    pilot.dt = match config.dt {
        TimeStep::Fixed(dt) => TimeStep::Fixed(2.0 * dt),
        TimeStep::Cfl => TimeStep::Cfl,
    };
    pilot.dt_max = Some(2.0 * config.dt_max.unwrap_or(config.theta / 4.0));
    let traj = run_with_cutoff(problem, &pilot, f64::INFINITY);
    let sup = traj.sup_omega();
    log::info!("pilot run reached t = {:.4}, sup|omega| = {sup:.6e}", traj.last().t);
    Ok(if sup > 0.0 { 2.0 * sup } else { 1.0 })
}

fn run_with_cutoff(problem: &Problem<'_>, config: &SolverConfig, cutoff: f64) -> Trajectory {
    let scenario = problem.scenario;
    let mut traj = Trajectory {
        states: Vec::new(),
        steps: Vec::new(),
        config: config.clone(),
        cutoff,
        failure: None,
    };
    let mut flux = match problem.flux_state(0.0, None, config) {
        Ok(f) => f,
        Err(e) => {
            let n = problem.domain.len();
            let zero = FluxState {
                potential: vec![0.0; n],
                shore_flux: ShoreFlux::zeros(problem.domain),
            };
            traj.states.push(initial_state(problem, &zero));
            traj.failure = Some(e);
            return traj;
        }
    };
    traj.states.push(initial_state(problem, &flux));
    let mut history = VorticityHistory::new(config.theta);
    history.push(0.0, scenario.omega0.clone());
    let steady_flux = scenario.flux_is_steady();
    let dt_max = config.dt_max.unwrap_or(config.theta / 4.0);
    let t_end = config.t_end;
    let mut t = 0.0;
    while t < t_end * (1.0 - 1e-12) {
        let state = traj.states.last().expect("initial state");
        let remaining = t_end - t;
        let mut dt = match config.dt {
            TimeStep::Fixed(dt) => dt,
            TimeStep::Cfl => {
                let rate = cfl_number(problem.domain, &problem.ops, &scenario.b, &state.velocity, 1.0);
                if rate > 0.0 {
                    (0.5 * config.cfl / rate).min(dt_max)
                } else {
                    dt_max
                }
            }
        };
        if dt >= remaining * (1.0 - 1e-9) {
            dt = remaining;
        }
        let mut attempt = 0;
        let result = loop {
            let t1 = t + dt;
            if !steady_flux {
                match problem.flux_state(t1, Some(&flux.potential), config) {
                    Ok(f) => flux = f,
                    Err(e) => break Err(e),
                }
            }
            match solve_viscous_step(problem, state, &history, &flux, config, cutoff, dt) {
                Err(LakeError::CflViolation { .. }) if config.dt == TimeStep::Cfl && attempt < 8 => {
                    attempt += 1;
                    dt *= 0.5;
                }
                other => break other,
            }
        };
        match result {
            Ok((next, report)) => {
                if report.non_monotone {
                    log::warn!("non-monotone Picard residuals at t = {:.6}: {:?}", report.t, report.residuals);
                }
                t = next.t;
                if (t - t_end).abs() <= 1e-12 * t_end.max(1.0) {
                    t = t_end;
                }
                history.push(t, next.omega.clone());
                traj.states.push(StateFields { t, ..next });
                traj.steps.push(StepReport { t, ..report });
            }
            Err(e) => {
                log::error!("step from t = {t:.6} failed: {e}");
                traj.failure = Some(e);
                break;
            }
        }
    }
    traj
}
