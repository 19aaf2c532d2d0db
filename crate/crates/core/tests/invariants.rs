//! Structural invariants checked on random inputs.

use proptest::prelude::*;

use lakesim::diagnostics::{exponent_table, max_principle_monitor};
use lakesim::domain::{build_domain, partition_boundary, Domain, Shape};
use lakesim::elliptic::{div_h, reconstruct_velocity, solve_dirichlet_weighted, Operators, SolveOptions};
use lakesim::scenario::{ScenarioData, SourceVariant};
use lakesim::solver::{discrete_gronwall_bound, lagged_integral_solution, run_simulation, Problem, SolverConfig};
use lakesim::transport::timelag_cutoff_average;

fn ellipse(ax: f64, ay: f64, n: usize) -> Domain {
    build_domain(&Shape::Ellipse { center: [0.1, -0.2], semi_axes: [ax, ay] }, n).unwrap()
}

/// c₀ + c₁x + c₂y + c₃ sin(kx + y).
fn field(c: [f64; 4], k: f64) -> impl Fn(f64, f64) -> f64 {
    move |x, y| c[0] + c[1] * x + c[2] * y + c[3] * (k * x + y).sin()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lagged_average_stays_in_the_hull(
        values in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 1..8),
        dt in 0.01f64..0.2,
        theta in 0.01f64..1.0,
        r in 0.5f64..4.0,
        frac in 0.0f64..1.0,
    ) {
        let points: Vec<(f64, &[f64])> = values.iter().enumerate().map(|(k, v)| (k as f64 * dt, v.as_slice())).collect();
        let t = (values.len() - 1) as f64 * dt * frac;
        let avg = timelag_cutoff_average(&points, t, theta, r);
        for (i, a) in avg.iter().enumerate() {
            let hull = values.iter().fold(0.0f64, |m, v| m.max(v[i].abs().min(r)));
            prop_assert!(a.abs() <= hull + 1e-12);
        }
    }

    #[test]
    fn partition_covers_every_node(a in prop::collection::vec(-1.0f64..1.0, 1..60), eps in 0.0f64..0.5) {
        let part = partition_boundary(&a, eps);
        let mut all: Vec<usize> = part.inflow.iter().chain(&part.tangential).chain(&part.outflow).cloned().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..a.len()).collect::<Vec<_>>());
        prop_assert!(part.inflow.iter().all(|&k| a[k] < 0.0));
        prop_assert!(part.outflow.iter().all(|&k| a[k] > 0.0));
    }

    #[test]
    fn exponents_satisfy_the_holder_relation(p in 1.05f64..50.0, eps in 0.01f64..1.0) {
        let t = exponent_table(p, eps).unwrap();
        prop_assert!(t.holder_defect() < 1e-12);
        prop_assert!((1.0 / t.p_star + 1.0 / t.p - 1.0).abs() < 1e-12);
    }

    /// When ∫D ≤ 0.3 the solution is below (y₀ + ∫B)e^{2∫D}, which the bound dominates.
    #[test]
    fn lagged_solution_respects_the_bound_for_small_growth(
        y0 in 0.0f64..3.0,
        theta in 0.005f64..0.5,
        c in 0.0f64..0.15,
        w in 0.5f64..8.0,
        cb in 0.0f64..2.0,
    ) {
        let n = 400;
        let times: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
        let d: Vec<f64> = times.iter().map(|t| c * (1.0 + (w * t).sin())).collect();
        let b: Vec<f64> = times.iter().map(|t| cb * (w * t).cos().powi(2)).collect();
        let y = lagged_integral_solution(y0, &times, &d, &b, theta).unwrap();
        let bound = discrete_gronwall_bound(y0, &times, &d, &b).unwrap();
        for (y, b) in y.iter().zip(&bound) {
            prop_assert!(*y <= *b * (1.0 + 1e-12));
        }
        prop_assert!(bound.windows(2).all(|p| p[1] >= p[0]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn dirichlet_solve_is_monotone(
        ax in 0.8f64..1.2, ay in 0.7f64..1.0,
        cb in prop::array::uniform4(-0.2f64..0.2), k in 0.5f64..3.0,
    ) {
        let d = ellipse(ax, ay, 20);
        let depth = field([1.0, cb[0], cb[1], cb[2]], k);
        let b = d.sample(&depth);
        let bs = d.sample_boundary(|x, y, _| depth(x, y));
        let rhs = d.sample(|x, y| 1.0 + (k * x * y).sin());
        let h = solve_dirichlet_weighted(&d, &b, &bs, &rhs, SolveOptions { tol: 1e-12, ..Default::default() }).unwrap();
        prop_assert!(h.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn flux_fields_balance_every_cell(
        ax in 0.8f64..1.2, ay in 0.7f64..1.0,
        cb in prop::array::uniform4(-0.2f64..0.2),
        ca in prop::array::uniform4(-1.0f64..1.0),
        cs in prop::array::uniform4(-1.0f64..1.0),
        k in 0.5f64..3.0,
    ) {
        let d = ellipse(ax, ay, 24);
        let s = ScenarioData::quiescent(&d)
            .with_depth(&d, field([1.0, cb[0], cb[1], cb[2]], k))
            .unwrap()
            .with_shore_flux(&d, |x, y, _| field(ca, k)(x, y))
            .with_source(&d, field(cs, k))
            .balanced(&d);
        let problem = Problem::new(&d, &s).unwrap();
        let flux = problem.flux_state(0.0, None, &SolverConfig::default()).unwrap();
        let mean = flux.potential.iter().sum::<f64>() / d.len() as f64;
        prop_assert!(mean.abs() < 1e-12);
        let ops: &Operators = &problem.ops;
        let v = reconstruct_velocity(&d, ops, &vec![0.0; d.len()], &flux.potential, &flux.shore_flux);
        let div = div_h(&d, ops, &v);
        let source = s.source.at(0.0);
        let scale = source.iter().fold(1.0f64, |m, a| m.max(a.abs()));
        for (a, b) in div.iter().zip(source.iter()) {
            prop_assert!((a - b).abs() <= 1e-7 * scale);
        }
    }

    #[test]
    fn clean_runs_obey_the_maximum_principle(
        cw in prop::array::uniform4(-1.0f64..1.0),
        cb in prop::array::uniform4(-0.3f64..0.3),
        kappa in 0.0f64..1.0,
        k in 0.5f64..3.0,
        nu in prop::sample::select(vec![0.0, 1e-3]),
    ) {
        let d = ellipse(1.1, 0.8, 20);
        let s = ScenarioData::quiescent(&d)
            .with_depth(&d, field([1.0, cb[0], cb[1], cb[2]], k))
            .unwrap()
            .with_initial_vorticity(&d, field(cw, k))
            .with_friction(&d, move |x, _| kappa * (1.0 + x.sin()) / 2.0);
        let cfg = SolverConfig { t_end: 0.2, nu, source_variant: SourceVariant::Source, ..Default::default() };
        let traj = run_simulation(&d, &s, &cfg).unwrap();
        prop_assert!(traj.is_complete());
        let series = max_principle_monitor(&Problem::new(&d, &s).unwrap(), &traj);
        prop_assert!(series.clean && series.holds(1e-10));
        // Without viscosity and without inflow the shoreline data never enter.
        if nu == 0.0 {
            let start = s.omega0.iter().fold(0.0f64, |m, w| m.max(w.abs()));
            prop_assert!(traj.sup_omega() <= start * (1.0 + 1e-12) + 1e-12);
        }
    }
}
