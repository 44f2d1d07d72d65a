//! Cross-module checks of the assembled formulations.

use std::f64::consts::PI;

use proptest::prelude::*;
use vmsdg_core::runner::{run_experiment, ExperimentConfig, ExperimentId};
use vmsdg_core::{
    assemble_addiff_vms, assemble_classical, assemble_poisson_vms, fine_scale_diagnostics, solve,
    triangulate_unit_square, uniform_mesh_1d, BcMode, ClassicalFormulation, CoarseField, DGSpace, DiagnosticsParams,
    Diagonal, DirichletData, ExactSolution, FineScaleInterfaceModel, LinearSystem, Mesh, Operator, ProblemSpec,
    ScalarFn, VolumetricFineScaleModel,
};

fn space_1d(x0: f64, x1: f64, n: usize, p: usize) -> DGSpace {
    DGSpace::new(Mesh::OneD(uniform_mesh_1d(x0, x1, n).unwrap()), p).unwrap()
}

fn poisson(forcing: ScalarFn, domain: (f64, f64), u0: f64, u1: f64) -> ProblemSpec {
    ProblemSpec {
        operator: Operator::Poisson { forcing },
        domain,
        dirichlet: DirichletData::Endpoints(u0, u1),
        bc_mode: BcMode::Strong,
    }
}

fn max_diff(a: &LinearSystem, b: &LinearSystem) -> f64 {
    let rhs = a.rhs.iter().zip(&b.rhs).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    a.matrix.max_abs_diff(&b.matrix).max(rhs)
}

fn solve_field(space: &DGSpace, sys: &LinearSystem) -> CoarseField {
    CoarseField::new(space.clone(), solve(sys).unwrap().coefficients).unwrap()
}

/// u = 1 + 2x − 3x² on [0, 2], −u″ = 6.
fn quadratic() -> (ExactSolution, ProblemSpec) {
    let exact =
        ExactSolution::new(|x: &[f64]| 1.0 + 2.0 * x[0] - 3.0 * x[0] * x[0], |x: &[f64]| [2.0 - 6.0 * x[0], 0.0]);
    (exact, poisson(ScalarFn::constant(6.0), (0.0, 2.0), 1.0, -7.0))
}

#[test]
fn interior_penalty_reproduces_polynomials_in_the_space() {
    let (exact, problem) = quadratic();
    for p in 2..=4 {
        let space = space_1d(0.0, 2.0, 5, p);
        let sys = assemble_classical(&space, &problem, ClassicalFormulation::InteriorPenalty { eta: 3.0 }).unwrap();
        let field = solve_field(&space, &sys);
        let r = fine_scale_diagnostics(&exact, &field, DiagnosticsParams::default()).unwrap();
        assert!(r.summary.l2_error < 1e-12, "p={p}: {}", r.summary.l2_error);
    }
}

#[test]
fn penalty_only_form_is_not_consistent() {
    let (exact, problem) = quadratic();
    let space = space_1d(0.0, 2.0, 5, 2);
    let sys = assemble_classical(&space, &problem, ClassicalFormulation::BabuskaZlamal { eta: 3.0 }).unwrap();
    let field = solve_field(&space, &sys);
    let r = fine_scale_diagnostics(&exact, &field, DiagnosticsParams::default()).unwrap();
    assert!(r.summary.l2_error > 1e-3, "{}", r.summary.l2_error);
}

#[test]
fn zero_velocity_reduces_to_scaled_poisson() {
    let nu = 0.3;
    let space = space_1d(0.0, 1.0, 6, 2);
    let forcing = ScalarFn::new(|x| (PI * x[0]).sin());
    let ad = ProblemSpec {
        operator: Operator::AdvectionDiffusion { a: 0.0, nu, forcing: forcing.clone() },
        domain: (0.0, 1.0),
        dirichlet: DirichletData::Endpoints(0.5, -1.0),
        bc_mode: BcMode::Strong,
    };
    let scaled = poisson(ScalarFn::new(move |x| (PI * x[0]).sin() / nu), (0.0, 1.0), 0.5, -1.0);
    // below the coercivity threshold p = 2 has singular penalties (η = 2 on six elements is one)
    let eta = 4.0;
    let a = assemble_addiff_vms(
        &space,
        &ad,
        &FineScaleInterfaceModel::InteriorPenaltyUpwind { eta },
        VolumetricFineScaleModel::Zero,
    )
    .unwrap();
    let b = assemble_poisson_vms(
        &space,
        &scaled,
        &FineScaleInterfaceModel::InteriorPenalty { eta },
        VolumetricFineScaleModel::Zero,
    )
    .unwrap();
    let ua = solve(&a).unwrap().coefficients;
    let ub = solve(&b).unwrap().coefficients;
    let d = ua.iter().zip(&ub).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(d < 1e-12, "{d}");
}

#[test]
fn vms_upwind_matches_classical_upwind_interior_penalty() {
    let space = space_1d(0.0, 0.9, 7, 2);
    for a in [-0.5, 0.0, 0.8] {
        let problem = ProblemSpec {
            operator: Operator::AdvectionDiffusion { a, nu: 0.15, forcing: ScalarFn::constant(6.0) },
            domain: (0.0, 0.9),
            dirichlet: DirichletData::Endpoints(0.0, 2.0),
            bc_mode: BcMode::Strong,
        };
        let vms = assemble_addiff_vms(
            &space,
            &problem,
            &FineScaleInterfaceModel::InteriorPenaltyUpwind { eta: 1.5 },
            VolumetricFineScaleModel::Zero,
        )
        .unwrap();
        let classical =
            assemble_classical(&space, &problem, ClassicalFormulation::UpwindAdvectionIp { eta: 1.5 }).unwrap();
        assert!(max_diff(&vms, &classical) < 1e-12, "a={a}");
    }
}

#[test]
fn linear_field_is_reproduced_on_triangles() {
    let exact = ExactSolution::new(|x: &[f64]| 1.0 + 2.0 * x[0] - x[1], |_: &[f64]| [2.0, -1.0]);
    let g = exact.as_scalar_fn();
    for diagonal in [Diagonal::LowerLeftUpperRight, Diagonal::UpperLeftLowerRight] {
        let space = DGSpace::new(Mesh::TwoD(triangulate_unit_square(3, diagonal).unwrap()), 1).unwrap();
        let problem = ProblemSpec {
            operator: Operator::Poisson { forcing: ScalarFn::constant(0.0) },
            domain: (0.0, 1.0),
            dirichlet: DirichletData::Function(g.clone()),
            bc_mode: BcMode::Weak { eta_boundary: 8.0 },
        };
        let sys = assemble_poisson_vms(
            &space,
            &problem,
            &FineScaleInterfaceModel::InteriorPenalty { eta: 3.0 },
            VolumetricFineScaleModel::Zero,
        )
        .unwrap();
        let field = solve_field(&space, &sys);
        let params = DiagnosticsParams { eta_interior: Some(3.0), eta_boundary: Some(8.0), ..Default::default() };
        let r = fine_scale_diagnostics(&exact, &field, params).unwrap();
        assert!(r.summary.l2_error < 1e-12, "{diagonal:?}: {}", r.summary.l2_error);
    }
}

#[test]
fn experiment_artifacts_are_reproducible() {
    for id in [ExperimentId::E4, ExperimentId::E9] {
        let cfg = ExperimentConfig::preset(id);
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.solution_csv(), b.solution_csv());
        assert_eq!(a.report_json().to_string(), b.report_json().to_string());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn interior_penalty_model_is_the_classical_form(n in 1usize..10, p in 1usize..4, eta in 0.5f64..20.0) {
        let space = space_1d(-1.0, 2.0, n, p);
        let problem = poisson(ScalarFn::new(|x| x[0].exp()), (-1.0, 2.0), 0.3, -0.7);
        let vms = assemble_poisson_vms(
            &space,
            &problem,
            &FineScaleInterfaceModel::InteriorPenalty { eta },
            VolumetricFineScaleModel::Zero,
        )
        .unwrap();
        let classical = assemble_classical(&space, &problem, ClassicalFormulation::InteriorPenalty { eta }).unwrap();
        prop_assert!(max_diff(&vms, &classical) < 1e-11);
    }

    #[test]
    fn interior_penalty_solution_satisfies_the_fine_scale_identities(n in 2usize..8, p in 1usize..4, eta in 4.0f64..12.0) {
        let space = space_1d(0.0, 1.0, n, p);
        let problem = poisson(ScalarFn::new(|x| PI * PI * (PI * x[0]).sin()), (0.0, 1.0), 0.0, 0.0);
        let exact = ExactSolution::new(|x: &[f64]| (PI * x[0]).sin(), |x: &[f64]| [PI * (PI * x[0]).cos(), 0.0]);
        let sys = assemble_poisson_vms(
            &space,
            &problem,
            &FineScaleInterfaceModel::InteriorPenalty { eta },
            VolumetricFineScaleModel::Zero,
        )
        .unwrap();
        let field = solve_field(&space, &sys);
        let params = DiagnosticsParams { eta_interior: Some(eta), ..Default::default() };
        let r = fine_scale_diagnostics(&exact, &field, params).unwrap();
        prop_assert!(r.summary.max_abs_avg_uprime < 1e-9);
        prop_assert!(r.summary.max_ip_residual.unwrap() < 1e-9);
    }
}

#[test]
fn quadratic_interior_penalty_is_singular_at_isolated_penalties() {
    let problem = poisson(ScalarFn::constant(1.0), (0.0, 1.0), 0.0, 0.0);
    let cond = |n: usize, eta: f64| {
        let space = space_1d(0.0, 1.0, n, 2);
        let sys = assemble_classical(&space, &problem, ClassicalFormulation::InteriorPenalty { eta }).unwrap();
        solve(&sys).map(|s| s.condition_estimate).unwrap_or(f64::INFINITY)
    };
    assert!(cond(6, 2.0) > 1e14);
    assert!(cond(3, 2.0) < 1e3);
    assert!(cond(6, 4.0) < 1e3);
}
