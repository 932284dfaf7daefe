mod common;

use common::design;
use ddro::milp::{solve, SolveOptions, SolveStatus};
use ddro::policy::{InfoStructure, RecourseMode};
use ddro::problem::MultistageProblem;
use ddro::reformulation::{dualize_multistage, dualize_two_stage, ReformulationConfig};
use ddro::studies::{build_planning_problem, equidistant_breakpoints, planning_info, DesignCase, PlanningData, SetVariant};

fn exact() -> SolveOptions {
    SolveOptions {
        gap: 1e-6,
        ..SolveOptions::default()
    }
}

fn objective_of(model: &ddro::milp::MilpModel) -> (SolveStatus, Option<f64>) {
    let r = solve(model, &exact()).unwrap();
    (r.status, r.objective)
}

fn same(a: (SolveStatus, Option<f64>), b: (SolveStatus, Option<f64>)) -> bool {
    a.0 == b.0
        && match (a.1, b.1) {
            (Some(x), Some(y)) => (x - y).abs() <= 1e-5 * (1.0 + x.abs()),
            (None, None) => true,
            _ => false,
        }
}

#[test]
fn two_stage_and_multistage_paths_agree() {
    let cases = [
        (DesignCase::B, SetVariant::Box, 3, RecourseMode::Mixed),
        (DesignCase::B, SetVariant::Box, 3, RecourseMode::Continuous),
        (DesignCase::B, SetVariant::Fixed, 1, RecourseMode::Mixed),
        (DesignCase::B, SetVariant::DecisionDependent, 2, RecourseMode::Mixed),
        (DesignCase::A, SetVariant::Box, 3, RecourseMode::Continuous),
        (DesignCase::A, SetVariant::Box, 6, RecourseMode::Mixed),
    ];
    for (case, variant, n, recourse) in cases {
        let p = design(case, variant, n);
        let cfg = ReformulationConfig {
            recourse,
            ..ReformulationConfig::default()
        };
        let (m2, _) = dualize_two_stage(&p, &cfg).unwrap();
        let (mm, _) = dualize_multistage(&p, &cfg).unwrap();
        let a = objective_of(&m2);
        let b = objective_of(&mm);
        assert!(same(a, b), "{case:?} {variant:?} n={n} {recourse:?}: two-stage {a:?}, multistage {b:?}");
    }
}

fn one_period_planning() -> MultistageProblem {
    let d = PlanningData::bundled().with_horizon(1);
    let mut p = build_planning_problem(&d).unwrap();
    p.breakpoints = equidistant_breakpoints(&p, 1);
    p
}

#[test]
fn full_window_equals_unrestricted_rules() {
    let p = one_period_planning();
    assert_eq!(p.num_stages(), 3);
    for recourse in [RecourseMode::Continuous, RecourseMode::Mixed] {
        let solve_with = |info: InfoStructure| {
            let cfg = ReformulationConfig {
                recourse,
                info: Some(info),
                ..ReformulationConfig::default()
            };
            let (m, _) = dualize_multistage(&p, &cfg).unwrap();
            objective_of(&m)
        };
        let full = solve_with(InfoStructure::full(3));
        let wide = solve_with(InfoStructure::uniform(3, Some(3)));
        assert!(same(full, wide), "{recourse:?}: full {full:?}, window {wide:?}");
        // restricting information can only cost more
        let current = solve_with(planning_info(1));
        assert!(current.1.unwrap() >= full.1.unwrap() - 1e-6, "{recourse:?}: {current:?} < {full:?}");
    }
}
