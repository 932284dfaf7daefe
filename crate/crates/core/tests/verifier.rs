use std::sync::OnceLock;

use ddro::policy::{FirstStageDecision, InfoStructure, PolicyCoefficients, RecourseMode};
use ddro::problem::{MultistageProblem, ParamId, ProblemBuilder, RowTerms, StageSpec};
use ddro::reformulation::ReformulationConfig;
use ddro::studies::{build_design_problem, equidistant_breakpoints, run, DesignCase, DesignData, RunConfig, RunResult};
use ddro::uncertainty::Support;
use ddro::verify::{inner_max_check, simulate_policy, worst_simulated_cost, GridOptions, RowStatus, VerifyError, CERT_TOL};

fn case_b() -> &'static (MultistageProblem, RunResult) {
    static SOLVED: OnceLock<(MultistageProblem, RunResult)> = OnceLock::new();
    SOLVED.get_or_init(|| {
        let d = DesignData::three_unit().with_case(DesignCase::B);
        let mut p = build_design_problem(&d).unwrap();
        p.breakpoints = equidistant_breakpoints(&p, 3);
        let cfg = RunConfig {
            reformulation: ReformulationConfig {
                recourse: RecourseMode::Mixed,
                ..ReformulationConfig::default()
            },
            verify: true,
            ..RunConfig::default()
        };
        let r = run(&p, &cfg).unwrap();
        (p, r)
    })
}

#[test]
fn case_b_incumbent_is_certified() {
    let (_, r) = case_b();
    let check = r.check.as_ref().unwrap();
    assert!(check.certified(), "{}", check.to_table());
    assert!(check.rows.iter().all(|c| c.value.is_some_and(|v| v <= CERT_TOL)));
    assert!(r.admissibility.as_ref().unwrap().is_admissible());
}

#[test]
fn shifted_production_rule_is_caught() {
    let (p, r) = case_b();
    let mut policy = r.policy.clone().unwrap();
    policy.block_mut(2, ParamId::CONSTANT).unwrap().xbar[0][0] += 10.0;
    let check = inner_max_check(p, r.first.as_ref().unwrap(), &policy).unwrap();
    assert!(!check.certified());
    let worst = check.max_value().unwrap();
    assert!(worst > 1.0, "worst row value {worst}");
    assert!(check.violated().iter().any(|c| c.name == "demand_le" && c.status == RowStatus::Violated));
}

/// Stage-2 trajectory `(c_hat_1, c_hat_2, c_hat_3, d)` with shortfalls of
/// unbuilt units at zero.
fn trajectory(z: &[f64], c_hat: [f64; 3], d: f64) -> Vec<Vec<f64>> {
    let mut stage2: Vec<f64> = c_hat.iter().zip(z).map(|(c, z)| if *z > 0.5 { *c } else { 0.0 }).collect();
    stage2.push(d);
    vec![vec![1.0], stage2]
}

#[test]
fn worst_realization_costs_the_certified_value() {
    let (p, r) = case_b();
    let first = r.first.as_ref().unwrap();
    let z = first.y_rounded();
    // the closed form has units 2 and 3 built and unit 1 idle
    assert_eq!(z, vec![0.0, 1.0, 1.0]);
    let sim = simulate_policy(p, first, r.policy.as_ref().unwrap(), &trajectory(&z, [0.0, 20.0, 0.0], 110.0)).unwrap();
    assert!(sim.feasible(), "{:?}", sim.violations);
    let cost = sim.cost.unwrap();
    assert!((cost - 465.0).abs() <= 0.01 * 465.0, "cost {cost}");
}

#[test]
fn simulated_worst_case_matches_the_objective() {
    let (p, r) = case_b();
    let objective = r.report.objective.unwrap();
    let wc = worst_simulated_cost(
        p,
        r.first.as_ref().unwrap(),
        r.policy.as_ref().unwrap(),
        r.check.as_ref(),
        &GridOptions::default(),
    )
    .unwrap();
    assert_eq!(wc.infeasible, 0);
    assert!(wc.cost <= objective + 1e-6, "simulated {} above {objective}", wc.cost);
    let gap = r.report.gap.unwrap_or(0.0).max(0.01);
    assert!(objective - wc.cost <= gap * objective + 1e-6, "simulated {} far below {objective}", wc.cost);
}

#[test]
fn demand_below_support_is_rejected() {
    let (p, r) = case_b();
    let first = r.first.as_ref().unwrap();
    let z = first.y_rounded();
    let err = simulate_policy(p, first, r.policy.as_ref().unwrap(), &trajectory(&z, [0.0, 0.0, 0.0], 5.0)).unwrap_err();
    assert!(matches!(err, VerifyError::OutOfSupport { .. }), "{err}");
}

#[test]
fn zero_policy_on_zero_instance_has_no_positive_slack() {
    let xi = ParamId::new(2, 1);
    let mut b = ProblemBuilder::new(
        "zero",
        vec![
            StageSpec {
                continuous: vec!["obj".into()],
                ..Default::default()
            },
            StageSpec {
                params: vec![("xi".into(), Support::new(0.0, 4.0))],
                continuous: vec!["x".into()],
                binaries: vec!["y".into()],
            },
        ],
    );
    b.row(2, "nonneg", RowTerms::new().x(2, 0, -1.0));
    b.row(2, "bounded", RowTerms::new().x(2, 0, 1.0).xi(xi, -1.0));
    let c = b.row(2, "cost", RowTerms::new().x1(0, -1.0));
    b.cost_row(c);
    let mut p = b.build();
    p.breakpoints.set(xi, vec![2.0]);
    let policy = PolicyCoefficients::zeros(&p, &InfoStructure::full(2));
    let first = FirstStageDecision {
        x: vec![0.0],
        y: vec![],
    };
    let check = inner_max_check(&p, &first, &policy).unwrap();
    assert!(check.certified());
    assert!(check.rows.iter().all(|c| c.value.unwrap() <= 1e-9), "{}", check.to_table());
}
