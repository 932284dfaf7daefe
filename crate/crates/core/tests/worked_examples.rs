use ddro::milp::SolveStatus;
use ddro::policy::{check_binary_admissibility, evaluate_policy, RecourseMode};
use ddro::problem::{MultistageProblem, ParamId, ProblemBuilder, RowTerms, StageSpec};
use ddro::reformulation::ReformulationConfig;
use ddro::studies::{run, RunConfig};
use ddro::uncertainty::{build_hull_system, optimize_over_hull, Breakpoints, DduSet, HullAffine, HullVar, SetStage, Support};

/// The three-parameter set whose shape depends on two first-stage binaries.
/// `sign` is the coefficient of the constant in the fifth row.
fn switching_set(sign: f64) -> DduSet {
    DduSet {
        support: vec![
            vec![Support::new(1.0, 1.0)],
            vec![Support::new(0.0, 15.0), Support::new(0.0, 13.0)],
        ],
        stages: vec![SetStage {
            stage: 2,
            w: vec![
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
                vec![-8.0, -1.0, 2.0],
                vec![-13.0, 1.0, 1.0],
                vec![sign * 25.0, 4.0, -7.0],
                vec![40.0, -8.0, -3.0],
            ],
            u: vec![vec![
                vec![7.0, 8.0],
                vec![0.0, 13.0],
                vec![0.0, 15.0],
                vec![7.0, 2.0],
                vec![21.0, 11.0],
                vec![0.0, 0.0],
            ]],
            row_names: vec![],
        }],
    }
}

/// `(min, max)` of a parameter over the set with the binaries fixed, `None`
/// when the set is empty.
fn range(set: &DduSet, y: [f64; 2], param: usize) -> Option<(f64, f64)> {
    let bp = Breakpoints::none(set);
    let sys = build_hull_system(set, &bp, 2).unwrap();
    let k = sys.position(ParamId::new(2, param)).unwrap();
    let obj = HullAffine::term(HullVar::Xi(k), 1.0);
    let yf = move |_s: usize, q: usize| HullAffine::constant(y[q]);
    let hi = optimize_over_hull(&sys, &yf, &obj, true).unwrap();
    if hi.status == SolveStatus::Infeasible {
        return None;
    }
    let lo = optimize_over_hull(&sys, &yf, &obj, false).unwrap();
    Some((lo.value.unwrap(), hi.value.unwrap()))
}

fn close(a: (f64, f64), b: (f64, f64)) -> bool {
    (a.0 - b.0).abs() < 1e-7 && (a.1 - b.1).abs() < 1e-7
}

#[test]
fn switching_set_collapses_to_a_segment() {
    let set = switching_set(-1.0);
    let xi2 = range(&set, [1.0, 0.0], 1).expect("nonempty");
    let xi3 = range(&set, [1.0, 0.0], 2).expect("nonempty");
    assert!(close(xi2, (5.0, 7.0)), "{xi2:?}");
    assert!(close(xi3, (0.0, 0.0)), "{xi3:?}");
}

#[test]
fn switching_set_is_empty_without_binaries() {
    for sign in [1.0, -1.0] {
        assert_eq!(range(&switching_set(sign), [0.0, 0.0], 1), None);
    }
}

#[test]
fn switching_set_grows_with_second_binary() {
    let set = switching_set(-1.0);
    let both = range(&set, [1.0, 1.0], 1).unwrap();
    let second = range(&set, [0.0, 1.0], 1).unwrap();
    let first = range(&set, [1.0, 0.0], 1).unwrap();
    assert!(both.0 <= second.0 + 1e-9 && both.1 >= second.1 - 1e-9);
    assert!(both.0 <= first.0 + 1e-9 && both.1 >= first.1 - 1e-9);
    let xi3 = range(&set, [1.0, 1.0], 2).unwrap();
    assert!(xi3.1 > 0.0);
}

#[test]
fn printed_constant_sign_empties_the_first_binary_set() {
    // with +25 the fifth row forces 4 xi2 <= -4 once xi3 = 0
    assert_eq!(range(&switching_set(1.0), [1.0, 0.0], 1), None);
    assert!(range(&switching_set(1.0), [1.0, 1.0], 1).is_some());
}

/// min 2 x1 + x2 with exactly one of two units serving xi in [1, 5]; unit 1
/// covers [1, 3] and unit 2 covers [3, 5].
fn either_or(breakpoint: Option<f64>) -> MultistageProblem {
    let xi = ParamId::new(2, 1);
    let mut b = ProblemBuilder::new(
        "either-or",
        vec![
            StageSpec {
                continuous: vec!["obj".into()],
                ..Default::default()
            },
            StageSpec {
                params: vec![("xi".into(), Support::new(1.0, 5.0))],
                continuous: vec!["x1".into(), "x2".into()],
                binaries: vec!["y1".into(), "y2".into()],
            },
        ],
    );
    b.row(2, "x1_lo", RowTerms::new().y(2, 0, 1.0).x(2, 0, -1.0));
    b.row(2, "x1_hi", RowTerms::new().x(2, 0, 1.0).y(2, 0, -3.0));
    b.row(2, "x2_lo", RowTerms::new().y(2, 1, 3.0).x(2, 1, -1.0));
    b.row(2, "x2_hi", RowTerms::new().x(2, 1, 1.0).y(2, 1, -5.0));
    b.row(2, "balance_le", RowTerms::new().x(2, 0, 1.0).x(2, 1, 1.0).xi(xi, -1.0));
    b.row(2, "balance_ge", RowTerms::new().x(2, 0, -1.0).x(2, 1, -1.0).xi(xi, 1.0));
    b.row(2, "one_unit", RowTerms::new().y(2, 0, 1.0).y(2, 1, 1.0).constant(-1.0));
    let c = b.row(2, "cost", RowTerms::new().x(2, 0, 2.0).x(2, 1, 1.0).x1(0, -1.0));
    b.cost_row(c);
    let mut p = b.build();
    if let Some(v) = breakpoint {
        p.breakpoints.set(xi, vec![v]);
    }
    p
}

fn config(recourse: RecourseMode) -> RunConfig {
    RunConfig {
        reformulation: ReformulationConfig {
            recourse,
            ..ReformulationConfig::default()
        },
        verify: true,
        ..RunConfig::default()
    }
}

#[test]
fn either_or_needs_a_discontinuous_rule() {
    let p = either_or(Some(3.0));
    let r = run(&p, &config(RecourseMode::Mixed)).unwrap();
    assert_eq!(r.report.status, SolveStatus::Optimal);
    // the left piece is closed at 3, where unit 1 costs 2 * 3
    assert!((r.report.objective.unwrap() - 6.0).abs() < 1e-6, "{:?}", r.report.objective);
    assert_eq!(r.certified(), Some(true));

    let policy = r.policy.as_ref().unwrap();
    assert!(check_binary_admissibility(policy, &p, r.first.as_ref().unwrap()).is_admissible());
    let at = |v: f64| evaluate_policy(policy, &[vec![1.0], vec![v]], 2).unwrap();
    let (x, y) = at(2.0);
    assert_eq!(y, vec![1.0, 0.0]);
    assert!((x[0] - 2.0).abs() < 1e-6 && x[1].abs() < 1e-6, "{x:?}");
    let (x, y) = at(4.0);
    assert_eq!(y, vec![0.0, 1.0]);
    assert!(x[0].abs() < 1e-6 && (x[1] - 4.0).abs() < 1e-6, "{x:?}");
}

#[test]
fn either_or_is_infeasible_with_affine_or_fixed_binaries() {
    let r = run(&either_or(None), &config(RecourseMode::Mixed)).unwrap();
    assert_eq!(r.report.status, SolveStatus::Infeasible);
    let r = run(&either_or(Some(3.0)), &config(RecourseMode::Continuous)).unwrap();
    assert_eq!(r.report.status, SolveStatus::Infeasible);
}
