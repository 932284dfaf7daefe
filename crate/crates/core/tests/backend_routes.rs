use ddro::milp::{
    export_lp, write_lp, HighsBackend, HighsCliBackend, LinExpr, MilpBackend, MilpModel, Sense, SolveOptions, SolveStatus,
};
use ddro::policy::RecourseMode;
use ddro::reformulation::{reformulate, ReformulationConfig};
use ddro::studies::{build_design_problem, equidistant_breakpoints, DesignCase, DesignData};

fn external() -> Option<HighsCliBackend> {
    let b = HighsCliBackend::discover();
    if b.is_none() {
        eprintln!("no `highs` executable on PATH or in DDRO_HIGHS; external route not exercised");
    }
    b
}

fn case_model(case: DesignCase, recourse: RecourseMode) -> MilpModel {
    let d = DesignData::three_unit().with_case(case);
    let mut p = build_design_problem(&d).unwrap();
    p.breakpoints = equidistant_breakpoints(&p, 3);
    let cfg = ReformulationConfig {
        recourse,
        ..ReformulationConfig::default()
    };
    reformulate(&p, &cfg).unwrap().0
}

#[test]
fn export_is_byte_identical_across_runs() {
    let a = write_lp(&case_model(DesignCase::B, RecourseMode::Mixed)).unwrap().0;
    let b = write_lp(&case_model(DesignCase::B, RecourseMode::Mixed)).unwrap().0;
    assert_eq!(a, b);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.lp");
    export_lp(&case_model(DesignCase::B, RecourseMode::Mixed), &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), a);
    assert!(a.contains("Binary") || a.contains("Binaries"));
}

#[test]
fn one_variable_model_through_both_routes() {
    let mut m = MilpModel::new("tiny");
    let x = m.continuous("x", f64::NEG_INFINITY, f64::INFINITY);
    m.add_row("floor", &LinExpr::term(x, 1.0), Sense::Ge, 1.0);
    m.set_objective(&LinExpr::term(x, 1.0));
    let linked = HighsBackend::new().solve(&m, &SolveOptions::default()).unwrap();
    assert_eq!(linked.status, SolveStatus::Optimal);
    assert!((linked.objective.unwrap() - 1.0).abs() < 1e-9);
    if let Some(cli) = external() {
        let r = cli.solve(&m, &SolveOptions::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective.unwrap() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn reformulated_models_agree_across_routes() {
    let Some(cli) = external() else { return };
    let opts = SolveOptions {
        gap: 1e-6,
        ..SolveOptions::default()
    };
    let m = case_model(DesignCase::B, RecourseMode::Mixed);
    let a = HighsBackend::new().solve(&m, &opts).unwrap();
    let b = cli.solve(&m, &opts).unwrap();
    assert_eq!((a.status, b.status), (SolveStatus::Optimal, SolveStatus::Optimal));
    let (oa, ob) = (a.objective.unwrap(), b.objective.unwrap());
    assert!((oa - ob).abs() <= 1e-6 * oa.abs().max(1.0), "linked {oa}, file {ob}");
    assert!((ob - 465.0).abs() <= 0.01 * 465.0);

    let m = case_model(DesignCase::A, RecourseMode::Continuous);
    assert_eq!(HighsBackend::new().solve(&m, &opts).unwrap().status, SolveStatus::Infeasible);
    assert_eq!(cli.solve(&m, &opts).unwrap().status, SolveStatus::Infeasible);
}

#[test]
fn missing_executable_is_an_error() {
    let cli = HighsCliBackend::new("/nonexistent/highs");
    let mut m = MilpModel::new("tiny");
    let x = m.continuous("x", 0.0, 1.0);
    m.set_objective(&LinExpr::term(x, 1.0));
    assert!(cli.solve(&m, &SolveOptions::default()).is_err());
}
