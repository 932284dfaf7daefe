//! Instance generators shared by the suites and the acceptance run.
#![allow(dead_code)]

use ddro::milp::{solve, LinExpr, MilpModel, SolveOptions, SolveStatus};
use ddro::problem::{MultistageProblem, ParamId, ProblemBuilder, RowTerms, StageSpec};
use ddro::reformulation::glover_linearize;
use ddro::studies::{build_design_problem, equidistant_breakpoints, DesignCase, DesignData, SetVariant};
use ddro::uncertainty::Support;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A covering problem: one unit serves `sum a_i xi_i` at base capacity that
/// a recourse binary can extend; a first-stage binary widens the budget of
/// the uncertainty set and costs `g`.
pub fn random_instance(rng: &mut ChaCha8Rng, id: usize) -> MultistageProblem {
    let k = rng.gen_range(1..=3);
    let supports: Vec<Support> = (0..k).map(|_| Support::new(0.0, rng.gen_range(1.0..10.0f64).round())).collect();
    let a: Vec<f64> = (0..k).map(|_| rng.gen_range(0.2..2.0)).collect();
    let need: f64 = a.iter().zip(&supports).map(|(a, s)| a * s.max).sum();
    let base = rng.gen_range(0.3..0.9) * need;
    let params: Vec<ParamId> = (1..=k).map(|i| ParamId::new(2, i)).collect();

    let mut b = ProblemBuilder::new(
        &format!("random-{id}"),
        vec![
            StageSpec {
                continuous: vec!["obj".into()],
                binaries: vec!["z".into()],
                ..Default::default()
            },
            StageSpec {
                params: (0..k).map(|i| (format!("xi{}", i + 1), supports[i])).collect(),
                continuous: vec!["x".into()],
                binaries: vec!["y".into()],
            },
        ],
    );
    let mut demand = RowTerms::new().x(2, 0, -1.0);
    for (p, &ai) in params.iter().zip(&a) {
        demand = demand.xi(*p, ai);
    }
    b.row(2, "demand", demand);
    b.row(2, "capacity", RowTerms::new().x(2, 0, 1.0).constant(-base).y(2, 0, -(need - base + 1.0)));
    b.row(2, "nonneg", RowTerms::new().x(2, 0, -1.0));
    let (c, f, g) = (rng.gen_range(1.0..5.0), rng.gen_range(0.0..20.0), rng.gen_range(0.0..10.0));
    let cost = b.row(2, "cost", RowTerms::new().x(2, 0, c).y(2, 0, f).y1(0, g).x1(0, -1.0));
    b.cost_row(cost);
    let total: f64 = supports.iter().map(|s| s.max).sum();
    let budget = rng.gen_range(0.2..0.8) * total;
    // sum xi <= budget, widened to the full box when z = 1
    let mut w: Vec<(ParamId, f64)> = params.iter().map(|&p| (p, 1.0)).collect();
    w.push((ParamId::CONSTANT, -budget));
    b.set_row(2, "budget", w, vec![(1, 0, total - budget)]);
    let mut p = b.build();

    for (s, &q) in supports.iter().zip(&params) {
        let n = rng.gen_range(0..=2);
        let mut pts: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..0.9) * s.max).collect();
        pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        pts.dedup_by(|x, y| (*x - *y).abs() < 1e-3);
        p.breakpoints.set(q, pts);
    }
    p
}

/// Range of the auxiliary variable over the linearized rows with `w` and `z`
/// fixed.
pub fn glover_projection(w: f64, z: f64, m: f64) -> (f64, f64) {
    let mut model = MilpModel::new("glover");
    let wv = model.continuous("w", 0.0, m);
    let zv = model.binary("z");
    let (v, _) = glover_linearize(&mut model, wv, zv, m, "v").unwrap();
    model.var_mut(wv).lower = w;
    model.var_mut(wv).upper = w;
    model.var_mut(zv).lower = z;
    model.var_mut(zv).upper = z;
    let opts = SolveOptions {
        gap: 0.0,
        polish: false,
        ..SolveOptions::default()
    };
    let mut lo = model.clone();
    lo.set_objective(&LinExpr::term(v, 1.0));
    let mut hi = model;
    hi.set_objective(&LinExpr::term(v, -1.0));
    let a = solve(&lo, &opts).unwrap();
    let b = solve(&hi, &opts).unwrap();
    assert_eq!(a.status, SolveStatus::Optimal);
    assert_eq!(b.status, SolveStatus::Optimal);
    (a.objective.unwrap(), -b.objective.unwrap())
}

/// Three-unit design instance with equidistant breakpoints.
pub fn design(case: DesignCase, variant: SetVariant, n: usize) -> MultistageProblem {
    let d = DesignData::three_unit().with_case(case).with_set(variant, 0.5);
    let mut p = build_design_problem(&d).unwrap();
    p.breakpoints = equidistant_breakpoints(&p, n);
    p
}
