use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{build_lifted_vertex_set, lift_binary_unchecked, lift_continuous_unchecked, Breakpoints, DduSet, LiftedVertexSet, UncertaintyError};
use crate::milp::{self, LinExpr, MilpModel, Sense, SolveOptions, SolveStatus, VarId};
use crate::problem::ParamId;

/// A column of the hull system. The first index is the parameter's position
/// in `xi^[t]`; the second is 0-based inside its lifting or vertex list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HullVar {
    Xi(usize),
    Bar(usize, usize),
    Hat(usize, usize),
    Lambda(usize, usize),
}

/// `terms (sense) rhs + sum coef * y[stage][q]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullRow {
    pub name: String,
    pub terms: Vec<(HullVar, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    /// `(stage, q, coef)` with `q` 0-based.
    pub y_terms: Vec<(usize, usize, f64)>,
}

/// Outer approximation of the lifted set at one stage: per-parameter convex
/// hulls of the lifted vertices joined by the set rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullSystem {
    pub stage: usize,
    pub params: Vec<ParamId>,
    pub vertices: LiftedVertexSet,
    pub rows: Vec<HullRow>,
}

/// An affine expression in hull columns, used to bind `y` symbols and to
/// state objectives.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HullAffine {
    pub constant: f64,
    pub terms: Vec<(HullVar, f64)>,
}

impl HullAffine {
    pub fn constant(c: f64) -> Self {
        Self {
            constant: c,
            terms: Vec::new(),
        }
    }

    pub fn term(v: HullVar, c: f64) -> Self {
        Self {
            constant: 0.0,
            terms: vec![(v, c)],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HullOptimum {
    pub status: SolveStatus,
    /// Objective value including the constant; `None` when the system is
    /// empty.
    pub value: Option<f64>,
    pub xi: Vec<f64>,
    pub bar: Vec<Vec<f64>>,
    pub hat: Vec<Vec<f64>>,
}

pub fn build_hull_system(set: &DduSet, bp: &Breakpoints, t: usize) -> Result<HullSystem, UncertaintyError> {
    if t < 1 || t > set.num_stages() {
        return Err(UncertaintyError::UnknownStage(t));
    }
    let vertices = build_lifted_vertex_set(set, bp, t)?;
    let params: Vec<ParamId> = vertices.params.iter().map(|p| p.param).collect();
    let mut rows = Vec::new();
    for (k, pv) in vertices.params.iter().enumerate() {
        let nv = pv.vertices.len();
        let p = pv.param;
        rows.push(HullRow {
            name: format!("simplex[{p}]"),
            terms: (0..nv).map(|l| (HullVar::Lambda(k, l), 1.0)).collect(),
            sense: Sense::Eq,
            rhs: 1.0,
            y_terms: Vec::new(),
        });
        let mut mix = |name: String, var: HullVar, coef: &dyn Fn(usize) -> f64| {
            let mut terms = vec![(var, 1.0)];
            for l in 0..nv {
                let c = coef(l);
                if c != 0.0 {
                    terms.push((HullVar::Lambda(k, l), -c));
                }
            }
            rows.push(HullRow {
                name,
                terms,
                sense: Sense::Eq,
                rhs: 0.0,
                y_terms: Vec::new(),
            });
        };
        mix(format!("mix_xi[{p}]"), HullVar::Xi(k), &|l| pv.vertices[l].v);
        for j in 0..pv.r() {
            mix(format!("mix_bar[{p},{}]", j + 1), HullVar::Bar(k, j), &|l| pv.vertices[l].bar[j]);
        }
        for j in 0..pv.g() {
            mix(format!("mix_hat[{p},{}]", j + 1), HullVar::Hat(k, j), &|l| pv.vertices[l].hat[j]);
        }
    }
    for r in set.rows_upto(t) {
        rows.push(HullRow {
            name: format!("set[{}]", r.name()),
            terms: r
                .w
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0.0)
                .map(|(k, &c)| (HullVar::Xi(k), c))
                .collect(),
            sense: Sense::Le,
            rhs: 0.0,
            y_terms: r.u_terms(),
        });
    }
    Ok(HullSystem {
        stage: t,
        params,
        vertices,
        rows,
    })
}

/// A full assignment of hull columns.
#[derive(Debug, Clone, PartialEq)]
pub struct HullPoint {
    pub xi: Vec<f64>,
    pub bar: Vec<Vec<f64>>,
    pub hat: Vec<Vec<f64>>,
    pub lambda: Vec<Vec<f64>>,
}

impl HullSystem {
    pub fn num_columns(&self) -> usize {
        self.vertices
            .params
            .iter()
            .map(|p| 1 + p.r() + p.g() + p.vertices.len())
            .sum()
    }

    pub fn position(&self, p: ParamId) -> Option<usize> {
        self.params.iter().position(|q| *q == p)
    }

    /// The lifted image of a realization together with matching convex weights.
    pub fn lifted_point(&self, xi: &[f64]) -> HullPoint {
        let mut pt = HullPoint {
            xi: xi.to_vec(),
            bar: Vec::new(),
            hat: Vec::new(),
            lambda: Vec::new(),
        };
        for (k, pv) in self.vertices.params.iter().enumerate() {
            pt.bar.push(lift_continuous_unchecked(xi[k], &pv.breakpoints));
            pt.hat.push(lift_binary_unchecked(xi[k], &pv.breakpoints));
            pt.lambda.push(pv.weights_for(xi[k]));
        }
        pt
    }

    fn value(&self, pt: &HullPoint, v: HullVar) -> f64 {
        match v {
            HullVar::Xi(k) => pt.xi[k],
            HullVar::Bar(k, j) => pt.bar[k][j],
            HullVar::Hat(k, j) => pt.hat[k][j],
            HullVar::Lambda(k, l) => pt.lambda[k][l],
        }
    }

    /// Largest violation of any row at `pt` with `y(stage, q)` supplying the
    /// binary values.
    pub fn max_violation(&self, pt: &HullPoint, y: &dyn Fn(usize, usize) -> f64) -> f64 {
        let mut worst: f64 = 0.0;
        for lam in &pt.lambda {
            for &l in lam {
                worst = worst.max(-l);
            }
        }
        for row in &self.rows {
            let lhs: f64 = row.terms.iter().map(|&(v, c)| c * self.value(pt, v)).sum();
            let rhs = row.rhs + row.y_terms.iter().map(|&(s, q, c)| c * y(s, q)).sum::<f64>();
            let viol = match row.sense {
                Sense::Le => lhs - rhs,
                Sense::Ge => rhs - lhs,
                Sense::Eq => (lhs - rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    /// Builds the hull LP with `y` bound to affine expressions of hull
    /// columns. Returns the model and the column of each hull variable.
    pub fn to_model(&self, y: &dyn Fn(usize, usize) -> HullAffine) -> (MilpModel, HashMap<HullVar, VarId>) {
        let mut m = MilpModel::new(format!("hull_stage{}", self.stage));
        let mut cols = HashMap::new();
        for (k, pv) in self.vertices.params.iter().enumerate() {
            let p = pv.param;
            cols.insert(HullVar::Xi(k), m.free(format!("xi[{p}]")));
            for j in 0..pv.r() {
                cols.insert(HullVar::Bar(k, j), m.free(format!("bar[{p},{}]", j + 1)));
            }
            for j in 0..pv.g() {
                cols.insert(HullVar::Hat(k, j), m.free(format!("hat[{p},{}]", j + 1)));
            }
            for l in 0..pv.vertices.len() {
                cols.insert(HullVar::Lambda(k, l), m.continuous(format!("lambda[{p},{}]", l + 1), 0.0, f64::INFINITY));
            }
        }
        for row in &self.rows {
            let mut e = LinExpr::new();
            for &(v, c) in &row.terms {
                e.add(cols[&v], c);
            }
            for &(s, q, c) in &row.y_terms {
                let b = y(s, q);
                e.add_constant(-c * b.constant);
                for &(v, d) in &b.terms {
                    e.add(cols[&v], -c * d);
                }
            }
            m.add_row(row.name.clone(), &e, row.sense, row.rhs);
        }
        (m, cols)
    }
}

/// Optimizes an affine objective over the hull with `y` bound by the caller.
pub fn optimize_over_hull(
    sys: &HullSystem,
    y: &dyn Fn(usize, usize) -> HullAffine,
    objective: &HullAffine,
    maximize: bool,
) -> Result<HullOptimum, UncertaintyError> {
    let (mut m, cols) = sys.to_model(y);
    let sign = if maximize { -1.0 } else { 1.0 };
    let mut obj = LinExpr::new();
    for &(v, c) in &objective.terms {
        obj.add(cols[&v], sign * c);
    }
    m.set_objective(&obj);
    let opts = SolveOptions {
        gap: 0.0,
        polish: false,
        ..SolveOptions::default()
    };
    let rep = milp::solve(&m, &opts).map_err(|e| UncertaintyError::Lp(e.to_string()))?;
    let mut out = HullOptimum {
        status: rep.status,
        value: None,
        xi: Vec::new(),
        bar: Vec::new(),
        hat: Vec::new(),
    };
    match (rep.status, rep.solution.as_ref()) {
        (SolveStatus::Optimal, Some(x)) => {
            let val = |v: HullVar| x[cols[&v].0];
            out.value = Some(objective.constant + objective.terms.iter().map(|&(v, c)| c * val(v)).sum::<f64>());
            for (k, pv) in sys.vertices.params.iter().enumerate() {
                out.xi.push(val(HullVar::Xi(k)));
                out.bar.push((0..pv.r()).map(|j| val(HullVar::Bar(k, j))).collect());
                out.hat.push((0..pv.g()).map(|j| val(HullVar::Hat(k, j))).collect());
            }
            Ok(out)
        }
        (SolveStatus::Infeasible, _) => Ok(out),
        (s, _) => Err(UncertaintyError::Lp(format!("unexpected status {s:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::super::{SetStage, Support};
    use super::*;

    fn one_param(bp: &[f64]) -> (DduSet, Breakpoints) {
        let set = DduSet {
            support: vec![vec![Support::new(1.0, 1.0)], vec![Support::new(0.0, 10.0)]],
            stages: vec![SetStage {
                stage: 2,
                w: vec![vec![0.0, 1.0]],
                u: vec![vec![vec![10.0]]],
                row_names: vec![],
            }],
        };
        let mut b = Breakpoints::none(&set);
        b.set(ParamId::new(2, 1), bp.to_vec());
        (set, b)
    }

    #[test]
    fn counts_for_two_pieces() {
        let (set, bp) = one_param(&[4.0]);
        let sys = build_hull_system(&set, &bp, 2).unwrap();
        let k = sys.position(ParamId::new(2, 1)).unwrap();
        let lambdas = (0..4).filter(|&l| sys.rows.iter().any(|r| r.terms.iter().any(|t| t.0 == HullVar::Lambda(k, l)))).count();
        assert_eq!(lambdas, 4);
        let simplex = sys.rows.iter().filter(|r| r.name == "simplex[(2,1)]").count();
        let mixing = sys.rows.iter().filter(|r| r.name.starts_with("mix_") && r.name.contains("(2,1)")).count();
        assert_eq!((simplex, mixing), (1, 4));
    }

    #[test]
    fn y_fixes_rhs() {
        let (set, bp) = one_param(&[4.0]);
        let sys = build_hull_system(&set, &bp, 2).unwrap();
        let k = sys.position(ParamId::new(2, 1)).unwrap();
        let obj = HullAffine::term(HullVar::Xi(k), 1.0);
        let on = optimize_over_hull(&sys, &|_, _| HullAffine::constant(0.5), &obj, true).unwrap();
        assert!((on.value.unwrap() - 5.0).abs() < 1e-7);
        let off = optimize_over_hull(&sys, &|_, _| HullAffine::constant(-0.1), &obj, true).unwrap();
        assert_eq!(off.status, SolveStatus::Infeasible);
    }

    #[test]
    fn lifted_points_satisfy_rows() {
        let (set, bp) = one_param(&[3.0, 7.0]);
        let sys = build_hull_system(&set, &bp, 2).unwrap();
        for x in [0.0, 2.5, 3.0, 6.9, 7.0, 10.0] {
            let pt = sys.lifted_point(&[1.0, x]);
            assert!(sys.max_violation(&pt, &|_, _| 1.0) < 1e-12, "x = {x}");
        }
    }
}
