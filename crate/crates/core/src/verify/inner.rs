use serde::{Deserialize, Serialize};

use super::{VerifyError, CERT_TOL};
use crate::milp::SolveStatus;
use crate::policy::{FirstStageDecision, PolicyCoefficients};
use crate::problem::MultistageProblem;
use crate::uncertainty::{build_hull_system, optimize_over_hull, HullAffine, HullSystem, HullVar, UncertaintyError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowStatus {
    Certified,
    Violated,
    /// The hull is empty under the policy, so the row holds vacuously.
    EmptySet,
    /// The LP did not return an optimum.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowCheck {
    pub stage: usize,
    /// 0-based row index within the stage.
    pub row: usize,
    pub name: String,
    /// Worst-case left-hand side.
    pub value: Option<f64>,
    pub status: RowStatus,
    /// Maximizing realization in `xi^[stage]` order.
    pub worst_xi: Vec<f64>,
    /// Whether the maximizer's lifted components are the exact lifting of
    /// its `xi`, i.e. the binding point is a genuine realization rather than
    /// a point of the relaxation only.
    pub exact_lift: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InnerCheck {
    pub rows: Vec<RowCheck>,
    pub empty_stages: Vec<usize>,
}

impl InnerCheck {
    pub fn max_value(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.value).reduce(f64::max)
    }

    pub fn certified(&self) -> bool {
        self.rows
            .iter()
            .all(|r| matches!(r.status, RowStatus::Certified | RowStatus::EmptySet))
    }

    pub fn violated(&self) -> Vec<&RowCheck> {
        self.rows.iter().filter(|r| r.status == RowStatus::Violated).collect()
    }

    pub fn to_table(&self) -> String {
        let mut s = String::from("stage,row,name,value,status,exact_lift\n");
        for r in &self.rows {
            let v = r.value.map(|v| format!("{v:.9}")).unwrap_or_default();
            s.push_str(&format!(
                "{},{},{},{},{:?},{}\n",
                r.stage,
                r.row + 1,
                r.name,
                v,
                r.status,
                r.exact_lift
            ));
        }
        s
    }
}

/// Row `(t, n)` with the rules substituted, as an affine function of the
/// hull columns.
fn substituted_row(p: &MultistageProblem, c: &PolicyCoefficients, first: &FirstStageDecision, sys: &HullSystem, n: usize) -> HullAffine {
    let t = sys.stage;
    let blk = p.stage(t);
    let y1 = first.y_rounded();
    let mut out = HullAffine::default();
    for pid in p.structure.params_upto(t) {
        let pb = blk.param(pid);
        let f: f64 = pb.a[n].iter().zip(&first.x).map(|(a, x)| a * x).sum::<f64>()
            + pb.d[n].iter().zip(&y1).map(|(d, y)| d * y).sum::<f64>()
            - pb.b[n];
        if f != 0.0 {
            let k = sys.position(pid).expect("hull covers every observed parameter");
            out.terms.push((HullVar::Xi(k), f));
        }
    }
    for s in 2..=t {
        for (col, &a) in blk.recourse_x[s - 2][n].iter().enumerate() {
            if a != 0.0 {
                let e = c.x_affine(sys, s, col);
                out.constant += a * e.constant;
                out.terms.extend(e.terms.iter().map(|&(v, w)| (v, a * w)));
            }
        }
        for (q, &d) in blk.recourse_y[s - 2][n].iter().enumerate() {
            if d != 0.0 {
                let e = c.y_affine(sys, s, q);
                out.constant += d * e.constant;
                out.terms.extend(e.terms.iter().map(|&(v, w)| (v, d * w)));
            }
        }
    }
    out
}

/// Maximizes every robust row over the lifted hull with the policy
/// substituted. Binary rules enter the set's right-hand side as affine
/// functions of the lifted indicators; first-stage binaries are rounded.
pub fn inner_max_check(
    problem: &MultistageProblem,
    first: &FirstStageDecision,
    policy: &PolicyCoefficients,
) -> Result<InnerCheck, VerifyError> {
    let mut out = InnerCheck::default();
    let y1 = first.y_rounded();
    for t in 2..=problem.num_stages() {
        let sys = build_hull_system(&problem.uncertainty, &policy.breakpoints, t)?;
        let ybind = |s: usize, q: usize| {
            if s == 1 {
                HullAffine::constant(y1.get(q).copied().unwrap_or(0.0))
            } else {
                policy.y_affine(&sys, s, q)
            }
        };
        let mut stage_empty = false;
        for n in 0..problem.structure.n(t) {
            let obj = substituted_row(problem, policy, first, &sys, n);
            let name = problem.stage(t).row_name(n);
            let res = optimize_over_hull(&sys, &ybind, &obj, true);
            let check = match res {
                Ok(opt) if opt.status == SolveStatus::Infeasible => {
                    stage_empty = true;
                    RowCheck {
                        stage: t,
                        row: n,
                        name,
                        value: None,
                        status: RowStatus::EmptySet,
                        worst_xi: Vec::new(),
                        exact_lift: false,
                    }
                }
                Ok(opt) => {
                    let value = opt.value.expect("optimal hull LP has a value");
                    let lifted = sys.lifted_point(&opt.xi);
                    let close = |a: &[Vec<f64>], b: &[Vec<f64>]| {
                        a.iter().flatten().zip(b.iter().flatten()).all(|(u, v)| (u - v).abs() <= 1e-6)
                    };
                    RowCheck {
                        stage: t,
                        row: n,
                        name,
                        value: Some(value),
                        status: if value <= CERT_TOL {
                            RowStatus::Certified
                        } else {
                            RowStatus::Violated
                        },
                        exact_lift: close(&lifted.bar, &opt.bar) && close(&lifted.hat, &opt.hat),
                        worst_xi: opt.xi,
                    }
                }
                Err(UncertaintyError::Lp(msg)) => {
                    log::warn!("row {name} of stage {t}: {msg}");
                    RowCheck {
                        stage: t,
                        row: n,
                        name,
                        value: None,
                        status: RowStatus::Unknown,
                        worst_xi: Vec::new(),
                        exact_lift: false,
                    }
                }
                Err(e) => return Err(e.into()),
            };
            out.rows.push(check);
        }
        if stage_empty {
            out.empty_stages.push(t);
        }
    }
    Ok(out)
}
