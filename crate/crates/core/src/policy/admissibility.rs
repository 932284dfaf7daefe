use serde::{Deserialize, Serialize};

use super::{FirstStageDecision, PolicyCoefficients};
use crate::problem::MultistageProblem;
use crate::uncertainty::{build_hull_system, optimize_over_hull, HullAffine, FEAS_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityIssue {
    pub stage: usize,
    pub binary: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub issues: Vec<AdmissibilityIssue>,
    /// Stages whose lifted set is empty under the given decisions; every
    /// rule is vacuously admissible there.
    pub empty_stages: Vec<usize>,
}

impl AdmissibilityReport {
    pub fn is_admissible(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Checks that every binary rule yields 0 or 1 on the lifted set.
///
/// Rule coefficients must be integral, and the range of each binary rule over
/// the lifted hull (with earlier binaries substituted by their rules) must lie
/// in `[0, 1]`. Since the indicator liftings are integral at every
/// realization, these two conditions give `y` in `{0, 1}` everywhere.
pub fn check_binary_admissibility(c: &PolicyCoefficients, problem: &MultistageProblem, first: &FirstStageDecision) -> AdmissibilityReport {
    let mut rep = AdmissibilityReport::default();
    let y1 = first.y_rounded();
    for sp in &c.stages {
        let t = sp.stage;
        for b in &sp.blocks {
            for q in 0..sp.binaries {
                for j in 0..b.ydot[q].len() {
                    let (d, dd) = (b.ydot[q][j], b.yddot[q][j]);
                    let bin = |v: f64| (v - v.round()).abs() <= FEAS_TOL && (-FEAS_TOL..=1.0 + FEAS_TOL).contains(&v);
                    if !bin(d) || !bin(dd) || d + dd > 1.0 + FEAS_TOL {
                        rep.issues.push(AdmissibilityIssue {
                            stage: t,
                            binary: q,
                            message: format!("coefficient pair ({d}, {dd}) on {} is not a signed unit", b.param),
                        });
                    }
                }
            }
        }
        if sp.binaries == 0 {
            continue;
        }
        let sys = match build_hull_system(&problem.uncertainty, &c.breakpoints, t) {
            Ok(s) => s,
            Err(e) => {
                rep.issues.push(AdmissibilityIssue {
                    stage: t,
                    binary: 0,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let bind = |s: usize, q: usize| {
            if s == 1 {
                HullAffine::constant(y1.get(q).copied().unwrap_or(0.0))
            } else {
                c.y_affine(&sys, s, q)
            }
        };
        for q in 0..sp.binaries {
            let expr = c.y_affine(&sys, t, q);
            let mut range = [0.0; 2];
            let mut empty = false;
            for (k, maximize) in [false, true].into_iter().enumerate() {
                match optimize_over_hull(&sys, &bind, &expr, maximize) {
                    Ok(o) => match o.value {
                        Some(v) => range[k] = v,
                        None => empty = true,
                    },
                    Err(e) => rep.issues.push(AdmissibilityIssue {
                        stage: t,
                        binary: q,
                        message: e.to_string(),
                    }),
                }
            }
            if empty {
                if !rep.empty_stages.contains(&t) {
                    rep.empty_stages.push(t);
                }
                break;
            }
            if range[0] < -FEAS_TOL || range[1] > 1.0 + FEAS_TOL {
                rep.issues.push(AdmissibilityIssue {
                    stage: t,
                    binary: q,
                    message: format!("rule ranges over [{}, {}]", range[0], range[1]),
                });
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::super::evaluate::tests::switching_policy;
    use super::super::RuleBlock;
    use super::*;
    use crate::problem::{ParamId, StageDims, StageStructure};
    use crate::uncertainty::SetStage;

    fn problem_for(c: &PolicyCoefficients) -> MultistageProblem {
        let structure = StageStructure {
            stages: vec![
                StageDims {
                    params: 1,
                    continuous: 1,
                    binaries: 0,
                    rows: 0,
                },
                StageDims {
                    params: 1,
                    continuous: 2,
                    binaries: 2,
                    rows: 0,
                },
            ],
        };
        let mut p = MultistageProblem::empty("ex", structure, c.support.clone());
        p.uncertainty.stages.push(SetStage {
            stage: 2,
            w: vec![],
            u: vec![vec![]],
            row_names: vec![],
        });
        p.breakpoints = c.breakpoints.clone();
        p
    }

    #[test]
    fn switching_policy_is_admissible() {
        let c = switching_policy();
        let p = problem_for(&c);
        let rep = check_binary_admissibility(&c, &p, &FirstStageDecision::default());
        assert!(rep.is_admissible(), "{rep:?}");
    }

    #[test]
    fn lone_step_is_admissible() {
        let mut c = switching_policy();
        let b = &mut c.stages[0].blocks;
        b[0] = RuleBlock::zeros(ParamId::CONSTANT, 2, 2, 1, 1);
        b[1] = RuleBlock::zeros(ParamId::new(2, 1), 2, 2, 2, 1);
        b[1].ydot[0][0] = 1.0;
        let p = problem_for(&c);
        assert!(check_binary_admissibility(&c, &p, &FirstStageDecision::default()).is_admissible());
    }

    #[test]
    fn constant_plus_step_reaches_two() {
        let mut c = switching_policy();
        let b = &mut c.stages[0].blocks;
        b[0].ydot[1][0] = 1.0;
        b[1].ydot[1][0] = 1.0;
        let p = problem_for(&c);
        let rep = check_binary_admissibility(&c, &p, &FirstStageDecision::default());
        assert_eq!(rep.issues.len(), 1);
        assert_eq!((rep.issues[0].stage, rep.issues[0].binary), (2, 1));
        assert!(rep.issues[0].message.contains("2"));
    }

    #[test]
    fn fractional_coefficient_flagged() {
        let mut c = switching_policy();
        c.stages[0].blocks[1].ydot[0][0] = 0.5;
        let p = problem_for(&c);
        assert!(!check_binary_admissibility(&c, &p, &FirstStageDecision::default()).is_admissible());
    }
}
