use serde::{Deserialize, Serialize};

use crate::milp::{LinExpr, MilpModel, Sense, VarId};
use crate::policy::{binaries_constant_only, rule_shapes, InfoStructure, RecourseMode, RuleShape};
use crate::problem::{MultistageProblem, ParamId};
use crate::uncertainty::LiftedVertex;

/// Model columns of one rule block. Absent groups are empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockVars {
    pub shape: RuleShape,
    pub xbar: Vec<Vec<VarId>>,
    pub xhat: Vec<Vec<VarId>>,
    pub ydot: Vec<Vec<VarId>>,
    /// Empty when the stage's binaries are plain here-and-now binaries.
    pub yddot: Vec<Vec<VarId>>,
}

impl BlockVars {
    pub fn param(&self) -> ParamId {
        self.shape.param
    }

    /// `sum_c coef[c] (Xbar_c . bar + Xhat_c . hat)` added to `e` times `scale`.
    pub fn add_x(&self, e: &mut LinExpr, coef: &[f64], v: &LiftedVertex, scale: f64) {
        for (c, &a) in coef.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in v.bar.iter().enumerate() {
                if b != 0.0 {
                    e.add(self.xbar[c][j], scale * a * b);
                }
            }
            if let Some(row) = self.xhat.get(c) {
                for (j, &h) in v.hat.iter().enumerate() {
                    if h != 0.0 {
                        e.add(row[j], scale * a * h);
                    }
                }
            }
        }
    }

    /// `sum_q coef[q] Yhat_q . hat` added to `e` times `scale`.
    pub fn add_y(&self, e: &mut LinExpr, coef: &[f64], v: &LiftedVertex, scale: f64) {
        for (q, &a) in coef.iter().enumerate() {
            if a != 0.0 {
                self.add_y_single(e, q, v, scale * a);
            }
        }
    }

    pub fn add_y_single(&self, e: &mut LinExpr, q: usize, v: &LiftedVertex, scale: f64) {
        let Some(row) = self.ydot.get(q) else { return };
        for (j, &h) in v.hat.iter().enumerate() {
            if h == 0.0 {
                continue;
            }
            e.add(row[j], scale * h);
            if let Some(dd) = self.yddot.get(q) {
                e.add(dd[j], -scale * h);
            }
        }
    }

    /// `(binary column, sign)` pairs forming coefficient `(q, j)`.
    pub fn y_parts(&self, q: usize, j: usize) -> Vec<(VarId, f64)> {
        let mut out = Vec::new();
        if let Some(row) = self.ydot.get(q) {
            out.push((row[j], 1.0));
        }
        if let Some(row) = self.yddot.get(q) {
            out.push((row[j], -1.0));
        }
        out
    }

    pub fn has_y(&self) -> bool {
        !self.ydot.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageVars {
    pub stage: usize,
    pub continuous: usize,
    pub binaries: usize,
    /// Binaries carry only a constant column and are ordinary binaries.
    pub constant_only: bool,
    pub blocks: Vec<BlockVars>,
}

impl StageVars {
    pub fn block(&self, p: ParamId) -> Option<&BlockVars> {
        self.blocks.iter().find(|b| b.param() == p)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PolicyVars {
    pub stages: Vec<StageVars>,
}

impl PolicyVars {
    pub fn stage(&self, t: usize) -> &StageVars {
        &self.stages[t - 2]
    }

    /// Creates rule columns for stages `2..=T` and the rows keeping each
    /// signed binary coefficient in `{-1, 0, 1}`.
    pub fn create(model: &mut MilpModel, p: &MultistageProblem, info: &InfoStructure, mode: RecourseMode) -> Self {
        let st = &p.structure;
        let mut stages = Vec::new();
        for t in 2..=st.num_stages() {
            let shapes = rule_shapes(st, &p.breakpoints, info, mode, t);
            let constant_only = binaries_constant_only(&shapes);
            let (np, nq) = (st.p(t), st.q(t));
            let mut blocks = Vec::new();
            for shape in shapes {
                let pid = shape.param;
                let tag = |c: usize, j: usize| format!("{t},{},{},{},{}", pid.stage, pid.index, c + 1, j + 1);
                let xbar = (0..np)
                    .map(|c| (0..shape.r).map(|j| model.free(format!("Xbar[{}]", tag(c, j)))).collect())
                    .collect();
                let xhat = if shape.xhat {
                    (0..np)
                        .map(|c| (0..shape.g).map(|j| model.free(format!("Xhat[{}]", tag(c, j)))).collect())
                        .collect()
                } else {
                    Vec::new()
                };
                let (mut ydot, mut yddot) = (Vec::new(), Vec::new());
                if shape.yhat && nq > 0 {
                    if constant_only {
                        ydot = (0..nq).map(|q| vec![model.binary(format!("Y[{t},{}]", q + 1))]).collect();
                    } else {
                        for q in 0..nq {
                            let mut a = Vec::new();
                            let mut b = Vec::new();
                            for j in 0..shape.g {
                                let d = model.binary(format!("Ydot[{}]", tag(q, j)));
                                let dd = model.binary(format!("Yddot[{}]", tag(q, j)));
                                let mut e = LinExpr::term(d, 1.0);
                                e.add(dd, 1.0);
                                model.add_row(format!("sym[{}]", tag(q, j)), &e, Sense::Le, 1.0);
                                a.push(d);
                                b.push(dd);
                            }
                            ydot.push(a);
                            yddot.push(b);
                        }
                    }
                }
                blocks.push(BlockVars {
                    shape,
                    xbar,
                    xhat,
                    ydot,
                    yddot,
                });
            }
            stages.push(StageVars {
                stage: t,
                continuous: np,
                binaries: nq,
                constant_only,
                blocks,
            });
        }
        Self { stages }
    }
}
