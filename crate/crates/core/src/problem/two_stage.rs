use serde::{Deserialize, Serialize};

use super::{zeros, Blocks, FirstStageBlock, Matrix, Meta, MultistageProblem, ParamBlock, ParamId, ProblemError, StageBlock, StageDims, StageStructure};
use crate::uncertainty::{Breakpoints, DduSet, SetStage, Support};

/// One robust row `(A xi)'x + (D xi)'y + a'x2 + d'y2 <= b'xi` of a
/// two-stage problem, written per parameter: entry `k` of `a`, `d`, `b`
/// belongs to parameter `k` (the constant first).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoStageRow {
    /// `K x P`
    pub a: Matrix,
    /// `K x Q`
    pub d: Matrix,
    pub b: Vec<f64>,
    pub a_tilde: Vec<f64>,
    pub d_tilde: Vec<f64>,
}

/// Row-wise view of a problem with one recourse stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoStageView {
    pub meta: Meta,
    pub first: FirstStageBlock,
    pub p: usize,
    pub q: usize,
    pub p2: usize,
    pub q2: usize,
    pub rows: Vec<TwoStageRow>,
    #[serde(default)]
    pub row_names: Vec<String>,
    /// `M x K`, columns in parameter order with the constant first.
    pub w: Matrix,
    /// `M x Q`
    pub u: Matrix,
    #[serde(default)]
    pub set_row_names: Vec<String>,
    pub support: Vec<Support>,
    pub breakpoints: Vec<Vec<f64>>,
}

impl TwoStageView {
    /// Number of parameters including the constant.
    pub fn k(&self) -> usize {
        self.support.len()
    }

    pub fn param(&self, k: usize) -> ParamId {
        if k == 0 {
            ParamId::CONSTANT
        } else {
            ParamId::new(2, k)
        }
    }

    pub fn to_problem(&self) -> MultistageProblem {
        let kk = self.k();
        let n = self.rows.len();
        let structure = StageStructure {
            stages: vec![
                StageDims {
                    params: 1,
                    continuous: self.p,
                    binaries: self.q,
                    rows: self.first.b.len(),
                },
                StageDims {
                    params: kk - 1,
                    continuous: self.p2,
                    binaries: self.q2,
                    rows: n,
                },
            ],
        };
        let block_for = |k: usize| ParamBlock {
            a: self.rows.iter().map(|r| r.a[k].clone()).collect(),
            d: self.rows.iter().map(|r| r.d[k].clone()).collect(),
            b: self.rows.iter().map(|r| r.b[k]).collect(),
        };
        let stage = StageBlock {
            stage: 2,
            params: vec![vec![block_for(0)], (1..kk).map(block_for).collect()],
            recourse_x: vec![self.rows.iter().map(|r| r.a_tilde.clone()).collect()],
            recourse_y: vec![self.rows.iter().map(|r| r.d_tilde.clone()).collect()],
            row_names: self.row_names.clone(),
        };
        let uncertainty = DduSet {
            support: vec![vec![self.support[0]], self.support[1..].to_vec()],
            stages: vec![SetStage {
                stage: 2,
                w: self.w.clone(),
                u: vec![self.u.clone()],
                row_names: self.set_row_names.clone(),
            }],
        };
        let breakpoints = Breakpoints {
            points: vec![vec![self.breakpoints[0].clone()], self.breakpoints[1..].to_vec()],
        };
        MultistageProblem {
            meta: self.meta.clone(),
            structure,
            blocks: Blocks {
                first: self.first.clone(),
                stages: vec![stage],
            },
            uncertainty,
            breakpoints,
        }
    }
}

/// Row-wise view of a problem with exactly two stages.
pub fn as_two_stage(p: &MultistageProblem) -> Result<TwoStageView, ProblemError> {
    let tt = p.num_stages();
    if tt != 2 {
        return Err(ProblemError::NotTwoStage(tt));
    }
    let st = &p.structure;
    let params = st.params_upto(2);
    let blk = p.stage(2);
    let n = st.n(2);
    let rows = (0..n)
        .map(|r| TwoStageRow {
            a: params.iter().map(|&pp| blk.param(pp).a[r].clone()).collect(),
            d: params.iter().map(|&pp| blk.param(pp).d[r].clone()).collect(),
            b: params.iter().map(|&pp| blk.param(pp).b[r]).collect(),
            a_tilde: blk.recourse_x[0][r].clone(),
            d_tilde: blk.recourse_y[0][r].clone(),
        })
        .collect();
    let (w, u, set_row_names) = match p.uncertainty.stage(2) {
        Some(s) => (s.w.clone(), s.u[0].clone(), s.row_names.clone()),
        None => (Vec::new(), zeros(0, st.q(1)), Vec::new()),
    };
    Ok(TwoStageView {
        meta: p.meta.clone(),
        first: p.blocks.first.clone(),
        p: st.p(1),
        q: st.q(1),
        p2: st.p(2),
        q2: st.q(2),
        rows,
        row_names: blk.row_names.clone(),
        w,
        u,
        set_row_names,
        support: params.iter().map(|&pp| p.support(pp)).collect(),
        breakpoints: params.iter().map(|&pp| p.breakpoints.get(pp).to_vec()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> TwoStageView {
        TwoStageView {
            meta: Meta {
                name: "small".into(),
                ..Meta::default()
            },
            first: FirstStageBlock {
                a: vec![vec![0.0, 1.0]],
                d: vec![vec![1.0]],
                b: vec![3.0],
            },
            p: 2,
            q: 1,
            p2: 1,
            q2: 2,
            rows: vec![TwoStageRow {
                a: vec![vec![-1.0, 2.0], vec![0.5, 0.0]],
                d: vec![vec![4.0], vec![0.0]],
                b: vec![1.0, -2.0],
                a_tilde: vec![3.0],
                d_tilde: vec![1.0, -1.0],
            }],
            row_names: vec!["cost".into()],
            w: vec![vec![0.0, 1.0]],
            u: vec![vec![5.0]],
            set_row_names: vec![],
            support: vec![Support::new(1.0, 1.0), Support::new(0.0, 5.0)],
            breakpoints: vec![vec![], vec![2.5]],
        }
    }

    #[test]
    fn round_trip() {
        let v = small();
        let p = v.to_problem();
        assert!(super::super::validate_problem(&p).is_empty(), "{:?}", super::super::validate_problem(&p));
        assert_eq!(p.structure.n(2), 1);
        assert_eq!(as_two_stage(&p).unwrap(), v);
    }

    #[test]
    fn rejects_three_stages() {
        let mut p = small().to_problem();
        p.structure.stages.push(StageDims {
            params: 0,
            continuous: 0,
            binaries: 0,
            rows: 0,
        });
        assert!(matches!(as_two_stage(&p), Err(ProblemError::NotTwoStage(3))));
    }
}
