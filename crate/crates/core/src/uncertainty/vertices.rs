use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{check_breakpoints, lift_continuous_unchecked, Breakpoints, DduSet, Support, UncertaintyError};
use crate::problem::ParamId;

/// One vertex `(v, v_bar, v_hat)` of a piece of the lifted marginal set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftedVertex {
    /// 1-based piece index.
    pub piece: usize,
    pub v: f64,
    pub bar: Vec<f64>,
    pub hat: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVertices {
    pub param: ParamId,
    pub support: Support,
    pub breakpoints: Vec<f64>,
    /// Two per piece, left endpoint first.
    pub vertices: Vec<LiftedVertex>,
}

impl ParamVertices {
    pub fn r(&self) -> usize {
        self.breakpoints.len() + 1
    }

    pub fn g(&self) -> usize {
        self.breakpoints.len().max(1)
    }

    pub fn is_constant(&self) -> bool {
        self.support.min == self.support.max
    }

    /// Convex weights on `vertices` reproducing the lifting of `xi`.
    pub fn weights_for(&self, xi: f64) -> Vec<f64> {
        let r = self.r();
        let mut lam = vec![0.0; 2 * r];
        if self.is_constant() {
            lam[0] = 1.0;
            return lam;
        }
        // the piece whose indicator pattern matches the closed-from-left lifting
        let j = self.breakpoints.iter().filter(|&&p| xi >= p).count();
        let lo = self.vertices[2 * j].v;
        let hi = self.vertices[2 * j + 1].v;
        let t = if hi > lo { ((xi - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.0 };
        lam[2 * j] = 1.0 - t;
        lam[2 * j + 1] = t;
        lam
    }
}

/// Vertices of the lifted marginal set of one parameter: both endpoints of
/// every piece, with the indicator part taken as the limit from inside the
/// piece.
pub fn build_vertex_set(bp: &[f64], support: Support) -> Result<Vec<LiftedVertex>, UncertaintyError> {
    check_breakpoints(ParamId::new(0, 0), bp, support)?;
    let r = bp.len() + 1;
    let g = bp.len().max(1);
    let mut out = Vec::with_capacity(2 * r);
    for j in 1..=r {
        let lo = if j == 1 { support.min } else { bp[j - 2] };
        let hi = if j == r { support.max } else { bp[j - 1] };
        let hat: Vec<f64> = if bp.is_empty() {
            vec![1.0]
        } else {
            (1..=g).map(|k| if k < j { 1.0 } else { 0.0 }).collect()
        };
        for v in [lo, hi] {
            out.push(LiftedVertex {
                piece: j,
                v,
                bar: lift_continuous_unchecked(v, bp),
                hat: hat.clone(),
            });
        }
    }
    Ok(out)
}

/// Vertex families for every parameter observed up to stage `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftedVertexSet {
    pub params: Vec<ParamVertices>,
}

impl LiftedVertexSet {
    pub fn get(&self, p: ParamId) -> Option<&ParamVertices> {
        self.params.iter().find(|v| v.param == p)
    }

    /// Tabular dump, one vertex per line.
    pub fn to_table(&self) -> String {
        let mut s = String::from("param\tpiece\tv\tbar\that\n");
        for pv in &self.params {
            for v in &pv.vertices {
                let _ = writeln!(s, "{}\t{}\t{}\t{:?}\t{:?}", pv.param, v.piece, v.v, v.bar, v.hat);
            }
        }
        s
    }
}

pub fn build_lifted_vertex_set(set: &DduSet, bp: &Breakpoints, t: usize) -> Result<LiftedVertexSet, UncertaintyError> {
    let mut params = Vec::new();
    for p in set.params_upto(t) {
        let support = set.support_of(p)?;
        let pts = bp.get(p);
        check_breakpoints(p, pts, support)?;
        params.push(ParamVertices {
            param: p,
            support,
            breakpoints: pts.to_vec(),
            vertices: build_vertex_set(pts, support).map_err(|e| match e {
                UncertaintyError::Breakpoints { reason, .. } => UncertaintyError::Breakpoints { param: p, reason },
                e => e,
            })?,
        });
    }
    Ok(LiftedVertexSet { params })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vx(piece: usize, v: f64, bar: &[f64], hat: &[f64]) -> LiftedVertex {
        LiftedVertex {
            piece,
            v,
            bar: bar.to_vec(),
            hat: hat.to_vec(),
        }
    }

    #[test]
    fn one_breakpoint() {
        let got = build_vertex_set(&[4.0], Support::new(0.0, 10.0)).unwrap();
        assert_eq!(
            got,
            vec![
                vx(1, 0.0, &[0.0, 0.0], &[0.0]),
                vx(1, 4.0, &[4.0, 0.0], &[0.0]),
                vx(2, 4.0, &[4.0, 0.0], &[1.0]),
                vx(2, 10.0, &[4.0, 6.0], &[1.0]),
            ]
        );
    }

    #[test]
    fn affine_and_constant() {
        let got = build_vertex_set(&[], Support::new(2.0, 7.0)).unwrap();
        assert_eq!(got, vec![vx(1, 2.0, &[2.0], &[1.0]), vx(1, 7.0, &[7.0], &[1.0])]);
        let c = build_vertex_set(&[], Support::new(1.0, 1.0)).unwrap();
        assert_eq!(c, vec![vx(1, 1.0, &[1.0], &[1.0]), vx(1, 1.0, &[1.0], &[1.0])]);
    }

    #[test]
    fn rejects_bad_breakpoints() {
        assert!(build_vertex_set(&[10.0], Support::new(0.0, 10.0)).is_err());
        assert!(build_vertex_set(&[5.0, 5.0], Support::new(0.0, 10.0)).is_err());
        assert!(build_vertex_set(&[6.0, 5.0], Support::new(0.0, 10.0)).is_err());
    }

    #[test]
    fn two_breakpoints_hat_pattern() {
        let got = build_vertex_set(&[3.0, 7.0], Support::new(0.0, 10.0)).unwrap();
        let hats: Vec<_> = got.iter().map(|v| v.hat.clone()).collect();
        assert_eq!(
            hats,
            vec![
                vec![0.0, 0.0],
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![1.0, 0.0],
                vec![1.0, 1.0],
                vec![1.0, 1.0]
            ]
        );
    }
}
