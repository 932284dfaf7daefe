//! Decision-dependent polyhedral sets, breakpoints, lifting and the lifted hull.

mod hull;
mod lifting;
mod vertices;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problem::{Matrix, ParamId};

pub use hull::{build_hull_system, optimize_over_hull, HullAffine, HullOptimum, HullRow, HullSystem, HullVar};
pub use lifting::{lift_binary, lift_continuous};
pub(crate) use lifting::{lift_binary_unchecked, lift_continuous_unchecked};
pub use vertices::{build_lifted_vertex_set, build_vertex_set, LiftedVertex, LiftedVertexSet, ParamVertices};

/// Absolute tolerance for set membership and hull feasibility checks.
pub const FEAS_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UncertaintyError {
    #[error("value {value} outside support [{min}, {max}]")]
    OutOfSupport { value: f64, min: f64, max: f64 },
    #[error("invalid breakpoints for parameter {param}: {reason}")]
    Breakpoints { param: ParamId, reason: String },
    #[error("unknown parameter {0}")]
    UnknownParam(ParamId),
    #[error("stage {0} has no uncertainty data")]
    UnknownStage(usize),
    #[error("hull LP failed: {0}")]
    Lp(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Support {
    pub min: f64,
    pub max: f64,
}

impl Support {
    pub fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.min - tol && x <= self.max + tol
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }
}

/// Rows of the uncertainty set introduced at one stage:
/// `w xi^[stage] <= sum_{s < stage} u[s-1] y_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetStage {
    pub stage: usize,
    /// One row per set constraint, one column per parameter observed up to
    /// `stage`, in observation order.
    pub w: Matrix,
    /// `u[s-1]` couples the rows to the binaries of stage `s`.
    pub u: Vec<Matrix>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub row_names: Vec<String>,
}

/// A decision-dependent uncertainty set. The set seen at stage `t` is the
/// conjunction of all rows introduced at stages `2..=t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DduSet {
    /// `support[t-1][i-1]`; stage 1 holds only the constant parameter.
    pub support: Vec<Vec<Support>>,
    pub stages: Vec<SetStage>,
}

/// One set row as seen from a later stage.
#[derive(Debug, Clone, Copy)]
pub struct SetRowRef<'a> {
    /// Stage that introduced the row.
    pub stage: usize,
    /// Row index inside that stage, 0-based.
    pub row: usize,
    pub w: &'a [f64],
    pub set: &'a SetStage,
}

impl<'a> SetRowRef<'a> {
    /// Coefficient of binary `q` (0-based) of stage `s` on the right-hand side.
    pub fn u(&self, s: usize, q: usize) -> f64 {
        self.set
            .u
            .get(s - 1)
            .and_then(|m| m.get(self.row))
            .and_then(|r| r.get(q))
            .copied()
            .unwrap_or(0.0)
    }

    /// Nonzero right-hand-side entries as `(stage, q, coef)`.
    pub fn u_terms(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (s0, m) in self.set.u.iter().enumerate() {
            if let Some(r) = m.get(self.row) {
                for (q, &c) in r.iter().enumerate() {
                    if c != 0.0 {
                        out.push((s0 + 1, q, c));
                    }
                }
            }
        }
        out
    }

    pub fn name(&self) -> String {
        self.set
            .row_names
            .get(self.row)
            .cloned()
            .unwrap_or_else(|| format!("s{}r{}", self.stage, self.row + 1))
    }
}

impl DduSet {
    pub fn num_stages(&self) -> usize {
        self.support.len()
    }

    /// Parameters observed up to stage `t`, in observation order.
    pub fn params_upto(&self, t: usize) -> Vec<ParamId> {
        let mut out = Vec::new();
        for (s0, sup) in self.support.iter().enumerate().take(t) {
            for i in 0..sup.len() {
                out.push(ParamId::new(s0 + 1, i + 1));
            }
        }
        out
    }

    /// Position of `p` inside `xi^[t]` for any `t >= p.stage`.
    pub fn position(&self, p: ParamId) -> usize {
        self.support[..p.stage - 1].iter().map(Vec::len).sum::<usize>() + p.index - 1
    }

    pub fn support_of(&self, p: ParamId) -> Result<Support, UncertaintyError> {
        self.support
            .get(p.stage.wrapping_sub(1))
            .and_then(|s| s.get(p.index.wrapping_sub(1)))
            .copied()
            .ok_or(UncertaintyError::UnknownParam(p))
    }

    pub fn stage(&self, t: usize) -> Option<&SetStage> {
        self.stages.iter().find(|s| s.stage == t)
    }

    /// Every set row active at stage `t`.
    pub fn rows_upto(&self, t: usize) -> Vec<SetRowRef<'_>> {
        let mut stages: Vec<&SetStage> = self.stages.iter().filter(|s| s.stage <= t).collect();
        stages.sort_by_key(|s| s.stage);
        let mut out = Vec::new();
        for s in stages {
            for (m, w) in s.w.iter().enumerate() {
                out.push(SetRowRef {
                    stage: s.stage,
                    row: m,
                    w,
                    set: s,
                });
            }
        }
        out
    }

    /// Membership test for `xi^[t]` given binary values per stage
    /// (`y[s-1]`), including the support box.
    pub fn contains(&self, t: usize, xi: &[f64], y: &[Vec<f64>], tol: f64) -> bool {
        let params = self.params_upto(t);
        if xi.len() != params.len() {
            return false;
        }
        for (k, p) in params.iter().enumerate() {
            match self.support_of(*p) {
                Ok(s) if s.contains(xi[k], tol) => {}
                _ => return false,
            }
        }
        self.rows_upto(t).iter().all(|r| {
            let lhs: f64 = r.w.iter().zip(xi).map(|(a, b)| a * b).sum();
            let rhs: f64 = r
                .u_terms()
                .iter()
                .map(|&(s, q, c)| c * y.get(s - 1).and_then(|v| v.get(q)).copied().unwrap_or(0.0))
                .sum();
            lhs <= rhs + tol
        })
    }
}

/// Breakpoints per parameter, `points[t-1][i-1]`, strictly increasing and
/// strictly inside the support.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Breakpoints {
    pub points: Vec<Vec<Vec<f64>>>,
}

impl Breakpoints {
    /// No breakpoints anywhere (affine rules).
    pub fn none(set: &DduSet) -> Self {
        Self {
            points: set.support.iter().map(|s| vec![Vec::new(); s.len()]).collect(),
        }
    }

    pub fn get(&self, p: ParamId) -> &[f64] {
        self.points
            .get(p.stage.wrapping_sub(1))
            .and_then(|s| s.get(p.index.wrapping_sub(1)))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn set(&mut self, p: ParamId, pts: Vec<f64>) {
        while self.points.len() < p.stage {
            self.points.push(Vec::new());
        }
        let st = &mut self.points[p.stage - 1];
        while st.len() < p.index {
            st.push(Vec::new());
        }
        st[p.index - 1] = pts;
    }

    /// Number of pieces.
    pub fn r(&self, p: ParamId) -> usize {
        self.get(p).len() + 1
    }

    /// Length of the indicator lifting.
    pub fn g(&self, p: ParamId) -> usize {
        self.get(p).len().max(1)
    }

    pub fn total(&self) -> usize {
        self.points.iter().flatten().map(Vec::len).sum()
    }

    /// Structural problems as human-readable messages; empty when valid.
    pub fn audit(&self, set: &DduSet) -> Vec<String> {
        let mut out = Vec::new();
        if self.points.len() > set.support.len() {
            out.push(format!(
                "breakpoints given for {} stages but the set has {}",
                self.points.len(),
                set.support.len()
            ));
        }
        for (s0, st) in self.points.iter().enumerate() {
            let k = set.support.get(s0).map_or(0, Vec::len);
            if st.len() > k {
                out.push(format!("stage {} lists breakpoints for {} parameters but has {k}", s0 + 1, st.len()));
            }
            for (i0, pts) in st.iter().enumerate().take(k) {
                let p = ParamId::new(s0 + 1, i0 + 1);
                if let Err(e) = check_breakpoints(p, pts, set.support[s0][i0]) {
                    out.push(e.to_string());
                }
            }
        }
        out
    }
}

pub(crate) fn check_breakpoints(p: ParamId, pts: &[f64], s: Support) -> Result<(), UncertaintyError> {
    let err = |reason: String| Err(UncertaintyError::Breakpoints { param: p, reason });
    for (j, &x) in pts.iter().enumerate() {
        if !x.is_finite() {
            return err(format!("breakpoint {} is not finite", j + 1));
        }
        if x <= s.min || x >= s.max {
            return err(format!("breakpoint {x} not strictly inside [{}, {}]", s.min, s.max));
        }
        if j > 0 && x <= pts[j - 1] {
            return err(format!("breakpoints not strictly increasing at {x}"));
        }
    }
    Ok(())
}
