//! Stage-indexed coefficient blocks of a multistage robust MILP.
//!
//! Every robust row of stage `t` reads
//!
//! ```text
//! sum_{t'<=t, i} xi_{t'i} (A x_1 + D y_1 - b)_{t'i} + sum_{s=2..t} (Ax_s x_s + Dy_s y_s) <= 0
//! ```
//!
//! where `x_1[0]` is the epigraph variable being minimized and `xi_{11} = 1`.

mod builder;
mod io;
mod two_stage;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::uncertainty::{Breakpoints, DduSet, Support};

pub use builder::{ProblemBuilder, RowTerms, StageSpec};
pub use io::{load_problem, save_problem};
pub use two_stage::{as_two_stage, TwoStageRow, TwoStageView};
pub use validate::{validate_problem, IssueKind, ValidationIssue};

/// Dense row-major matrix.
pub type Matrix = Vec<Vec<f64>>;

pub fn zeros(rows: usize, cols: usize) -> Matrix {
    vec![vec![0.0; cols]; rows]
}

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("problem has {0} stages, expected 2")]
    NotTwoStage(usize),
    #[error("invalid problem: {}", .0.iter().map(|i| i.message.as_str()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<ValidationIssue>),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// 1-based `(stage, index)` of an uncertain parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ParamId {
    pub stage: usize,
    pub index: usize,
}

impl ParamId {
    /// The parameter pinned to 1.
    pub const CONSTANT: ParamId = ParamId { stage: 1, index: 1 };

    pub const fn new(stage: usize, index: usize) -> Self {
        Self { stage, index }
    }

    pub fn is_constant(&self) -> bool {
        *self == Self::CONSTANT
    }
}

impl fmt::Display for ParamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.stage, self.index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageDims {
    /// Uncertain parameters observed at this stage.
    pub params: usize,
    pub continuous: usize,
    pub binaries: usize,
    /// Constraint rows of this stage's block.
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StageStructure {
    pub stages: Vec<StageDims>,
}

impl StageStructure {
    pub fn num_stages(&self) -> usize {
        self.stages.len()
    }

    pub fn dims(&self, t: usize) -> &StageDims {
        &self.stages[t - 1]
    }

    pub fn k(&self, t: usize) -> usize {
        self.dims(t).params
    }

    pub fn p(&self, t: usize) -> usize {
        self.dims(t).continuous
    }

    pub fn q(&self, t: usize) -> usize {
        self.dims(t).binaries
    }

    pub fn n(&self, t: usize) -> usize {
        self.dims(t).rows
    }

    /// Parameters observed up to stage `t` in observation order.
    pub fn params_upto(&self, t: usize) -> Vec<ParamId> {
        (1..=t)
            .flat_map(|s| (1..=self.k(s)).map(move |i| ParamId::new(s, i)))
            .collect()
    }
}

/// Coefficients of one parameter in a stage block: `xi (A x_1 + D y_1 - b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamBlock {
    pub a: Matrix,
    pub d: Matrix,
    pub b: Vec<f64>,
}

impl ParamBlock {
    pub fn zeros(n: usize, p1: usize, q1: usize) -> Self {
        Self {
            a: zeros(n, p1),
            d: zeros(n, q1),
            b: vec![0.0; n],
        }
    }

    pub fn is_zero_row(&self, n: usize) -> bool {
        self.b[n] == 0.0 && self.a[n].iter().all(|&c| c == 0.0) && self.d[n].iter().all(|&c| c == 0.0)
    }
}

/// Deterministic first-stage rows `A x_1 + D y_1 <= b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstStageBlock {
    pub a: Matrix,
    pub d: Matrix,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageBlock {
    pub stage: usize,
    /// `params[t'-1][i-1]` for every parameter observed up to this stage.
    pub params: Vec<Vec<ParamBlock>>,
    /// `recourse_x[s-2]`, rows by `P_s`, for `s = 2..=stage`.
    pub recourse_x: Vec<Matrix>,
    /// `recourse_y[s-2]`, rows by `Q_s`.
    pub recourse_y: Vec<Matrix>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub row_names: Vec<String>,
}

impl StageBlock {
    pub fn zeros(structure: &StageStructure, t: usize) -> Self {
        let n = structure.n(t);
        Self {
            stage: t,
            params: (1..=t)
                .map(|s| (0..structure.k(s)).map(|_| ParamBlock::zeros(n, structure.p(1), structure.q(1))).collect())
                .collect(),
            recourse_x: (2..=t).map(|s| zeros(n, structure.p(s))).collect(),
            recourse_y: (2..=t).map(|s| zeros(n, structure.q(s))).collect(),
            row_names: Vec::new(),
        }
    }

    pub fn param(&self, p: ParamId) -> &ParamBlock {
        &self.params[p.stage - 1][p.index - 1]
    }

    pub fn param_mut(&mut self, p: ParamId) -> &mut ParamBlock {
        &mut self.params[p.stage - 1][p.index - 1]
    }

    pub fn row_name(&self, n: usize) -> String {
        self.row_names
            .get(n)
            .cloned()
            .unwrap_or_else(|| format!("t{}n{}", self.stage, n + 1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Blocks {
    pub first: FirstStageBlock,
    /// Stages `2..=T` in order.
    pub stages: Vec<StageBlock>,
}

/// 1-based reference to a stage row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowRef {
    pub stage: usize,
    pub row: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageNames {
    #[serde(default)]
    pub params: Vec<String>,
    #[serde(default)]
    pub continuous: Vec<String>,
    #[serde(default)]
    pub binaries: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    /// Epigraph row whose activity without the objective variable is the
    /// realized cost.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_row: Option<RowRef>,
    /// Per-stage information window suggested by the instance; `None` entries
    /// mean full history.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_t: Option<Vec<Option<usize>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub names: Vec<StageNames>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultistageProblem {
    pub meta: Meta,
    #[serde(rename = "stages")]
    pub structure: StageStructure,
    pub blocks: Blocks,
    pub uncertainty: DduSet,
    pub breakpoints: Breakpoints,
}

impl MultistageProblem {
    /// An all-zero problem with the given dimensions; stage 1 gets the
    /// constant parameter.
    pub fn empty(name: &str, structure: StageStructure, supports: Vec<Vec<Support>>) -> Self {
        let n1 = structure.n(1);
        let first = FirstStageBlock {
            a: zeros(n1, structure.p(1)),
            d: zeros(n1, structure.q(1)),
            b: vec![0.0; n1],
        };
        let stages = (2..=structure.num_stages()).map(|t| StageBlock::zeros(&structure, t)).collect();
        let uncertainty = DduSet {
            support: supports,
            stages: Vec::new(),
        };
        let breakpoints = Breakpoints::none(&uncertainty);
        Self {
            meta: Meta {
                name: name.to_string(),
                ..Meta::default()
            },
            structure,
            blocks: Blocks { first, stages },
            uncertainty,
            breakpoints,
        }
    }

    pub fn num_stages(&self) -> usize {
        self.structure.num_stages()
    }

    pub fn stage(&self, t: usize) -> &StageBlock {
        &self.blocks.stages[t - 2]
    }

    pub fn stage_mut(&mut self, t: usize) -> &mut StageBlock {
        &mut self.blocks.stages[t - 2]
    }

    /// Non-constant parameters in observation order.
    pub fn uncertain_params(&self) -> Vec<ParamId> {
        self.structure
            .params_upto(self.num_stages())
            .into_iter()
            .filter(|p| !p.is_constant())
            .collect()
    }

    pub fn support(&self, p: ParamId) -> Support {
        self.uncertainty.support[p.stage - 1][p.index - 1]
    }

    pub fn names(&self, t: usize) -> StageNames {
        self.meta.names.get(t - 1).cloned().unwrap_or_default()
    }

    pub fn continuous_name(&self, t: usize, c: usize) -> String {
        self.meta
            .names
            .get(t - 1)
            .and_then(|n| n.continuous.get(c))
            .cloned()
            .unwrap_or_else(|| format!("x{t}_{}", c + 1))
    }

    pub fn binary_name(&self, t: usize, q: usize) -> String {
        self.meta
            .names
            .get(t - 1)
            .and_then(|n| n.binaries.get(q))
            .cloned()
            .unwrap_or_else(|| format!("y{t}_{}", q + 1))
    }

    pub fn param_name(&self, p: ParamId) -> String {
        self.meta
            .names
            .get(p.stage - 1)
            .and_then(|n| n.params.get(p.index - 1))
            .cloned()
            .unwrap_or_else(|| format!("xi{}_{}", p.stage, p.index))
    }

    /// Left-hand side of stage row `(t, n)` at concrete values. `xi[t'-1][i-1]`
    /// holds realizations, `x[s-1]` and `y[s-1]` the decisions of stage `s`.
    pub fn row_activity(&self, t: usize, n: usize, xi: &[Vec<f64>], x: &[Vec<f64>], y: &[Vec<f64>]) -> f64 {
        let blk = self.stage(t);
        let mut lhs = 0.0;
        for p in self.structure.params_upto(t) {
            let pb = blk.param(p);
            let f = dot(&pb.a[n], &x[0]) + dot(&pb.d[n], &y[0]) - pb.b[n];
            lhs += xi[p.stage - 1][p.index - 1] * f;
        }
        for s in 2..=t {
            lhs += dot(&blk.recourse_x[s - 2][n], &x[s - 1]) + dot(&blk.recourse_y[s - 2][n], &y[s - 1]);
        }
        lhs
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
