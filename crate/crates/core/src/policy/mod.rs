//! Decision-rule coefficients and their evaluation.

mod admissibility;
mod evaluate;

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problem::{zeros, Matrix, MultistageProblem, ParamId, StageStructure};
use crate::uncertainty::{Breakpoints, HullAffine, HullSystem, HullVar, Support, UncertaintyError};

pub use admissibility::{check_binary_admissibility, AdmissibilityIssue, AdmissibilityReport};
pub use evaluate::{evaluate_policy, Trajectory};

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error(transparent)]
    Uncertainty(#[from] UncertaintyError),
    #[error("stage {stage} has no rule block for parameter {param}")]
    MissingBlock { stage: usize, param: ParamId },
    #[error("stage {0} is not a recourse stage of this policy")]
    UnknownStage(usize),
    #[error("trajectory has no value for parameter {0}")]
    MissingValue(ParamId),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Which parameters each stage's rules may depend on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoStructure {
    /// `window[t-1]`: how many earlier stages a stage-`t` rule may look back;
    /// `None` is the full history.
    pub window: Vec<Option<usize>>,
    /// `(stage, parameter)` pairs forced out of the rules.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mask: Vec<(usize, ParamId)>,
}

impl InfoStructure {
    pub fn full(stages: usize) -> Self {
        Self {
            window: vec![None; stages],
            mask: Vec::new(),
        }
    }

    pub fn uniform(stages: usize, window: Option<usize>) -> Self {
        Self {
            window: vec![window; stages],
            mask: Vec::new(),
        }
    }

    pub fn per_stage(window: Vec<Option<usize>>) -> Self {
        Self { window, mask: Vec::new() }
    }

    /// Whether a stage-`t` rule has a block for `p`. The constant is always
    /// available.
    pub fn admits(&self, t: usize, p: ParamId) -> bool {
        if p.is_constant() {
            return true;
        }
        if p.stage < 2 || p.stage > t {
            return false;
        }
        if let Some(Some(d)) = self.window.get(t - 1) {
            if p.stage + d < t {
                return false;
            }
        }
        !self.mask.contains(&(t, p))
    }

    pub fn admitted(&self, structure: &StageStructure, t: usize) -> Vec<ParamId> {
        structure
            .params_upto(t)
            .into_iter()
            .filter(|&p| self.admits(t, p))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecourseMode {
    /// Binary recourse decisions are fixed here and now.
    Continuous,
    /// Binary recourse decisions follow piecewise-constant rules.
    Mixed,
}

impl RecourseMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "continuous" => Some(Self::Continuous),
            "mixed" => Some(Self::Mixed),
            _ => None,
        }
    }
}

/// Which coefficient groups of one rule block are free decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleShape {
    pub param: ParamId,
    pub r: usize,
    pub g: usize,
    /// Jump coefficients of continuous rules. Without breakpoints the
    /// indicator is identically 1 and duplicates the constant column.
    pub xhat: bool,
    /// Binary rule coefficients.
    pub yhat: bool,
}

/// Rule blocks of stage `t` in parameter order.
pub fn rule_shapes(
    structure: &StageStructure,
    bp: &Breakpoints,
    info: &InfoStructure,
    mode: RecourseMode,
    t: usize,
) -> Vec<RuleShape> {
    info.admitted(structure, t)
        .into_iter()
        .map(|p| {
            let r = bp.r(p);
            RuleShape {
                param: p,
                r,
                g: bp.g(p),
                xhat: r > 1,
                yhat: p.is_constant() || (mode == RecourseMode::Mixed && r > 1),
            }
        })
        .collect()
}

/// True when the binaries of a stage only have a constant column, so each
/// is a plain here-and-now binary.
pub fn binaries_constant_only(shapes: &[RuleShape]) -> bool {
    shapes.iter().all(|s| s.param.is_constant() || !s.yhat)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleBlock {
    pub param: ParamId,
    /// `P_t x r`
    pub xbar: Matrix,
    /// `P_t x g`
    pub xhat: Matrix,
    /// `Q_t x g`; the binary coefficient is `ydot - yddot`.
    pub ydot: Matrix,
    pub yddot: Matrix,
}

impl RuleBlock {
    pub fn zeros(param: ParamId, p: usize, q: usize, r: usize, g: usize) -> Self {
        Self {
            param,
            xbar: zeros(p, r),
            xhat: zeros(p, g),
            ydot: zeros(q, g),
            yddot: zeros(q, g),
        }
    }

    pub fn yhat(&self, q: usize, j: usize) -> f64 {
        self.ydot[q][j] - self.yddot[q][j]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StagePolicy {
    pub stage: usize,
    pub continuous: usize,
    pub binaries: usize,
    pub blocks: Vec<RuleBlock>,
}

impl StagePolicy {
    pub fn block(&self, p: ParamId) -> Option<&RuleBlock> {
        self.blocks.iter().find(|b| b.param == p)
    }

    pub fn block_mut(&mut self, p: ParamId) -> Option<&mut RuleBlock> {
        self.blocks.iter_mut().find(|b| b.param == p)
    }
}

/// Rules for every recourse stage, self-contained for evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyCoefficients {
    pub info: InfoStructure,
    pub support: Vec<Vec<Support>>,
    pub breakpoints: Breakpoints,
    /// Stages `2..=T`.
    pub stages: Vec<StagePolicy>,
}

impl PolicyCoefficients {
    /// All-zero rules with a block for every admitted parameter.
    pub fn zeros(problem: &MultistageProblem, info: &InfoStructure) -> Self {
        let st = &problem.structure;
        let bp = &problem.breakpoints;
        let stages = (2..=st.num_stages())
            .map(|t| StagePolicy {
                stage: t,
                continuous: st.p(t),
                binaries: st.q(t),
                blocks: info
                    .admitted(st, t)
                    .into_iter()
                    .map(|p| RuleBlock::zeros(p, st.p(t), st.q(t), bp.r(p), bp.g(p)))
                    .collect(),
            })
            .collect();
        Self {
            info: info.clone(),
            support: problem.uncertainty.support.clone(),
            breakpoints: problem.breakpoints.clone(),
            stages,
        }
    }

    pub fn stage(&self, t: usize) -> Option<&StagePolicy> {
        self.stages.iter().find(|s| s.stage == t)
    }

    pub fn stage_mut(&mut self, t: usize) -> Option<&mut StagePolicy> {
        self.stages.iter_mut().find(|s| s.stage == t)
    }

    pub fn block_mut(&mut self, t: usize, p: ParamId) -> Option<&mut RuleBlock> {
        self.stage_mut(t).and_then(|s| s.block_mut(p))
    }

    /// Continuous decision `c` of stage `t` as an affine function of the hull
    /// columns of `sys`.
    pub fn x_affine(&self, sys: &HullSystem, t: usize, c: usize) -> HullAffine {
        let mut out = HullAffine::default();
        if let Some(sp) = self.stage(t) {
            for b in &sp.blocks {
                let Some(k) = sys.position(b.param) else { continue };
                for (j, &v) in b.xbar[c].iter().enumerate() {
                    if v != 0.0 {
                        out.terms.push((HullVar::Bar(k, j), v));
                    }
                }
                for (j, &v) in b.xhat[c].iter().enumerate() {
                    if v != 0.0 {
                        out.terms.push((HullVar::Hat(k, j), v));
                    }
                }
            }
        }
        out
    }

    /// Binary decision `q` of stage `t` as an affine function of the hull
    /// columns of `sys`.
    pub fn y_affine(&self, sys: &HullSystem, t: usize, q: usize) -> HullAffine {
        let mut out = HullAffine::default();
        if let Some(sp) = self.stage(t) {
            for b in &sp.blocks {
                let Some(k) = sys.position(b.param) else { continue };
                for j in 0..b.ydot[q].len() {
                    let v = b.yhat(q, j);
                    if v != 0.0 {
                        out.terms.push((HullVar::Hat(k, j), v));
                    }
                }
            }
        }
        out
    }
}

/// Here-and-now decisions.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FirstStageDecision {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl FirstStageDecision {
    /// `y` rounded to the nearest integer, as used for set right-hand sides.
    pub fn y_rounded(&self) -> Vec<f64> {
        self.y.iter().map(|v| v.round()).collect()
    }
}

/// Exported solution: first-stage decisions, rules and the objective they
/// were certified against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyFile {
    pub instance: String,
    pub objective: Option<f64>,
    pub first_stage: FirstStageDecision,
    pub policy: PolicyCoefficients,
}

impl PolicyFile {
    pub fn save(&self, path: &Path) -> Result<(), PolicyError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        std::fs::write(path, s)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, PolicyError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_admission() {
        let info = InfoStructure::per_stage(vec![None, Some(0), Some(1), None]);
        assert!(info.admits(2, ParamId::CONSTANT));
        assert!(info.admits(2, ParamId::new(2, 3)));
        assert!(!info.admits(2, ParamId::new(3, 1)));
        assert!(info.admits(3, ParamId::new(2, 1)));
        assert!(info.admits(3, ParamId::new(3, 1)));
        assert!(info.admits(4, ParamId::new(2, 1)));
        let narrow = InfoStructure::uniform(4, Some(0));
        assert!(!narrow.admits(4, ParamId::new(3, 1)));
        assert!(narrow.admits(4, ParamId::new(4, 1)));
        assert!(narrow.admits(4, ParamId::CONSTANT));
    }

    #[test]
    fn mask_removes_pair() {
        let mut info = InfoStructure::full(3);
        info.mask.push((3, ParamId::new(2, 1)));
        assert!(!info.admits(3, ParamId::new(2, 1)));
        assert!(info.admits(2, ParamId::new(2, 1)));
    }
}
