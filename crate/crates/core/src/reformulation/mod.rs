//! Deterministic MILP counterparts of robust problems under lifted decision
//! rules.

mod artifacts;
mod extract;
mod glover;
mod multistage;
mod rules;
mod two_stage;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::milp::MilpError;
use crate::policy::{InfoStructure, RecourseMode};
use crate::problem::{MultistageProblem, ProblemError, ValidationIssue};
use crate::uncertainty::UncertaintyError;

pub use artifacts::{build_manifest, DualFamily, Manifest, ReformulationArtifacts};
pub use extract::extract_policy;
pub use glover::{glover_linearize, Linearizer};
pub use multistage::dualize_multistage;
pub use rules::{BlockVars, PolicyVars, StageVars};
pub use two_stage::dualize_two_stage;

#[derive(Debug, Error)]
pub enum ReformulationError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("invalid problem: {}", .0.iter().map(|i| i.message.as_str()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<ValidationIssue>),
    #[error(transparent)]
    Uncertainty(#[from] UncertaintyError),
    #[error("dual {0} has no finite nonnegative bound")]
    MissingBound(String),
    #[error("no incumbent solution to extract from")]
    NoIncumbent,
    #[error("solution has {got} values, model has {expected} columns")]
    SolutionSize { got: usize, expected: usize },
    #[error(transparent)]
    Milp(#[from] MilpError),
}

/// Artificial upper bounds on dual variables that multiply binaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BigMConfig {
    pub default: f64,
    /// Overrides keyed by family name (`mu`, `psi_lo`, `psi_hi`, `phi`,
    /// `theta_lo`, `theta_hi`).
    #[serde(default)]
    pub per_family: BTreeMap<String, f64>,
}

impl Default for BigMConfig {
    fn default() -> Self {
        Self {
            default: 1e4,
            per_family: BTreeMap::new(),
        }
    }
}

impl BigMConfig {
    pub fn uniform(m: f64) -> Self {
        Self {
            default: m,
            per_family: BTreeMap::new(),
        }
    }

    pub fn for_family(&self, family: &str) -> f64 {
        self.per_family.get(family).copied().unwrap_or(self.default)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReformulationConfig {
    pub recourse: RecourseMode,
    /// Information windows; `None` takes the instance's suggestion or, when
    /// absent, full history.
    pub info: Option<InfoStructure>,
    pub big_m: BigMConfig,
}

impl Default for ReformulationConfig {
    fn default() -> Self {
        Self {
            recourse: RecourseMode::Mixed,
            info: None,
            big_m: BigMConfig::default(),
        }
    }
}

impl ReformulationConfig {
    pub fn info_for(&self, p: &MultistageProblem) -> InfoStructure {
        if let Some(i) = &self.info {
            return i.clone();
        }
        match &p.meta.delta_t {
            Some(d) => InfoStructure::per_stage(d.clone()),
            None => InfoStructure::full(p.num_stages()),
        }
    }
}

/// Both dualization paths start from a validated problem.
pub(crate) fn ensure_valid(p: &MultistageProblem) -> Result<(), ReformulationError> {
    let issues = crate::problem::validate_problem(p);
    if issues.is_empty() {
        Ok(())
    } else {
        Err(ReformulationError::Invalid(issues))
    }
}

/// Dualizes with the two-stage code path when the problem has two stages and
/// with the multistage path otherwise.
pub fn reformulate(
    p: &MultistageProblem,
    cfg: &ReformulationConfig,
) -> Result<(crate::milp::MilpModel, ReformulationArtifacts), ReformulationError> {
    if p.num_stages() == 2 {
        dualize_two_stage(p, cfg)
    } else {
        dualize_multistage(p, cfg)
    }
}
