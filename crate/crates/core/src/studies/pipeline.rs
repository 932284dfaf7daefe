use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::StudyError;
use crate::milp::{BackendChoice, MilpError, MilpModel, SolveOptions, SolveReport};
use crate::policy::{check_binary_admissibility, AdmissibilityReport, FirstStageDecision, PolicyCoefficients};
use crate::problem::MultistageProblem;
use crate::reformulation::{build_manifest, extract_policy, reformulate, Manifest, ReformulationArtifacts, ReformulationConfig, ReformulationError};
use crate::verify::{inner_max_check, InnerCheck, VerifyError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Study(#[from] StudyError),
    #[error(transparent)]
    Reformulation(#[from] ReformulationError),
    #[error(transparent)]
    Milp(#[from] MilpError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub reformulation: ReformulationConfig,
    pub solve: SolveOptions,
    pub backend: BackendChoice,
    /// Run the admissibility and worst-case row checks on the incumbent.
    pub verify: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            reformulation: ReformulationConfig::default(),
            solve: SolveOptions::default(),
            backend: BackendChoice::Linked,
            verify: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub model: MilpModel,
    pub artifacts: ReformulationArtifacts,
    pub manifest: Manifest,
    pub report: SolveReport,
    pub policy: Option<PolicyCoefficients>,
    pub first: Option<FirstStageDecision>,
    pub admissibility: Option<AdmissibilityReport>,
    pub check: Option<InnerCheck>,
}

impl RunResult {
    /// Incumbent passes both the admissibility and the worst-case row checks.
    pub fn certified(&self) -> Option<bool> {
        match (&self.admissibility, &self.check) {
            (Some(a), Some(c)) => Some(a.is_admissible() && c.certified()),
            _ => None,
        }
    }
}

/// Reformulate, solve, extract and optionally verify.
pub fn run(problem: &MultistageProblem, cfg: &RunConfig) -> Result<RunResult, PipelineError> {
    let (model, artifacts) = reformulate(problem, &cfg.reformulation)?;
    let manifest = build_manifest(&model, &artifacts);
    log::info!(
        "{}: {} rows, {} columns ({} binary)",
        problem.meta.name,
        manifest.rows,
        manifest.columns,
        manifest.binaries
    );
    let report = cfg.backend.backend().solve(&model, &cfg.solve)?;
    let mut out = RunResult {
        model,
        artifacts,
        manifest,
        report,
        policy: None,
        first: None,
        admissibility: None,
        check: None,
    };
    if let Some(x) = out.report.solution.as_deref() {
        let (policy, first) = extract_policy(Some(x), &out.artifacts)?;
        if cfg.verify {
            out.admissibility = Some(check_binary_admissibility(&policy, problem, &first));
            out.check = Some(inner_max_check(problem, &first, &policy)?);
        }
        out.policy = Some(policy);
        out.first = Some(first);
    }
    Ok(out)
}
