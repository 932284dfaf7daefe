//! Deterministic MILP container, LP-format export and solver backends.

mod bounds;
mod highs;
mod lp_format;
mod model;
mod process;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bounds::{bound_experiment, BoundRegistry, BoundRule, BoundedDual, ProductLink};
pub use highs::HighsBackend;
pub use lp_format::{export_lp, write_lp, NameMap};
pub use model::{LinExpr, MilpModel, Row, Sense, VarId, VarKind, Variable};
pub use process::HighsCliBackend;

#[derive(Debug, Error)]
pub enum MilpError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("solver backend not available: {0}")]
    BackendMissing(String),
    #[error("solver backend failed: {0}")]
    BackendCrash(String),
    #[error("could not parse solver output: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    /// Optimal within the requested relative gap.
    Optimal,
    Infeasible,
    Unbounded,
    /// Time or other resource limit reached; an incumbent may exist.
    Limit,
}

impl SolveStatus {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(self) -> i32 {
        match self {
            SolveStatus::Optimal => 0,
            SolveStatus::Infeasible | SolveStatus::Unbounded => 2,
            SolveStatus::Limit => 3,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Relative optimality gap target.
    pub gap: f64,
    pub time_limit: Option<f64>,
    pub verbose: bool,
    /// After a MILP solve, fix the binaries at their rounded incumbent values and
    /// re-solve the remaining LP so that continuous values are basic and clean.
    pub polish: bool,
    pub threads: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            gap: 0.01,
            time_limit: None,
            verbose: false,
            polish: true,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub objective: Option<f64>,
    pub bound: Option<f64>,
    pub gap: Option<f64>,
    pub wall_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<Vec<f64>>,
    /// Names of bounded dual variables sitting within 1% of their big-M.
    #[serde(default)]
    pub boundary_active: Vec<String>,
}

impl SolveReport {
    pub fn new(status: SolveStatus, objective: Option<f64>, bound: Option<f64>, wall_time: f64) -> Self {
        Self {
            status,
            objective,
            bound,
            gap: relative_gap(objective, bound),
            wall_time,
            solution: None,
            boundary_active: Vec::new(),
        }
    }

    pub fn has_incumbent(&self) -> bool {
        self.solution.is_some()
    }

    /// Value of a variable in the incumbent.
    pub fn value(&self, v: VarId) -> Option<f64> {
        self.solution.as_ref().map(|s| s[v.0])
    }
}

/// `|incumbent - bound| / max(1, |incumbent|)` when both exist.
pub fn relative_gap(objective: Option<f64>, bound: Option<f64>) -> Option<f64> {
    match (objective, bound) {
        (Some(o), Some(b)) if o.is_finite() && b.is_finite() => Some((o - b).abs() / o.abs().max(1.0)),
        _ => None,
    }
}

/// The narrow solver contract: model in, report out.
pub trait MilpBackend {
    fn name(&self) -> String;
    fn solve(&self, model: &MilpModel, opts: &SolveOptions) -> Result<SolveReport, MilpError>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum BackendChoice {
    /// HiGHS linked into this process.
    Linked,
    /// An external `highs` executable exchanging LP and solution files.
    Executable(PathBuf),
}

impl BackendChoice {
    /// `highs` or empty selects the linked library, anything else is treated as
    /// a path to a solver executable.
    pub fn parse(s: &str) -> Self {
        match s {
            "" | "highs" | "linked" => BackendChoice::Linked,
            path => BackendChoice::Executable(PathBuf::from(path)),
        }
    }

    pub fn backend(&self) -> Box<dyn MilpBackend + Send + Sync> {
        match self {
            BackendChoice::Linked => Box::new(HighsBackend::new()),
            BackendChoice::Executable(p) => Box::new(HighsCliBackend::new(p.clone())),
        }
    }
}

/// Solves with the default linked backend.
pub fn solve(model: &MilpModel, opts: &SolveOptions) -> Result<SolveReport, MilpError> {
    HighsBackend::new().solve(model, opts)
}

/// Re-solves `model` with all binaries fixed to the rounded values in `x`.
/// Returns the polished solution, or `None` when the fixed LP fails (then the
/// caller keeps the original incumbent).
pub(crate) fn polish_with<F>(model: &MilpModel, x: &[f64], solve_lp: F) -> Option<(f64, Vec<f64>)>
where
    F: FnOnce(&MilpModel) -> Result<SolveReport, MilpError>,
{
    if model.num_binaries() == 0 {
        return None;
    }
    let mut fixed = model.clone();
    for (v, &xv) in fixed.vars.iter_mut().zip(x) {
        if v.kind == VarKind::Binary {
            let r = xv.round().clamp(0.0, 1.0);
            v.kind = VarKind::Continuous;
            v.lower = r;
            v.upper = r;
        }
    }
    let rep = solve_lp(&fixed).ok()?;
    if rep.status != SolveStatus::Optimal {
        return None;
    }
    let sol = rep.solution?;
    Some((rep.objective?, sol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_uses_unit_floor() {
        assert_eq!(relative_gap(Some(0.5), Some(0.0)), Some(0.5));
        assert!((relative_gap(Some(200.0), Some(198.0)).unwrap() - 0.01).abs() < 1e-15);
        assert_eq!(relative_gap(Some(1.0), None), None);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(SolveStatus::Optimal.exit_code(), 0);
        assert_eq!(SolveStatus::Infeasible.exit_code(), 2);
        assert_eq!(SolveStatus::Limit.exit_code(), 3);
    }
}
