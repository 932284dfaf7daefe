use std::path::Path;

use super::{validate_problem, MultistageProblem, ProblemError};

/// Reads and validates an instance file.
pub fn load_problem(path: &Path) -> Result<MultistageProblem, ProblemError> {
    let text = std::fs::read_to_string(path)?;
    let p: MultistageProblem = serde_json::from_str(&text)?;
    let issues = validate_problem(&p);
    if !issues.is_empty() {
        return Err(ProblemError::Invalid(issues));
    }
    Ok(p)
}

pub fn save_problem(p: &MultistageProblem, path: &Path) -> Result<(), ProblemError> {
    let mut text = serde_json::to_string_pretty(p)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

impl MultistageProblem {
    pub fn from_json(text: &str) -> Result<Self, ProblemError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem serializes")
    }
}
