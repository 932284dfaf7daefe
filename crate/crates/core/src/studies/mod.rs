//! Case-study instances: flexible production design and multiperiod
//! production planning, plus breakpoint heuristics.

mod breakpoints;
mod design;
mod pipeline;
mod planning;
pub mod reproduce;

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use breakpoints::{
    case_b_breakpoints, equidistant_breakpoints, equidistant_points, tailored_breakpoints, tailored_demand_points,
};
pub use design::{build_design_problem, DesignCase, DesignData, DesignUnit, SetVariant};
pub use pipeline::{run, PipelineError, RunConfig, RunResult};
pub use planning::{build_planning_problem, planning_info, PlanningData, PlanningPeriod, PlanningUnit};

const DESIGN_3UNIT: &str = include_str!("../../data/design_3unit.json");
const DESIGN_8UNIT: &str = include_str!("../../data/design_8unit.json");
const PLANNING: &str = include_str!("../../data/planning.json");

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("invalid data: {0}")]
    Data(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("unknown built-in data set `{0}`")]
    Unknown(String),
}

/// Names of the data sets shipped with the crate.
pub const BUILTIN: [&str; 3] = ["design-3unit", "design-8unit", "planning"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StudyData {
    Design(DesignData),
    Planning(PlanningData),
}

impl StudyData {
    pub fn builtin(name: &str) -> Result<Self, StudyError> {
        match name {
            "design-3unit" => Ok(Self::Design(serde_json::from_str(DESIGN_3UNIT)?)),
            "design-8unit" => Ok(Self::Design(serde_json::from_str(DESIGN_8UNIT)?)),
            "planning" => Ok(Self::Planning(serde_json::from_str(PLANNING)?)),
            _ => Err(StudyError::Unknown(name.to_string())),
        }
    }

    pub fn load(path: &Path) -> Result<Self, StudyError> {
        let text = std::fs::read_to_string(path)?;
        let v: serde_json::Value = serde_json::from_str(&text)?;
        if v.get("periods").is_some() {
            Ok(Self::Planning(serde_json::from_value(v)?))
        } else {
            Ok(Self::Design(serde_json::from_value(v)?))
        }
    }

    /// A built-in name or a path to a data file.
    pub fn resolve(name_or_path: &str) -> Result<Self, StudyError> {
        if BUILTIN.contains(&name_or_path) {
            Self::builtin(name_or_path)
        } else {
            Self::load(Path::new(name_or_path))
        }
    }
}

impl DesignData {
    pub fn three_unit() -> Self {
        serde_json::from_str(DESIGN_3UNIT).expect("bundled design data parses")
    }

    pub fn eight_unit() -> Self {
        serde_json::from_str(DESIGN_8UNIT).expect("bundled design data parses")
    }
}

impl PlanningData {
    pub fn bundled() -> Self {
        serde_json::from_str(PLANNING).expect("bundled planning data parses")
    }
}
