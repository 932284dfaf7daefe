//! Independent certification of solved policies: worst-case row checks over
//! the lifted hull, scenario simulation, and closed-form Case B values.

mod closed_form;
mod inner;
mod simulate;

use thiserror::Error;

use crate::policy::PolicyError;
use crate::uncertainty::UncertaintyError;

pub use closed_form::{case_b_closed_form, ClosedForm};
pub use inner::{inner_max_check, InnerCheck, RowCheck, RowStatus};
pub use simulate::{
    scenario_grid, simulate_policy, worst_simulated_cost, GridOptions, Simulation, Violation, WorstCase,
};

/// Largest row value accepted as feasible.
pub const CERT_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Uncertainty(#[from] UncertaintyError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("parameter {param} = {value} outside support [{min}, {max}]")]
    OutOfSupport {
        param: String,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("trajectory has {got} stages, problem has {expected}")]
    Shape { got: usize, expected: usize },
    #[error("instance has no cost row")]
    NoCostRow,
}
