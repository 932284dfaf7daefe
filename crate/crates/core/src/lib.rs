//! Lifted decision-rule reformulation of multistage robust MILPs whose
//! uncertainty sets depend on binary decisions.

pub mod milp;
pub mod policy;
pub mod problem;
pub mod reformulation;
pub mod studies;
pub mod uncertainty;
pub mod verify;
