//! Weighted sum-GDoF maximization and power control.

pub mod dgp;
pub mod gp;
pub mod lp;
pub mod pipeline;

pub use dgp::{decentralized_gp, DgpConfig, DgpResult, StepSchedule};
pub use gp::{gp_gdof_equivalence_gap, gp_power_control, GpSolution};
pub use lp::{max_weighted_gdof_exact, max_weighted_gdof_lp};
pub use pipeline::{gp_then_assignment, PipelineResult};
