//! Constant-gain parameter update, the recursive least-squares baseline and their comparison.

mod compare;
mod config;
mod kernel;
mod run;
mod trace;

pub use compare::{compare_estimators, ComparisonReport, ComparisonRow, DISCOUNTED_LAMBDA};
pub use config::{
    Channels, ConfigEcho, EstimatorConfig, EstimatorKind, DEFAULT_P0_SCALE, DEFAULT_R_SCALE,
};
pub use kernel::{condition_spd, gain, rls_update, MAX_CONDITION};
pub use run::{cg_step, rls_step, run, run_cg_eem, run_rls, StepOutput};
pub use trace::{EstimatorTrace, RunFailure, RunMetadata, TraceStep};
