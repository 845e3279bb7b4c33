//! Experiment harnesses: front tracking and speed fits, comparison runs and
//! the growth-bump counterexample, the γ → ∞ study, support and wave-envelope
//! inclusions, and the obstacle-residual refinement study.

mod comparison;
mod convergence;
mod envelope;
mod front;
mod residual;
mod support;

pub use comparison::{
    comparison_counterexample, comparison_harness, ComparisonReport, CounterexampleConfig, CounterexampleReport,
};
pub use convergence::{gamma_convergence_study, GammaRow, GammaStudy};
pub use envelope::{invasion_time, lower_envelope_check, upper_envelope_check, EnvelopeReport};
pub use front::{estimate_speed, FrontTrack, FrontTracker, SpeedEstimate};
pub use residual::{max_obstacle_residual, ResidualRun};
pub use support::{support_confinement_check, SupportReport};

use thiserror::Error;

use crate::dynamics::DynamicsError;
use crate::grid::GridError;
use crate::kernel::KernelError;
use crate::waves::WaveError;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("need at least {needed} points in the fit window, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Wave(#[from] WaveError),
}
