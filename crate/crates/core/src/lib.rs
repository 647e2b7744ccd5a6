//! Kernel drift fields, friction-scheduled drift dynamics and their checks.
//!
//! The crate is organised bottom-up: [`kernel`] holds radial kernels and
//! single-measure drifts, [`drift`] combines attraction and repulsion over
//! sample batches, [`surrogate`] iterates the scalar two-particle model,
//! [`schedule`] defines friction schedules, [`identifiability`] scans for
//! vanishing drifts, and [`toy`] trains a 2D generator.

pub mod bounds;
pub mod drift;
pub mod error;
pub mod identifiability;
pub mod kernel;
pub mod numeric;
pub mod rng;
pub mod schedule;
pub mod surrogate;
pub mod toy;

pub use drift::{drift, drift_batch, friction_scaled_drift, DriftConfig, SampleRole, SampleSet};
pub use error::{Error, Result};
pub use kernel::{DiscreteMeasure, Kernel, KernelFamily, Point};
pub use schedule::{Schedule, ScheduleKind};
pub use surrogate::{run_trajectory, SurrogateParams, TrajectoryRecord};
