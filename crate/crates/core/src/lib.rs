//! Covert beamforming for movable frequency diverse arrays.
//!
//! The crate jointly optimizes antenna positions, per-antenna carrier
//! offsets and a transmit beamformer so that a legitimate receiver (Bob) gets
//! the highest rate while every warden's KL-divergence detection budget holds.
//!
//! * [`scenario`]: configuration, units, path loss.
//! * [`channel`]: steering vectors and the correlation objective.
//! * [`covertness`]: KL divergence, detection-error bound, power thresholds.
//! * [`surrogate`] and [`bsum`]: quadratic majorizers and the coordinate solver.
//! * [`beamforming`]: SDR, exact SOCP and null-space beamformers.
//! * [`orchestrator`]: the two-stage alternating driver and strategies.
//! * [`experiment`]: batch experiments writing CSV products.

pub mod beamforming;
pub mod bsum;
pub mod channel;
pub mod covertness;
mod error;
pub mod experiment;
pub mod orchestrator;
pub mod scenario;
pub mod surrogate;

pub use beamforming::{Beamformer, BeamformingProblem};
pub use channel::{ArrayLayout, ChannelVector, SamplePointSet};
pub use error::{Error, Result};
pub use orchestrator::{OptimizationReport, RunOptions, Strategy};
pub use scenario::{PolarCoordinate, ScenarioConfig};
