//! Discrete-event Monte Carlo and counting statistics for gated two-channel
//! Bell-CHSH experiments.
//!
//! A rotating multi-facet mirror sweeps both photon paths across their slits
//! in phase, so source and detectors are optically connected only during a
//! short periodic window. This crate holds everything that does not touch the
//! filesystem:
//!
//! - [`apparatus`]: bench parameters and the closed-form gate geometry
//! - [`source`]: pair emission and the pluggable correlation models
//! - [`gating`]: fiber transport and the shared mirror gate
//! - [`detection`]: detector efficiency, dark counts and coincidence matching
//! - [`analysis`]: dark subtraction, degradation ratios, CHSH with error propagation
//! - [`causality`]: timing analysis of a hypothetical detector-to-source influence
//! - [`runner`]: end-to-end simulated experiments
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
// `!(x > 0.0)` rejects NaN along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod apparatus;
pub mod causality;
pub mod detection;
pub mod gating;
mod math;
pub mod rng;
pub mod runner;
pub mod source;

pub use analysis::{ChshResult, Correlation, CountTable16};
pub use apparatus::{ApparatusConfig, ConfigError, GateGeometry};
pub use causality::{CausalityReport, ResonanceInterval};
pub use detection::{CountRecord, DetectorConfig};
pub use gating::{Arm, ArrivalEvent, GateState};
pub use runner::{ExperimentOutcome, RunPlan};
pub use source::{CorrelationModel, InfluenceSpeed, PairEvent, SignConvention};
