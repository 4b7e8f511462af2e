//! Least-restrictive collision-avoidance supervisors for a road intersection
//! shared by controlled and uncontrolled vehicles.
//!
//! Safety verification is reduced to single-machine scheduling with inserted
//! idle-times: controlled vehicles are jobs with release times, deadlines and
//! entry-dependent process times, uncontrolled vehicles reserve idle windows.
//!
//! - [`dynamics`]: vehicle model, extremal integration, interval prediction and correction.
//! - [`params`]: release times, deadlines, process times, idle-times, `θ_max`.
//! - [`exact`]: earliest schedule for a sequence and the exhaustive verifier.
//! - [`efficient`]: forbidden regions, EDD, the relaxed and approximate verifiers.
//! - [`supervisor`]: override logic, safe-input generation, sessions.
//! - [`sim`]: scenarios, closed-loop runs, brute-force oracles and benchmarks.
//!
//! The `examples/` directory has one runnable program per capability.

pub mod dynamics;
pub mod efficient;
pub mod error;
pub mod exact;
pub mod params;
pub mod sim;
pub mod supervisor;

pub use error::{Error, Result};
