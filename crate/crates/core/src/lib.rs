//! Simulation laboratory for the 3D active-observer same-different task.
//!
//! The crate is organised along the data flow of an experiment:
//!
//! - [`objectgen`] builds voxel block objects and decides congruence.
//! - [`scenario`] samples trial configurations and lays out the room.
//! - [`percept`] moves the observer and computes what a fixation sees.
//! - [`engine`] runs Cognitive Programs (methods, scripts, executive).
//! - [`tracefmt`] stores fixation/motion traces in a line-oriented format.
//! - [`miner`] recovers the operation taxonomy and method graphs from traces.
//! - [`harness`] orchestrates experiments and aggregates results.

pub mod engine;
pub mod harness;
pub mod miner;
pub mod objectgen;
pub mod percept;
pub mod rng;
pub mod scenario;
pub mod tracefmt;

/// Version token written into trace headers.
pub const FORMAT_VERSION: &str = "pesao-sim/1";

/// Engine version echoed in trace metadata.
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
