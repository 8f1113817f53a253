//! Compiler pipeline for mapping spiking neural networks onto tile-based
//! crossbar hardware: fan-in unrolling, spike-traffic-aware partitioning,
//! swarm-based placement and interconnect simulation.

pub mod cluster;
pub mod cost;
pub mod decompose;
pub mod error;
pub mod generate;
pub mod model;
pub mod pipeline;
pub mod place;

pub use error::{Error, InfeasibleError, Result, ValidationError};
