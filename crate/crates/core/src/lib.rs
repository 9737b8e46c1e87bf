//! Objective speech-intelligibility metrics and an evaluation harness.

pub mod error;
pub mod exec;
pub mod frontend;
pub mod harness;
pub mod metrics;
pub mod signal;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use exec::Exec;
pub use metrics::{Metric, MetricConfig, MetricScore};
