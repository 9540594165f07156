//! File formats, experiment plans and the CLI behind `soar`.

pub mod config;
pub mod error;
pub mod params;
pub mod plan;
pub mod report;
pub mod scenario;
pub mod telemetry;

pub use config::SimConfig;
pub use error::{Result, SimError};
pub use plan::Plan;
