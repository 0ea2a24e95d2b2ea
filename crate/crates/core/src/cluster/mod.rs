//! Simulated cluster: rank layout, halo traffic, fault injection and the
//! recovery driver.

mod config;
pub mod halo;
mod report;
mod sim;

use thiserror::Error;

pub use config::{Architecture, ClusterConfig, FaultEvent, FaultPhase, FaultPlan};
pub use report::{Event, RecoveryCapture, RunReport, RunStatus};
pub use sim::simulate;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid cluster configuration: {0}")]
    Config(String),
    #[error("invalid fault plan: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Solver(#[from] crate::pcg::PcgError),
    #[error(transparent)]
    Store(#[from] crate::pstore::PstoreError),
}
