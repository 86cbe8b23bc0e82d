//! Monte-Carlo simulation of cell-free integrated sensing and communication
//! networks in separated and shared deployments, half and full duplex.

pub mod channel;
pub mod comm;
pub mod error;
pub mod harness;
pub mod kld;
pub mod numerics;
pub mod radar;
pub mod scenario;

pub use error::{Error, Result};
pub use scenario::{Mode, ScenarioConfig};
