//! Signal elicitation from observer networks: exact models, the elicitation mechanism, and
//! verification tools for its equilibrium, location and bandwidth results.

pub mod bandwidth;
pub mod cli;
pub mod equilibrium;
pub mod error;
pub mod extreal;
pub mod location;
pub mod model;
pub mod random;
pub mod scenario;
pub mod rational;
pub mod mechanism;
pub mod scoring;
pub mod strategy;

pub use error::{Error, Result};
