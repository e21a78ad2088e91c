//! Channel-occupancy model of two co-located cells where overlap-area users
//! may offload onto the second cell, with a Monte Carlo cross-check.

pub mod chain;
pub mod error;
pub mod frame;
pub mod kinetics;
pub mod metrics;
pub mod rach;
pub mod radio;
pub mod scenario;
pub mod simulator;
pub mod studio;

pub use error::{Error, Result};
