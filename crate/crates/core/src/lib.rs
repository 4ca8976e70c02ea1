//! GDoF-optimal treating-interference-as-noise (TIN) for K-user interference networks:
//! the achievable region, minimum-power allocation, power control, scheduling and
//! a system-level simulator.

pub mod cli;
pub mod error;
pub mod exec;
pub mod fixtures;
pub mod matching;
pub mod model;
pub mod optimize;
pub mod power;
pub mod region;
pub mod schedule;
pub mod sim;

pub use error::{Error, Result};
pub use model::{ChannelMatrix, GdofTuple, PhysicalNetwork, PowerAlloc};
