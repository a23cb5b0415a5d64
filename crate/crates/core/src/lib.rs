//! Simulation of time-local quantum master equations and evaluation of
//! non-Markovianity witnesses and measures for finite-dimensional systems.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod measures;
pub mod operator;
mod par;
pub mod pipeline;
pub mod witness;

pub use error::{Error, Result};
