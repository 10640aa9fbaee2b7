//! Quanto CDS pricing under a four-factor model with stochastic recovery,
//! foreign rate, FX rate and log-hazard, solved by an RBF-FD method of lines.
//!
//! [`pricing::quanto_basis`] is the main entry point. The [`oracles`] module
//! carries an independent 1D Crank-Nicolson solver and a Monte Carlo pricer.

pub mod cli;
pub mod error;
pub mod grid;
pub mod model;
pub mod oracles;
pub mod pde;
pub mod pricing;
pub mod rbffd;
mod sparse;

pub use error::{Error, Result};
