//! Independent reference prices for the 4D engine.

pub mod crank_nicolson;
pub mod monte_carlo;

pub use crank_nicolson::{cn_domestic_spread, CnConfig};
pub use monte_carlo::{fx_martingale, mc_spread, McConfig, McEstimate, McReport};

/// Spread of a flat-hazard, constant-recovery CDS with continuous premium:
/// `λ (1 - R)`.
pub fn credit_triangle(lambda: f64, recovery: f64) -> f64 {
    lambda * (1.0 - recovery)
}
