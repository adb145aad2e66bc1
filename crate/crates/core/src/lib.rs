//! Empirical Markov model of the VIX: a bounded mean-reverting factor with a
//! uniform invariant law is pushed through a polynomial fit of the
//! historical quantile function, giving closed-form Legendre-series prices
//! for futures and European options, a least-squares speed calibrator, and a
//! 3/2-model benchmark pricer for comparison.

pub mod calibrate;
pub mod diffusion;
pub mod empirical_map;
pub mod error;
pub mod legendre;
pub mod market_data;
pub mod pricer;
pub mod three_halves;

pub use error::{Error, Result};
