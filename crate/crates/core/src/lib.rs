//! Limit order book simulation driven by two stochastic liquidity agents,
//! with multi-objective indirect inference calibration.
//!
//! * [`book`] holds the order book, the modelled level window and the
//!   per-interval update map.
//! * [`stochastic`] has the sampling kernels (skew-t intensities, Cox
//!   counts, order sizes, Inverse-Wishart).
//! * [`sim`] composes both agents into a simulated trading day.
//! * [`auxiliary`] maps book states to auxiliary data and fits the GARCH(1,1)
//!   and ARIMA(0,1,1) auxiliary models.
//! * [`calibrate`] runs NSGA-II over the auxiliary-coefficient gaps.
//! * [`data`] reads and writes event and snapshot files.

// Guards of the form `!(x > 0.0)` are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops read more naturally in the numeric kernels.
#![allow(clippy::needless_range_loop)]

pub mod auxiliary;
pub mod book;
pub mod calibrate;
pub mod cli;
pub mod data;
pub mod error;
pub mod rng;
pub mod sim;
pub mod stochastic;

pub use error::{Error, Result};
