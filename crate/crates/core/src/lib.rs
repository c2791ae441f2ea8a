//! Forced-oscillation source localization from synchronized measurements.
//!
//! The pipeline regresses measured angle/speed derivatives onto a library of
//! state and sinusoidal features with sequential thresholded least squares.
//! Large sinusoidal coefficients in a machine's speed equation point at the
//! machine where the periodic forcing enters. A stochastic swing-equation
//! simulator produces ground-truth windows for testing.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod locator;
pub mod signal_prep;
pub mod simulator;
pub mod sindy;
pub mod spectrum;
pub mod types;

pub use config::PipelineConfig;
pub use error::{Error, Result};
pub use locator::locate;
pub use types::{LocationReport, MeasurementWindow};
