//! Models for millimetre-wave overlaid ultra-dense cellular networks.
//!
//! * [`pointprocess`] samples the spatial model and its activity statistics.
//! * [`blockage`] turns building statistics into LOS distances.
//! * [`analytic_se`] evaluates the closed-form spectral efficiencies and bounds.
//! * [`allocation`] solves the uplink/downlink split with and without mmW UL decoupling.
//! * [`simulator`] estimates spectral efficiency by Monte Carlo from the SIR definitions.

// `!(x > 0.0)` is how NaN gets rejected along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocation;
pub mod analytic_se;
pub mod blockage;
pub mod error;
pub mod pointprocess;
pub mod quadrature;
pub mod rng;
pub mod simulator;

pub use error::{Error, Result};
