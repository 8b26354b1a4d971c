//! Constant-gain equation-error identification of longitudinal lift, drag and
//! fuel-consumption coefficients from cruise flight-recorder data.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aero;
pub mod convergence;
pub mod error;
pub mod estimator;
pub mod fleet;
pub mod flight_data;
pub mod simgen;

pub use error::{Error, Result};
