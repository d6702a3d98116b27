//! Modelling, simulation and fitting of ODMR spectra from NV-centre ensembles.

// `!(x > 0.0)` style checks are meant to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod fitting;
pub mod io;
pub mod lineshape;
pub mod numeric;
pub mod presets;
pub mod sensitivity;
pub mod spin;

pub use error::{Error, Result};
