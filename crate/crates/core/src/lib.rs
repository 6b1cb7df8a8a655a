//! Numerical workbench for nonlinear gauge transformations of Dirac spinors.

pub mod error;
pub mod expr;
pub mod fields;
pub mod gamma;
pub mod nlde;
pub mod report;
pub mod suite;
pub mod transforms;

pub use error::{GaugeError, Result};
