//! Inhomogeneous incompressible flows with odd viscosity in two dimensions.

pub mod error;
pub mod app;
pub mod config;
pub mod evolve;
pub mod field;
pub mod io;
pub mod quadrature;
pub mod stationary;
pub mod symmetric;
pub mod viscosity;

pub use error::{Error, Result};
