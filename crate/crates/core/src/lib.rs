//! Numerical laboratory for discrete p-modulus on metric measure graphs.

pub mod cli;
pub mod error;
pub mod generators;
pub mod geometry;
pub mod graph;
pub mod modulus;
pub mod poincare;
pub mod porosity;

pub use error::{Error, Result};
