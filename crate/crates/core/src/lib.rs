//! Semiclassical spectral analysis of perturbed Landau Hamiltonians.

pub mod cluster;
pub mod error;
pub mod inverse;
pub mod linalg;
pub mod potentials;
pub mod radon;
pub mod reduced;
pub mod specfun;
pub mod weyl;

pub use error::{Error, Result};
