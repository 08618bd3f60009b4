//! Optimal detection of a random walk on a graph observed in Gaussian noise,
//! and the error-exponent bounds that govern it.

pub mod bounds;
pub mod detector;
pub mod error;
pub mod graphs;
pub mod io;
pub mod ldp;
pub mod montecarlo;
pub mod rng;
pub mod sparse;
pub mod spectral;

pub use error::{Error, Result};
