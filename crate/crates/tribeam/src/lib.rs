//! Symmetric three-beam Gaussian states: invariants, entanglement and steering
//! measures, GHZ/W comparison, and a simulated photon-counting pipeline that
//! estimates the invariants from intensity moments.

pub mod analysis;
pub mod correlations;
pub mod error;
pub mod ghzw;
pub mod model;
pub mod photonics;
pub mod series;

pub use error::{Error, Result, Warning};
