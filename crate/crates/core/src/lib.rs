//! Numerical certificates for conformal perturbations of the round 3-sphere
//! that keep the Clifford torus minimal and make it CMC-stable with Morse
//! index one.
//!
//! Supporting modules handle conformal balancing of sphere-valued maps and the
//! conformally invariant Willmore energy of parallel tori. The verifier replays
//! the stability inequality chain on the Clifford torus.

pub mod chart;
pub mod curvature;
pub mod error;
pub mod moebius;
mod poly;
pub mod profile;
pub mod spectral;
pub mod surface;
pub mod verifier;

pub use error::{Error, Result};
