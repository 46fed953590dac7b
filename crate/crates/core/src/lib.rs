//! Simulator for a Hopfield-type associative memory whose neurons are
//! signed basis vectors in `R^q` ("parametric" neurons carrying one of `q`
//! frequencies and a ±1 phase).
//!
//! * [`model`]: states, Hebb weights, local fields, winner-take-all dynamics, energy.
//! * [`noise`]: sign/frequency distortion of stored patterns.
//! * [`theory`]: recall-error bound, asymptotic capacity, Potts comparison.
//! * [`harness`]: Monte Carlo trials, capacity search, fixed-point enumeration, result files.

pub mod error;
pub mod harness;
pub mod model;
pub mod noise;
pub mod theory;

pub use error::{Error, Result};
pub use model::{Amplitudes, Network, Pattern, SpinState};
pub use noise::NoiseSpec;
pub use theory::ModelParams;
