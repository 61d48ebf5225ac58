//! Perceptual sweet-spot maximization for loudspeaker arrays.
//!
//! The crate is `no_std` (with `alloc`) and contains only the numerical
//! machinery: free-field synthesis and binaural transfer, the van de Par
//! detectability model, the layer-cake / difference-of-convex machinery
//! behind SWEET-ReLU, the pressure-matching, WFS and NFC-HOA baselines, and
//! binaural cue evaluation. File formats and the command-line runner live in
//! the `sweetspot-cli` crate.
#![no_std]
// `!(x > 0.0)` is deliberate: NaN has to fail validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod acoustics;
pub mod baselines;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod linalg;
pub mod optimizer;
pub mod problem;
pub mod psychoacoustics;
pub mod scenario;
pub mod special;
pub mod spline;

pub use error::{Error, Result};
pub use geometry::{ListenerPose, Position};
pub use num_complex::Complex64;

/// Reference pressure for dB SPL, in pascal.
pub const P_REF: f64 = 20e-6;
