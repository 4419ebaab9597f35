//! Numerical construction and verification of positive radial ground states
//! for scalar field equations combining a subcritical power nonlinearity
//! with the Sobolev-critical one, in dimensions 3 and 4 at large frequency.
//!
//! The construction rests on a contraction scheme around the Sobolev
//! extremal profile: a perturbed-resolvent inversion with deflation of the
//! scaling near-kernel, a scalar reparametrisation of the frequency, and a
//! joint fixed point for the (τ, η) pair. An independent shooting solver
//! cross-validates every computed state, and a frequency bridge maps the
//! rescaled solutions back to the original equation.

pub mod closed_forms;
pub mod error;
pub mod fixed_point;
pub mod nonlinear;
pub mod operator;
pub mod oracle;
pub mod params;
pub mod radial;
pub mod resolvent;

pub use error::{Error, Result};
pub use params::{compute_exponents, Exponents, ModelParams};
