//! Hidden dynamics of piecewise-smooth ODEs near intersections of switching
//! surfaces: regularization, sliding modes, outcome classification, Hopf
//! analysis and invariant regions.
//!
//! Algebraic routines are generic over [`Scalar`]; integration is generic over
//! [`Real`] (`f32`, `f64`).

pub mod bifurc;
pub mod error;
pub mod hidden;
pub mod integrate;
pub mod invariant;
pub mod models;
pub mod poly;
pub mod psys;
pub mod scalar;
pub mod surd;
pub mod switching;

pub use error::{Error, Result};
pub use scalar::{q, Rational, Real, Scalar, Surd};

/// Double-precision instances of the main types.
pub type CornerFieldsF64 = psys::CornerFields<f64>;
pub type CoeffsF64 = hidden::MultilinearCoeffs<f64>;
pub type HiddenSystemF64 = hidden::HiddenSystem<f64>;
pub type TrajectoryF64 = integrate::Trajectory<f64>;
pub type OutcomeF64 = integrate::Outcome<f64>;
/// Exact-rational instances.
pub type CoeffsQ = hidden::MultilinearCoeffs<Rational>;
pub type HiddenSystemQ = hidden::HiddenSystem<Rational>;
