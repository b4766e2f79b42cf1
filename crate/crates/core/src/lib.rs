//! Numerical toolkit for the one-parameter special conformal group generated by
//! `C4 = (r² + (x⁴)²) ∂/∂x⁴ + 2 x⁴ r ∂/∂r`.
//!
//! The crate is layered bottom-up:
//!
//! * [`conformal`]: exact finite transformations, their differentials, the
//!   first-order (Hill) relations, the conformal metric factor, and an RK4
//!   integrator of the generating vector field used as an independent oracle.
//! * [`wave`]: inbound null rays on the past light cone, wavelength mapping
//!   and the Doppler / Hubble velocity relations.
//! * [`tracking`]: a seeded two-way Doppler and ranging simulator for a
//!   spacecraft coasting radially outward, plus the anomaly residuals.
//! * [`estimator`]: weighted least-squares recovery of the group rate `α`
//!   with bootstrap uncertainty and a zero-rate decision.
//!
//! Conformal operations work in geometric units (`x⁴ = c t`, `β₄` in 1/m).
//! Everything from [`wave`] upward is in SI units.

pub mod conformal;
pub mod error;
pub mod estimator;
pub mod extended;
pub mod tracking;
pub mod wave;

pub use error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Astronomical unit, m.
pub const ASTRONOMICAL_UNIT: f64 = 1.495_978_707e11;

/// Hubble constant expressed as a rate, 1/s.
pub const HUBBLE_RATE: f64 = 2.19e-18;

/// Uncertainty quoted alongside [`HUBBLE_RATE`], 1/s.
pub const HUBBLE_RATE_UNCERTAINTY: f64 = 0.56e-18;

/// Mean Pioneer anomalous Doppler drift expressed as a rate, 1/s.
pub const PIONEER_ANOMALY_RATE: f64 = -2.80e-18;

/// Fractional Doppler accuracy of S-band tracking.
pub const DOPPLER_ACCURACY: f64 = 1e-12;
