//! Optomechanical coupling of a high-finesse cavity whose end mirror is
//! coated on the plane side of a plano-convex mechanical resonator.
//!
//! The crate is organised bottom-up:
//!
//! - [`resonator_modes`]: analytic catalog of compression acoustic modes.
//! - [`optical_overlap`]: Gaussian cavity mode, radiation-pressure profile and
//!   optical/acoustic overlap integrals (closed form plus a quadrature oracle).
//! - [`effective_response`]: effective susceptibility summed over all modes,
//!   thermal force spectrum, effective and optical masses.
//! - [`cavity_steady_state`]: mean-field working point and bistability.
//! - [`squeezing_spectra`]: input-output coefficients and quadrature noise
//!   spectra of the reflected field.
//!
//! Units are SI throughout. Angular frequencies are in rad/s.

pub mod cavity_steady_state;
pub mod constants;
pub mod effective_response;
mod error;
pub mod optical_overlap;
pub mod resonator_modes;
pub mod squeezing_spectra;
pub mod summation;

pub use error::{Error, Result};
pub use num_complex::Complex64;
