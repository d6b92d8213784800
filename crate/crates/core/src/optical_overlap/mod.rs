//! Gaussian cavity mode and its overlap with the acoustic modes.
//!
//! The intracavity beam is the fundamental Gaussian mode with normalized
//! surface profile
//!
//! ```text
//! v0(r)^2 = (2 / pi w0^2) exp(-2 r^2 / w0^2),      integral of v0^2 d^2r = 1
//! ```
//!
//! and the light senses a mode through the z = 0 overlap
//! `<v0^2, u_np> = integral v0^2 u_np d^2r`. The axial factor of `u_np` is
//! unity on the coated face, so the local thickness drops out and
//!
//! ```text
//! <v0^2, u_np> = [2 w_n^2 / (2 w_n^2 + w0^2)] q^p,    q = (2 w_n^2 - w0^2) / (2 w_n^2 + w0^2)
//! ```
//!
//! [`overlap_quadrature`] evaluates the same integral numerically and serves
//! as an independent check on the closed form.

mod quadrature;

use std::f64::consts::PI;

pub use quadrature::{overlap_quadrature, overlap_quadrature_series, QuadratureSettings};

use crate::constants::HBAR;
use crate::error::{invalid, require_positive, Result};
use crate::resonator_modes::{waist_squared, ModeIndex, PlanoConvexGeometry};

/// Fundamental Gaussian mode of the cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalMode {
    wavelength: f64,
    wavevector: f64,
    waist: f64,
}

impl OpticalMode {
    pub fn new(wavelength: f64, waist: f64) -> Result<Self> {
        require_positive("wavelength", wavelength)?;
        require_positive("waist", waist)?;
        Ok(Self {
            wavelength,
            wavevector: 2.0 * PI / wavelength,
            waist,
        })
    }

    /// Optical wavelength (m).
    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Wavevector `k = 2 pi / lambda` (1/m).
    pub fn wavevector(&self) -> f64 {
        self.wavevector
    }

    /// Beam waist `w0` (m).
    pub fn waist(&self) -> f64 {
        self.waist
    }

    /// Same wavelength, different waist.
    pub fn with_waist(&self, waist: f64) -> Result<Self> {
        Self::new(self.wavelength, waist)
    }

    pub(crate) fn waist_squared(&self) -> f64 {
        self.waist * self.waist
    }
}

/// Dimensionless overlap `<v0^2, u_np>`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct OverlapValue {
    pub value: f64,
}

/// Normalized intensity profile `v0(r)^2` (1/m^2).
pub fn intensity_profile(opt: &OpticalMode, r: f64) -> f64 {
    let w02 = opt.waist_squared();
    2.0 / (PI * w02) * (-2.0 * r * r / w02).exp()
}

/// Radiation-pressure force density `2 hbar k I v0(r)^2` (N/m^2) for an
/// intracavity photon flux `I` (1/s).
pub fn radiation_pressure_profile(opt: &OpticalMode, flux: f64, r: f64) -> Result<f64> {
    check_flux(flux)?;
    Ok(2.0 * HBAR * opt.wavevector * flux * intensity_profile(opt, r))
}

/// Total radiation-pressure force `2 hbar k I` (N).
pub fn radiation_pressure_force(opt: &OpticalMode, flux: f64) -> Result<f64> {
    check_flux(flux)?;
    Ok(2.0 * HBAR * opt.wavevector * flux)
}

fn check_flux(flux: f64) -> Result<()> {
    if !(flux.is_finite() && flux >= 0.0) {
        return Err(invalid("flux", format!("photon flux must be finite and >= 0, got {flux}")));
    }
    Ok(())
}

/// Closed-form overlap of the optical intensity with mode `idx`.
pub fn overlap_analytic(opt: &OpticalMode, geom: &PlanoConvexGeometry, idx: ModeIndex) -> OverlapValue {
    let (prefactor, q) = overlap_parts(waist_squared(geom, idx.n()), opt.waist_squared());
    OverlapValue {
        value: prefactor * q.powi(idx.p() as i32),
    }
}

/// `(2 w_n^2 / (2 w_n^2 + w0^2), q)` so that the overlap is `prefactor * q^p`.
///
/// Takes squared waists so that `2 w_n^2 - w0^2` is formed from the same
/// floating-point inputs as the quadrature oracle.
pub(crate) fn overlap_parts(wn2: f64, w02: f64) -> (f64, f64) {
    let two_wn2 = 2.0 * wn2;
    let sum = two_wn2 + w02;
    (two_wn2 / sum, (two_wn2 - w02) / sum)
}
