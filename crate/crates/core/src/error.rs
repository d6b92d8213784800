use thiserror::Error;

/// Errors raised by the simulator library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("point (r = {r:e} m, z = {z:e} m) lies outside the resonator body")]
    OutsideBody { r: f64, z: f64 },

    #[error("overlap quadrature did not converge: {0}")]
    QuadratureNotConverged(String),

    #[error("mode sum hit its caps after {modes} modes before reaching the tolerance (partial value {partial:e})")]
    TruncationNotConverged { modes: u64, partial: f64 },

    #[error("thermal force spectrum is undefined at zero frequency")]
    ZeroFrequency,

    #[error("input-output denominator vanishes at omega = {omega:e} rad/s")]
    DegenerateDenominator { omega: f64 },

    #[error("steady-state root polishing failed: {0}")]
    RootNotConverged(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Rejects values that are not finite and strictly positive.
pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and > 0, got {value}")))
    }
}
