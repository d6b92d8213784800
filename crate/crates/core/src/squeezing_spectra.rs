//! Quantum noise of the field reflected by the cavity.
//!
//! Linearizing the field and mirror equations around the working point
//! (real mean field `a`) gives the input-output relation
//!
//! ```text
//! da_out[W] = c1[W] da_in[W] + c2[W] da_in*[W] + cT[W] F[W]
//!
//! D  = (g - i W t)^2 + P^2 + 2 P N X
//! c1 = ((g + i P)(g + i P + 2 i N X) + (W t)^2) / D
//! c2 = 2 i g N X / D
//! cT = 2 i sqrt(2 g) k a (g + i P - i W t) chi[W] / D
//! ```
//!
//! with `g = gamma`, `t = tau`, `P` the mean detuning, `N = Psi_NL` and
//! `X = chi[W] / chi[0]`. Here `da*[W]` is the transform of the conjugate
//! field, `conj(da[-W])`.
//!
//! # Quadrature spectrum
//!
//! The quadrature `da_th = e^{-i th} da + e^{i th} da*` of the output is
//!
//! ```text
//! da_th[W] = A[W] da_in[W] + conj(A[-W]) da_in*[W] + C[W] F[W]
//! A[W] = e^{-i th} c1[W] + e^{i th} conj(c2[-W])
//! C[W] = e^{-i th} cT[W] + e^{i th} conj(cT[-W])
//! ```
//!
//! using that `F` is real. Spectra are defined by
//! `<x[W] x[W']> = 2 pi delta(W + W') S[W]`. Symmetrized vacuum inputs have
//! `<da_in[W] da_in*[W']> = pi delta(W + W')` and no other correlation, so
//! an input quadrature has unit noise (shot noise). The thermal force has
//! spectrum `S_T` in the convention of
//! [`effective_response`](crate::effective_response). Since `C[-W] = conj(C[W])`,
//!
//! ```text
//! S_th[W] = (|A[W]|^2 + |A[-W]|^2) / 2 + |C[W]|^2 S_T[W]
//! ```
//!
//! As a function of the angle this is `a + Re(b e^{2 i th})`, so the best
//! quadrature is found in closed form: `S_opt = a - |b|`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cavity_steady_state::{CavityParams, OperatingPoint};
use crate::effective_response::{check_temperature, fdt_spectrum, KerrResponse, LossModel, MechanicalResponse, SingleOscillator};
use crate::error::{invalid, Error, Result};

/// Input-output coefficients at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseCoefficients {
    pub omega: f64,
    pub c1: Complex64,
    pub c2: Complex64,
    /// Multiplies the force (N^-1 s^-1/2).
    pub c_t: Complex64,
    pub delta: Complex64,
}

/// Coefficients at `omega` (which may be negative) for a working point
/// and a mechanical response.
pub fn noise_coefficients(
    op: &OperatingPoint,
    cav: &CavityParams,
    resp: &dyn MechanicalResponse,
    wavevector: f64,
    omega: f64,
) -> Result<NoiseCoefficients> {
    let chi = resp.susceptibility(omega)?;
    coefficients_from_susceptibility(op, cav, wavevector, omega, chi, chi / resp.static_compliance())
}

/// Coefficients from an already evaluated susceptibility `chi` and its
/// normalized value `chi_tilde`.
pub fn coefficients_from_susceptibility(
    op: &OperatingPoint,
    cav: &CavityParams,
    wavevector: f64,
    omega: f64,
    chi: Complex64,
    chi_tilde: Complex64,
) -> Result<NoiseCoefficients> {
    let i = Complex64::i();
    let g = cav.gamma();
    let wt = omega * cav.tau();
    let psi = op.mean_detuning;
    let nl = op.nonlinear_phase * chi_tilde;

    let g_wt = Complex64::new(g, -wt);
    let delta = g_wt * g_wt + psi * psi + 2.0 * psi * nl;
    if !(delta.norm() > 0.0 && delta.is_finite()) {
        return Err(Error::DegenerateDenominator { omega });
    }
    let g_psi = Complex64::new(g, psi);
    let c1 = (g_psi * (g_psi + 2.0 * i * nl) + wt * wt) / delta;
    let c2 = 2.0 * i * g * nl / delta;
    let c_t = 2.0 * i * (2.0 * g).sqrt() * wavevector * op.amplitude * Complex64::new(g, psi - wt) * chi / delta;
    Ok(NoiseCoefficients {
        omega,
        c1,
        c2,
        c_t,
        delta,
    })
}

/// Quadrature noise `S_th` at angle `theta` from the coefficients at `+W`
/// and `-W` and the thermal force spectrum at `W`.
pub fn quadrature_spectrum(plus: &NoiseCoefficients, minus: &NoiseCoefficients, thermal: f64, theta: f64) -> f64 {
    let rot = Complex64::from_polar(1.0, -theta);
    let a_plus = rot * plus.c1 + rot.conj() * minus.c2.conj();
    let a_minus = rot * minus.c1 + rot.conj() * plus.c2.conj();
    let c = rot * plus.c_t + rot.conj() * minus.c_t.conj();
    0.5 * (a_plus.norm_sqr() + a_minus.norm_sqr()) + c.norm_sqr() * thermal
}

/// `S_th = mean + Re(b e^{2 i th})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureForm {
    pub mean: f64,
    pub b: Complex64,
}

impl QuadratureForm {
    pub fn new(plus: &NoiseCoefficients, minus: &NoiseCoefficients, thermal: f64) -> Self {
        let (x1, d1) = (plus.c1, minus.c2.conj());
        let (x2, d2) = (minus.c1, plus.c2.conj());
        let (y, e) = (plus.c_t, minus.c_t.conj());
        let mean = 0.5 * (x1.norm_sqr() + d1.norm_sqr() + x2.norm_sqr() + d2.norm_sqr())
            + thermal * (y.norm_sqr() + e.norm_sqr());
        let k = x1 * d1.conj() + x2 * d2.conj() + 2.0 * thermal * y * e.conj();
        Self { mean, b: k.conj() }
    }

    pub fn value(&self, theta: f64) -> f64 {
        self.mean + (self.b * Complex64::from_polar(1.0, 2.0 * theta)).re
    }

    /// `(S_opt, theta_opt)` with `theta_opt` in `[0, pi)`; zero when every
    /// quadrature is equivalent.
    pub fn optimum(&self) -> (f64, f64) {
        let size = self.b.norm();
        if size == 0.0 {
            return (self.mean, 0.0);
        }
        let theta = (0.5 * (PI - self.b.arg())).rem_euclid(PI);
        (self.mean - size, if theta >= PI { 0.0 } else { theta })
    }
}

/// Minimum quadrature noise over `theta` and the angle reaching it.
pub fn optimum_spectrum(plus: &NoiseCoefficients, minus: &NoiseCoefficients, thermal: f64) -> (f64, f64) {
    QuadratureForm::new(plus, minus, thermal).optimum()
}

/// Noise at one frequency of a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    pub omega: f64,
    pub s_opt: f64,
    pub theta_opt: f64,
    /// Amplitude quadrature.
    pub s_theta0: f64,
    /// Phase quadrature.
    pub s_theta90: f64,
    /// Thermal force spectrum used (N^2 s).
    pub thermal: f64,
    /// Modes summed for the response at `+W`.
    pub mode_count: u64,
    pub converged: bool,
}

/// Noise of the reflected field over a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpectrum {
    pub points: Vec<SpectrumPoint>,
    /// Angles of the optional scan, evenly spaced in `[0, pi)`.
    pub theta: Vec<f64>,
    /// `scan[i][j]` is the noise at `points[i].omega` and `theta[j]`.
    pub scan: Vec<Vec<f64>>,
}

impl QuadratureSpectrum {
    /// Smallest scanned value per frequency.
    pub fn scan_minimum(&self) -> Vec<f64> {
        self.scan.iter().map(|row| row.iter().copied().fold(f64::INFINITY, f64::min)).collect()
    }

    pub fn all_converged(&self) -> bool {
        self.points.iter().all(|p| p.converged)
    }

    pub fn max_mode_count(&self) -> u64 {
        self.points.iter().map(|p| p.mode_count).max().unwrap_or(0)
    }
}

/// Inputs shared by every frequency of a spectrum.
#[derive(Clone, Copy)]
pub struct SpectrumSetup<'a> {
    pub op: &'a OperatingPoint,
    pub cav: &'a CavityParams,
    pub resp: &'a dyn MechanicalResponse,
    pub wavevector: f64,
    pub temperature: f64,
    /// Number of angles in the optional scan; 0 skips it.
    pub theta_points: usize,
}

/// Evaluates the spectrum on `omega`, in parallel, preserving grid order.
///
/// The response is evaluated at `+W` and `-W` independently. At `T > 0`
/// the grid must avoid `W = 0`.
pub fn compute_spectrum(setup: &SpectrumSetup<'_>, omega: &[f64]) -> Result<QuadratureSpectrum> {
    check_temperature(setup.temperature)?;
    let theta: Vec<f64> = (0..setup.theta_points)
        .map(|j| PI * j as f64 / setup.theta_points as f64)
        .collect();
    let rows = omega
        .par_iter()
        .map(|&w| spectrum_at(setup, &theta, w))
        .collect::<Result<Vec<_>>>()?;
    let (points, scan) = rows.into_iter().unzip();
    Ok(QuadratureSpectrum { points, theta, scan })
}

fn spectrum_at(setup: &SpectrumSetup<'_>, theta: &[f64], omega: f64) -> Result<(SpectrumPoint, Vec<f64>)> {
    let chi0 = setup.resp.static_compliance();
    let at = setup.resp.evaluate(omega)?;
    let at_minus = setup.resp.evaluate(-omega)?;
    let plus = coefficients_from_susceptibility(setup.op, setup.cav, setup.wavevector, omega, at.chi, at.chi / chi0)?;
    let minus = coefficients_from_susceptibility(
        setup.op,
        setup.cav,
        setup.wavevector,
        -omega,
        at_minus.chi,
        at_minus.chi / chi0,
    )?;
    let thermal = if setup.temperature == 0.0 {
        0.0
    } else if omega == 0.0 {
        return Err(Error::ZeroFrequency);
    } else {
        fdt_spectrum(at.chi, setup.temperature, omega)
    };
    let form = QuadratureForm::new(&plus, &minus, thermal);
    let (s_opt, theta_opt) = form.optimum();
    let point = SpectrumPoint {
        omega,
        s_opt,
        theta_opt,
        s_theta0: quadrature_spectrum(&plus, &minus, thermal, 0.0),
        s_theta90: quadrature_spectrum(&plus, &minus, thermal, 0.5 * PI),
        thermal,
        mode_count: at.mode_count.max(at_minus.mode_count),
        converged: at.converged && at_minus.converged,
    };
    let scan = theta.iter().map(|&t| quadrature_spectrum(&plus, &minus, thermal, t)).collect();
    Ok((point, scan))
}

/// Simplified mechanical models run through the same pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceKind {
    /// Instantaneous lossless medium: normalized response 1, no thermal
    /// force.
    KerrLimit { static_compliance: f64 },
    /// One harmonic oscillator with the given mass and frequency.
    SingleOscillator {
        mass: f64,
        frequency: f64,
        loss: LossModel,
    },
}

/// Spectrum of a reference model at the same working point and cavity.
pub fn reference_curves(
    kind: ReferenceKind,
    op: &OperatingPoint,
    cav: &CavityParams,
    wavevector: f64,
    temperature: f64,
    omega: &[f64],
    theta_points: usize,
) -> Result<QuadratureSpectrum> {
    match kind {
        ReferenceKind::KerrLimit { static_compliance } => {
            let resp = KerrResponse::new(static_compliance)?;
            let setup = SpectrumSetup {
                op,
                cav,
                resp: &resp,
                wavevector,
                temperature: 0.0,
                theta_points,
            };
            compute_spectrum(&setup, omega)
        }
        ReferenceKind::SingleOscillator { mass, frequency, loss } => {
            let resp = SingleOscillator::new(mass, frequency, loss)?;
            let setup = SpectrumSetup {
                op,
                cav,
                resp: &resp,
                wavevector,
                temperature,
                theta_points,
            };
            compute_spectrum(&setup, omega)
        }
    }
}

/// Evenly spaced angles in `[0, pi)` for scans.
pub fn theta_grid(points: usize) -> Result<Vec<f64>> {
    if points == 0 {
        return Err(invalid("theta_points", "must be at least 1"));
    }
    Ok((0..points).map(|j| PI * j as f64 / points as f64).collect())
}
