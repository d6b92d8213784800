//! Effective mechanical response seen by the light.
//!
//! Each acoustic mode responds to the radiation-pressure profile as a
//! damped oscillator
//!
//! ```text
//! chi_n[W] = 1 / (M_n (W_n^2 - W^2 - i W_n^2 Phi[W]))
//! ```
//!
//! and the displacement averaged over the beam is governed by
//!
//! ```text
//! chi_eff[W] = sum_{n,p} <v0^2, u_np>^2 chi_np[W]
//! ```
//!
//! The double sum converges slowly (the row weights fall off like 1/n^2),
//! so it is evaluated with a certified stopping rule: within a row the
//! squared overlaps form a geometric series in `p`, and across rows the
//! remaining weight is bounded by an integral of `1/(n^2 - x^2)`. Both
//! tails are pushed below half the requested relative tolerance.
//!
//! # Thermal noise convention
//!
//! The thermal Langevin force is real, `F[-W] = conj(F[W])`, with
//! correlations `<F[W] F[W']> = 2 pi delta(W + W') S_T[W]` and
//!
//! ```text
//! S_T[W] = -(2 k_B T / W) Im(1 / chi[W])
//! ```
//!
//! which is even in `W`. No other factors of 2 or 2 pi appear; this is the
//! symmetric convention in which a single oscillator with loss angle `Phi`
//! has `S_T = 2 k_B T M W_M^2 Phi / W`.
//!
//! The loss angle is odd in frequency (`Phi[-W] = -Phi[W]`), which makes
//! every response Hermitian: `chi[-W] = conj(chi[W])`. The static
//! compliance `chi[0]` used for normalization is the lossless real sum.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::constants::BOLTZMANN;
use crate::error::{invalid, require_positive, Error, Result};
use crate::optical_overlap::{overlap_analytic, overlap_parts, OpticalMode};
use crate::resonator_modes::{
    fundamental_frequency, mode_mass, waist_squared, AcousticMode, MaterialProperties, ModeIndex,
    PlanoConvexGeometry,
};
use crate::summation::{CompensatedSum, ComplexCompensatedSum};

/// Mechanical loss angle as a function of frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossModel {
    /// `Phi = 1/Q` at every positive frequency.
    ConstantLossAngle { quality_factor: f64 },
    /// `Phi = W / (Q W_ref)`, reaching `1/Q` at `W_ref`.
    ViscousLossAngle {
        quality_factor: f64,
        reference_frequency: f64,
    },
}

impl LossModel {
    pub fn constant(quality_factor: f64) -> Result<Self> {
        require_positive("quality_factor", quality_factor)?;
        Ok(Self::ConstantLossAngle { quality_factor })
    }

    pub fn viscous(quality_factor: f64, reference_frequency: f64) -> Result<Self> {
        require_positive("quality_factor", quality_factor)?;
        require_positive("reference_frequency", reference_frequency)?;
        Ok(Self::ViscousLossAngle {
            quality_factor,
            reference_frequency,
        })
    }

    /// Loss angle at `omega`, extended to negative frequencies as an odd
    /// function. The constant model takes `+1/Q` at zero.
    pub fn loss_angle(&self, omega: f64) -> f64 {
        match *self {
            Self::ConstantLossAngle { quality_factor } => {
                if omega < 0.0 {
                    -1.0 / quality_factor
                } else {
                    1.0 / quality_factor
                }
            }
            Self::ViscousLossAngle {
                quality_factor,
                reference_frequency,
            } => omega / (quality_factor * reference_frequency),
        }
    }
}

/// Stopping rule for the mode sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    rel_tol: f64,
    n_max: u32,
    p_max: u32,
    certified: bool,
}

impl TruncationPolicy {
    /// `n_max` and `p_max` are the largest indices ever summed.
    pub fn new(rel_tol: f64, n_max: u32, p_max: u32) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(invalid("rel_tol", format!("must lie in (0, 1), got {rel_tol}")));
        }
        if n_max < 1 {
            return Err(invalid("n_max", "must be at least 1"));
        }
        if p_max < 1 {
            return Err(invalid("p_max", "must be at least 1"));
        }
        Ok(Self {
            rel_tol,
            n_max,
            p_max,
            certified: true,
        })
    }

    /// Sums every mode with `n <= n_max` and `p <= p_max`, with no tail
    /// test. Results are never marked converged.
    pub fn rectangular(n_max: u32, p_max: u32) -> Result<Self> {
        Ok(Self {
            certified: false,
            ..Self::new(0.5, n_max, p_max)?
        })
    }

    /// False for [`rectangular`](Self::rectangular) policies.
    pub fn is_certified(&self) -> bool {
        self.certified
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn p_max(&self) -> u32 {
        self.p_max
    }
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            rel_tol: 1e-3,
            n_max: 10_000_000,
            p_max: 10_000_000,
            certified: true,
        }
    }
}

/// Value of a response at one frequency together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseValue {
    /// Compliance (m/N).
    pub chi: Complex64,
    /// Number of modes summed.
    pub mode_count: u64,
    /// False if a cap was hit before the tolerance was met.
    pub converged: bool,
}

impl ResponseValue {
    fn exact(chi: Complex64, mode_count: u64) -> Self {
        Self {
            chi,
            mode_count,
            converged: true,
        }
    }
}

/// A linear mechanical response `W -> chi[W]`.
pub trait MechanicalResponse: Send + Sync {
    fn evaluate(&self, omega: f64) -> Result<ResponseValue>;

    /// Real lossless compliance at zero frequency (m/N).
    fn static_compliance(&self) -> f64;

    fn susceptibility(&self, omega: f64) -> Result<Complex64> {
        Ok(self.evaluate(omega)?.chi)
    }

    /// `chi[W] / chi[0]`.
    fn normalized(&self, omega: f64) -> Result<Complex64> {
        Ok(self.susceptibility(omega)? / self.static_compliance())
    }
}

/// One damped harmonic oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleOscillator {
    mass: f64,
    frequency: f64,
    loss: LossModel,
}

impl SingleOscillator {
    pub fn new(mass: f64, frequency: f64, loss: LossModel) -> Result<Self> {
        require_positive("mass", mass)?;
        require_positive("frequency", frequency)?;
        Ok(Self { mass, frequency, loss })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }
}

impl MechanicalResponse for SingleOscillator {
    fn evaluate(&self, omega: f64) -> Result<ResponseValue> {
        let chi = oscillator(self.mass, self.frequency * self.frequency, self.loss.loss_angle(omega), omega);
        Ok(ResponseValue::exact(chi, 1))
    }

    fn static_compliance(&self) -> f64 {
        1.0 / (self.mass * self.frequency * self.frequency)
    }
}

/// Instantaneous, lossless response: `chi[W] = chi[0]` at every frequency.
/// Carries no thermal noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KerrResponse {
    compliance: f64,
}

impl KerrResponse {
    pub fn new(compliance: f64) -> Result<Self> {
        require_positive("compliance", compliance)?;
        Ok(Self { compliance })
    }
}

impl MechanicalResponse for KerrResponse {
    fn evaluate(&self, _omega: f64) -> Result<ResponseValue> {
        Ok(ResponseValue::exact(Complex64::new(self.compliance, 0.0), 0))
    }

    fn static_compliance(&self) -> f64 {
        self.compliance
    }
}

/// Mode together with its squared overlap with the optical intensity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedMode {
    pub mode: AcousticMode,
    pub weight: f64,
}

/// Set of modes entering the effective response.
#[derive(Debug, Clone, PartialEq)]
pub enum ModeCatalog {
    /// Every compression mode of the resonator, generated on the fly.
    PlanoConvex {
        geometry: PlanoConvexGeometry,
        material: MaterialProperties,
    },
    /// An explicit finite list.
    Listed(Vec<WeightedMode>),
}

impl ModeCatalog {
    pub fn plano_convex(geometry: PlanoConvexGeometry, material: MaterialProperties) -> Self {
        Self::PlanoConvex { geometry, material }
    }

    /// Explicit list of resonator modes weighted by their closed-form
    /// overlaps with `opt`.
    pub fn listed_from(
        geometry: &PlanoConvexGeometry,
        material: &MaterialProperties,
        opt: &OpticalMode,
        indices: &[ModeIndex],
    ) -> Self {
        Self::Listed(
            indices
                .iter()
                .map(|&idx| {
                    let overlap = overlap_analytic(opt, geometry, idx).value;
                    WeightedMode {
                        mode: AcousticMode::new(geometry, material, idx),
                        weight: overlap * overlap,
                    }
                })
                .collect(),
        )
    }
}

/// Single-mode susceptibility `1 / (M_n (W_n^2 - W^2 - i W_n^2 Phi[W]))`.
pub fn modal_susceptibility(mode: &AcousticMode, loss: &LossModel, omega: f64) -> Complex64 {
    oscillator(mode.mass, mode.frequency * mode.frequency, loss.loss_angle(omega), omega)
}

fn oscillator(mass: f64, omega_n_sq: f64, phi: f64, omega: f64) -> Complex64 {
    Complex64::new(1.0, 0.0) / Complex64::new(mass * (omega_n_sq - omega * omega), -mass * omega_n_sq * phi)
}

/// Effective susceptibility at `omega`.
///
/// Hitting a cap of the truncation policy is not an error here: the partial
/// sum is returned with `converged = false`.
pub fn effective_susceptibility(
    catalog: &ModeCatalog,
    opt: &OpticalMode,
    loss: &LossModel,
    trunc: &TruncationPolicy,
    omega: f64,
) -> Result<ResponseValue> {
    check_frequency(omega)?;
    let term = |mass: f64, omega_n_sq: f64| oscillator(mass, omega_n_sq, loss.loss_angle(omega), omega);
    Ok(mode_sum(catalog, opt, trunc, omega, term))
}

/// Zero-frequency lossless compliance `sum <v0^2, u_np>^2 / (M_n W_np^2)`.
pub fn static_effective_compliance(
    catalog: &ModeCatalog,
    opt: &OpticalMode,
    trunc: &TruncationPolicy,
) -> ResponseValue {
    let term = |mass: f64, omega_n_sq: f64| Complex64::new(1.0 / (mass * omega_n_sq), 0.0);
    mode_sum(catalog, opt, trunc, 0.0, term)
}

fn check_frequency(omega: f64) -> Result<()> {
    if omega.is_finite() {
        Ok(())
    } else {
        Err(invalid("omega", format!("must be finite, got {omega}")))
    }
}

fn mode_sum<F>(catalog: &ModeCatalog, opt: &OpticalMode, trunc: &TruncationPolicy, omega: f64, term: F) -> ResponseValue
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    match catalog {
        ModeCatalog::Listed(modes) => {
            let sum: ComplexCompensatedSum = modes
                .iter()
                .map(|m| m.weight * term(m.mode.mass, m.mode.frequency * m.mode.frequency))
                .collect();
            ResponseValue::exact(sum.value(), modes.len() as u64)
        }
        ModeCatalog::PlanoConvex { geometry, material } => {
            PlanoConvexSum::new(geometry, material, opt, trunc, omega).run(&term)
        }
    }
}

/// Rows computed concurrently before they are folded in canonical order.
const ROW_BLOCK: u32 = 64;

struct RowSum {
    value: Complex64,
    terms: u64,
    converged: bool,
}

struct PlanoConvexSum<'a> {
    geom: &'a PlanoConvexGeometry,
    w02: f64,
    omega_m_sq: f64,
    shift: f64,
    m1: f64,
    omega_sq: f64,
    x: f64,
    half_tol: f64,
    n_max: u32,
    p_max: u32,
    certified: bool,
    outer_scale: f64,
}

impl<'a> PlanoConvexSum<'a> {
    fn new(
        geom: &'a PlanoConvexGeometry,
        mat: &MaterialProperties,
        opt: &OpticalMode,
        trunc: &TruncationPolicy,
        omega: f64,
    ) -> Self {
        let omega_m = fundamental_frequency(geom, mat);
        let m1 = mode_mass(geom, mat, 1).expect("n = 1 is valid");
        let w02 = opt.waist_squared();
        // Sum over p of the squared overlaps in row n is w_n^2 / (2 w0^2).
        let row_weight_1 = waist_squared(geom, 1) / (2.0 * w02);
        Self {
            geom,
            w02,
            omega_m_sq: omega_m * omega_m,
            shift: geom.transverse_shift(),
            m1,
            omega_sq: omega * omega,
            x: omega.abs() / omega_m,
            half_tol: 0.5 * trunc.rel_tol,
            n_max: trunc.n_max,
            p_max: trunc.p_max,
            certified: trunc.certified,
            outer_scale: row_weight_1 / (m1 * omega_m * omega_m),
        }
    }

    fn row<F: Fn(f64, f64) -> Complex64>(&self, n: u32, term: &F) -> RowSum {
        let nf = n as f64;
        let wn2 = waist_squared(self.geom, n);
        let mass = self.m1 / nf;
        let (prefactor, q) = overlap_parts(wn2, self.w02);
        let q2 = q * q;
        let s = 2.0 * wn2 + self.w02;
        let one_minus_q2 = 8.0 * wn2 * self.w02 / (s * s);
        let base = self.omega_m_sq * nf * nf;
        let step = self.omega_m_sq * self.shift * nf;

        let mut acc = ComplexCompensatedSum::new();
        let mut weight = prefactor * prefactor;
        for p in 0..=self.p_max {
            let omega_n_sq = base + step * (2.0 * p as f64 + 1.0);
            acc.add(weight * term(mass, omega_n_sq));
            let next = weight * q2;
            let gap = omega_n_sq + 2.0 * step - self.omega_sq;
            if self.certified && gap > 0.0 {
                let tail = next / one_minus_q2 / (mass * gap);
                if tail <= self.half_tol * acc.value().norm() {
                    return RowSum {
                        value: acc.value(),
                        terms: p as u64 + 1,
                        converged: true,
                    };
                }
            }
            weight = next;
        }
        RowSum {
            value: acc.value(),
            terms: self.p_max as u64 + 1,
            converged: false,
        }
    }

    /// Bound on the magnitude of all rows beyond `n`, if it applies.
    fn outer_tail(&self, n: u32) -> Option<f64> {
        let a = n as f64 + 0.5;
        if !self.certified || a <= self.x {
            return None;
        }
        let integral = if self.x == 0.0 {
            1.0 / a
        } else {
            (2.0 * self.x / (a - self.x)).ln_1p() / (2.0 * self.x)
        };
        Some(self.outer_scale * integral)
    }

    fn run<F: Fn(f64, f64) -> Complex64 + Sync>(&self, term: &F) -> ResponseValue {
        let mut total = ComplexCompensatedSum::new();
        let mut modes = 0u64;
        let mut rows_converged = true;
        let mut start = 1u32;
        while start <= self.n_max {
            let end = start.saturating_add(ROW_BLOCK - 1).min(self.n_max);
            let rows: Vec<RowSum> = (start..=end).into_par_iter().map(|n| self.row(n, term)).collect();
            for (n, row) in (start..=end).zip(rows) {
                total.add(row.value);
                modes += row.terms;
                rows_converged &= row.converged;
                if let Some(tail) = self.outer_tail(n) {
                    if tail <= self.half_tol * total.value().norm() {
                        return ResponseValue {
                            chi: total.value(),
                            mode_count: modes,
                            converged: rows_converged,
                        };
                    }
                }
            }
            if end == self.n_max {
                break;
            }
            start = end + 1;
        }
        ResponseValue {
            chi: total.value(),
            mode_count: modes,
            converged: false,
        }
    }
}

/// Effective response of the resonator seen through one optical mode.
#[derive(Debug, Clone)]
pub struct EffectiveResponse {
    catalog: ModeCatalog,
    optical: OpticalMode,
    loss: LossModel,
    trunc: TruncationPolicy,
    static_value: ResponseValue,
}

impl EffectiveResponse {
    /// Evaluates the static compliance once; check
    /// [`static_value`](Self::static_value) for its convergence.
    pub fn new(catalog: ModeCatalog, optical: OpticalMode, loss: LossModel, trunc: TruncationPolicy) -> Self {
        let static_value = static_effective_compliance(&catalog, &optical, &trunc);
        Self {
            catalog,
            optical,
            loss,
            trunc,
            static_value,
        }
    }

    pub fn static_value(&self) -> ResponseValue {
        self.static_value
    }

    pub fn catalog(&self) -> &ModeCatalog {
        &self.catalog
    }

    pub fn optical(&self) -> &OpticalMode {
        &self.optical
    }
}

impl MechanicalResponse for EffectiveResponse {
    fn evaluate(&self, omega: f64) -> Result<ResponseValue> {
        effective_susceptibility(&self.catalog, &self.optical, &self.loss, &self.trunc, omega)
    }

    fn static_compliance(&self) -> f64 {
        self.static_value.chi.re
    }
}

/// Response sampled on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    pub omega: Vec<f64>,
    pub values: Vec<ResponseValue>,
}

/// Evaluates `resp` on every grid point, in parallel, preserving grid order.
pub fn susceptibility_spectrum(resp: &dyn MechanicalResponse, omega: &[f64]) -> Result<ComplexSpectrum> {
    let values = omega
        .par_iter()
        .map(|&w| resp.evaluate(w))
        .collect::<Result<Vec<_>>>()?;
    Ok(ComplexSpectrum {
        omega: omega.to_vec(),
        values,
    })
}

/// Thermal force spectrum `-(2 k_B T / W) Im(1 / chi[W])` (N^2 s).
pub fn thermal_force_spectrum(resp: &dyn MechanicalResponse, temperature: f64, omega: f64) -> Result<f64> {
    check_temperature(temperature)?;
    if omega == 0.0 {
        return Err(Error::ZeroFrequency);
    }
    Ok(fdt_spectrum(resp.susceptibility(omega)?, temperature, omega))
}

pub(crate) fn fdt_spectrum(chi: Complex64, temperature: f64, omega: f64) -> f64 {
    -2.0 * BOLTZMANN * temperature / omega * chi.inv().im
}

pub(crate) fn check_temperature(temperature: f64) -> Result<()> {
    if temperature.is_finite() && temperature >= 0.0 {
        Ok(())
    } else {
        Err(invalid("temperature", format!("must be finite and >= 0, got {temperature}")))
    }
}

/// Spectrum of the independent Langevin force driving one mode,
/// `2 k_B T M_n W_n^2 Phi[W] / W`.
pub fn modal_langevin_spectrum(mode: &AcousticMode, loss: &LossModel, temperature: f64, omega: f64) -> Result<f64> {
    check_temperature(temperature)?;
    if omega == 0.0 {
        return Err(Error::ZeroFrequency);
    }
    Ok(2.0 * BOLTZMANN * temperature * mode.mass * mode.frequency * mode.frequency * loss.loss_angle(omega) / omega)
}

/// Spectrum of the effective force `sum <v0^2, u_n> chi_n F_n / chi_eff`
/// built from independent modal Langevin forces.
pub fn langevin_force_spectrum(modes: &[WeightedMode], loss: &LossModel, temperature: f64, omega: f64) -> Result<f64> {
    let chi_eff: ComplexCompensatedSum = modes
        .iter()
        .map(|m| m.weight * modal_susceptibility(&m.mode, loss, omega))
        .collect();
    let mut displacement = CompensatedSum::new();
    for m in modes {
        let chi = modal_susceptibility(&m.mode, loss, omega);
        displacement.add(m.weight * chi.norm_sqr() * modal_langevin_spectrum(&m.mode, loss, temperature, omega)?);
    }
    Ok(displacement.value() / chi_eff.value().norm_sqr())
}

/// Effective and reference masses at one optical waist.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveMassReport {
    /// `1 / (W_M^2 chi_eff[0])` (kg).
    pub m_eff: f64,
    /// Closed-form optical mass (kg).
    pub m_opt: f64,
    /// Mass of the fundamental mode (kg).
    pub m1: f64,
    /// `M_1 (1 + a) / <v0^2, u_10>^2`, which bounds `m_eff` from above.
    pub upper_bound: f64,
    pub mode_count: u64,
    pub converged: bool,
}

/// Effective mass from the lossless static compliance.
///
/// Returns [`Error::TruncationNotConverged`] if a cap is hit.
pub fn effective_mass(
    catalog: &ModeCatalog,
    opt: &OpticalMode,
    geom: &PlanoConvexGeometry,
    mat: &MaterialProperties,
    trunc: &TruncationPolicy,
) -> Result<EffectiveMassReport> {
    let chi0 = static_effective_compliance(catalog, opt, trunc);
    if !chi0.converged {
        return Err(Error::TruncationNotConverged {
            modes: chi0.mode_count,
            partial: chi0.chi.re,
        });
    }
    let omega_m = fundamental_frequency(geom, mat);
    let m1 = mode_mass(geom, mat, 1)?;
    let o10 = overlap_analytic(opt, geom, ModeIndex::FUNDAMENTAL).value;
    Ok(EffectiveMassReport {
        m_eff: 1.0 / (omega_m * omega_m * chi0.chi.re),
        m_opt: optical_mass(geom, mat, opt),
        m1,
        upper_bound: m1 * (1.0 + geom.transverse_shift()) / (o10 * o10),
        mode_count: chi0.mode_count,
        converged: chi0.converged,
    })
}

/// `(12 / pi^2) (pi / 4) rho h0 w0^2` (kg).
pub fn optical_mass(geom: &PlanoConvexGeometry, mat: &MaterialProperties, opt: &OpticalMode) -> f64 {
    use std::f64::consts::PI;
    12.0 / (PI * PI) * (PI / 4.0) * mat.density() * geom.thickness() * opt.waist_squared()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn geom() -> PlanoConvexGeometry {
        PlanoConvexGeometry::new(1.5e-3, 0.15).unwrap()
    }

    fn silica() -> MaterialProperties {
        MaterialProperties::fused_silica()
    }

    fn beam(w0: f64) -> OpticalMode {
        OpticalMode::new(800e-9, w0).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn modal_susceptibility_limits() {
        let mode = AcousticMode::new(&geom(), &silica(), ModeIndex::FUNDAMENTAL);
        let q = 1e6;
        let loss = LossModel::constant(q).unwrap();
        let k = mode.stiffness();

        let dc = modal_susceptibility(&mode, &loss, 0.0);
        assert!(rel(dc.re, 1.0 / k / (1.0 + 1.0 / (q * q))) < 1e-15);
        assert!(rel(dc.im, 1.0 / (k * q)) < 1e-9);

        let res = modal_susceptibility(&mode, &loss, mode.frequency);
        assert!(res.re.abs() < 1e-12 * res.im);
        assert!(rel(res.im, q / k) < 1e-9);

        let w = 1e4 * mode.frequency;
        let free = modal_susceptibility(&mode, &loss, w);
        assert!(rel(free.re, -1.0 / (mode.mass * w * w)) < 1e-7);
    }

    #[test]
    fn loss_models() {
        let c = LossModel::constant(100.0).unwrap();
        assert_eq!(c.loss_angle(0.0), 0.01);
        assert_eq!(c.loss_angle(5.0), 0.01);
        assert_eq!(c.loss_angle(-5.0), -0.01);
        let v = LossModel::viscous(100.0, 2.0).unwrap();
        assert_eq!(v.loss_angle(2.0), 0.01);
        assert_eq!(v.loss_angle(-4.0), -0.02);
        assert!(LossModel::constant(0.0).is_err());
        assert!(LossModel::viscous(1.0, -1.0).is_err());
    }

    #[test]
    fn truncation_policy_validation() {
        assert!(TruncationPolicy::new(0.0, 1, 1).is_err());
        assert!(TruncationPolicy::new(1.0, 1, 1).is_err());
        assert!(TruncationPolicy::new(1e-3, 0, 1).is_err());
        assert!(TruncationPolicy::new(1e-3, 1, 0).is_err());
        assert_eq!(TruncationPolicy::default().rel_tol(), 1e-3);
    }

    #[test]
    fn single_listed_mode_is_one_term() {
        let g = geom();
        let m = silica();
        let opt = beam(200e-6);
        let catalog = ModeCatalog::listed_from(&g, &m, &opt, &[ModeIndex::FUNDAMENTAL]);
        let loss = LossModel::constant(1e6).unwrap();
        let omega = 7.3e6;
        let v = effective_susceptibility(&catalog, &opt, &loss, &TruncationPolicy::default(), omega).unwrap();
        let o = overlap_analytic(&opt, &g, ModeIndex::FUNDAMENTAL).value;
        let mode = AcousticMode::new(&g, &m, ModeIndex::FUNDAMENTAL);
        assert_eq!(v.chi, o * o * modal_susceptibility(&mode, &loss, omega));
        assert_eq!(v.mode_count, 1);
    }

    #[test]
    fn single_oscillator_thermal_spectrum() {
        let mass = 1e-6;
        let omega_m = 1.2e7;
        let q = 1e6;
        let osc = SingleOscillator::new(mass, omega_m, LossModel::constant(q).unwrap()).unwrap();
        let t = 4.0;
        let mut x: u64 = 12345;
        for _ in 0..20 {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let omega = omega_m * (0.01 + 3.0 * (x >> 11) as f64 / (1u64 << 53) as f64);
            let s = thermal_force_spectrum(&osc, t, omega).unwrap();
            let expected = 2.0 * BOLTZMANN * t * mass * omega_m * omega_m / q / omega;
            assert!(rel(s, expected) < 1e-9);
        }
        assert_eq!(thermal_force_spectrum(&osc, 0.0, 1e6).unwrap(), 0.0);
        assert!(matches!(thermal_force_spectrum(&osc, 4.0, 0.0), Err(Error::ZeroFrequency)));
        assert!(thermal_force_spectrum(&osc, -1.0, 1e6).is_err());
    }

    #[test]
    fn kerr_response_has_no_thermal_noise() {
        let kerr = KerrResponse::new(1.4e-8).unwrap();
        assert_eq!(kerr.normalized(3e6).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(thermal_force_spectrum(&kerr, 300.0, 1e6).unwrap(), 0.0);
    }

    #[test]
    fn optical_mass_values() {
        let g = geom();
        let m = silica();
        let m380 = optical_mass(&g, &m, &beam(380e-6));
        assert!((m380 - 4.55e-7).abs() < 5e-10, "m_opt = {m380}");
        let m190 = optical_mass(&g, &m, &beam(190e-6));
        assert!(rel(m380 / m190, 4.0) < 1e-15);
        let w1 = waist_squared(&g, 1).sqrt();
        let w0 = 300e-6;
        let m1 = mode_mass(&g, &m, 1).unwrap();
        let identity = PI * PI / 12.0 * (w1 / w0).powi(2);
        assert!(rel(m1 / optical_mass(&g, &m, &beam(w0)), identity) < 1e-14);
    }

    #[test]
    fn single_mode_flat_limit_recovers_fundamental_mass() {
        let g = PlanoConvexGeometry::new(1.5e-3, 1.5e12).unwrap();
        let m = silica();
        let opt = beam(1e-9);
        let catalog = ModeCatalog::listed_from(&g, &m, &opt, &[ModeIndex::FUNDAMENTAL]);
        let report = effective_mass(&catalog, &opt, &g, &m, &TruncationPolicy::default()).unwrap();
        assert!(rel(report.m_eff, report.m1) < 1e-6);
    }

    #[test]
    fn default_static_compliance() {
        let catalog = ModeCatalog::plano_convex(geom(), silica());
        let v = static_effective_compliance(&catalog, &beam(200e-6), &TruncationPolicy::default());
        assert!(v.converged);
        assert!(rel(v.chi.re, 1.4e-8) < 0.05, "chi0 = {:e}", v.chi.re);
        assert_eq!(v.chi.im, 0.0);
    }

    #[test]
    fn caps_report_non_convergence() {
        let catalog = ModeCatalog::plano_convex(geom(), silica());
        let trunc = TruncationPolicy::new(1e-3, 10, 10).unwrap();
        let v = static_effective_compliance(&catalog, &beam(200e-6), &trunc);
        assert!(!v.converged);
        assert_eq!(v.mode_count, 110);
        let err = effective_mass(&catalog, &beam(200e-6), &geom(), &silica(), &trunc).unwrap_err();
        assert!(matches!(err, Error::TruncationNotConverged { modes: 110, .. }));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn hermitian_and_passive(x in 0.01f64..3.0, w0 in 100e-6f64..1e-3) {
            let g = geom();
            let m = silica();
            let omega = x * fundamental_frequency(&g, &m);
            let catalog = ModeCatalog::plano_convex(g, m);
            let loss = LossModel::constant(1e6).unwrap();
            let trunc = TruncationPolicy::new(1e-2, 100_000, 100_000).unwrap();
            let plus = effective_susceptibility(&catalog, &beam(w0), &loss, &trunc, omega).unwrap();
            let minus = effective_susceptibility(&catalog, &beam(w0), &loss, &trunc, -omega).unwrap();
            prop_assert_eq!(minus.chi, plus.chi.conj());
            prop_assert!(plus.chi.im > 0.0);
        }

        #[test]
        fn listed_response_is_hermitian_with_viscous_loss(x in 0.01f64..5.0) {
            let g = geom();
            let m = silica();
            let omega_m = fundamental_frequency(&g, &m);
            let idx: Vec<ModeIndex> = (1..4).flat_map(|n| (0..3).map(move |p| ModeIndex::new(n, p).unwrap())).collect();
            let catalog = ModeCatalog::listed_from(&g, &m, &beam(300e-6), &idx);
            let loss = LossModel::viscous(1e5, omega_m).unwrap();
            let trunc = TruncationPolicy::default();
            let plus = effective_susceptibility(&catalog, &beam(300e-6), &loss, &trunc, x * omega_m).unwrap();
            let minus = effective_susceptibility(&catalog, &beam(300e-6), &loss, &trunc, -x * omega_m).unwrap();
            prop_assert_eq!(minus.chi, plus.chi.conj());
            prop_assert!(plus.chi.im > 0.0);
        }
    }
}
