//! Mean-field working point of the cavity.
//!
//! The intracavity photon flux `I` and the mean detuning `Psi` satisfy
//!
//! ```text
//! (gamma^2 + Psi^2) I = 2 gamma (lambda / h c) P_in
//! Psi = Psi0 + Psi_NL,       Psi_NL = 4 hbar k^2 chi_eff[0] I
//! ```
//!
//! With `x = Psi_NL / gamma` and `y = Psi0 / gamma` this is the cubic
//! `x ((x + y)^2 + 1) = d`, whose roots all lie in `[0, d]`. It has three
//! real roots inside a bistable window (possible only when `y^2 > 3`).
//! The sign of `sigma = gamma^2 + Psi^2 + 2 Psi Psi_NL`, which is
//! proportional to `dP_in/dI`, separates stable from unstable branches.

use crate::constants::{HBAR, PLANCK, SPEED_OF_LIGHT};
use crate::error::{invalid, require_positive, Error, Result};

/// Single-port cavity: loss per round trip and round-trip time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    gamma: f64,
    tau: f64,
}

impl CavityParams {
    /// Requires `0 < gamma < 0.1` and `tau > 0`.
    pub fn new(gamma: f64, tau: f64) -> Result<Self> {
        require_positive("gamma", gamma)?;
        if gamma >= 0.1 {
            return Err(invalid("gamma", format!("must be below 0.1 for a high-finesse cavity, got {gamma}")));
        }
        require_positive("tau", tau)?;
        Ok(Self { gamma, tau })
    }

    /// Cavity with bandwidth `gamma / tau = omega_cav`.
    pub fn from_bandwidth(gamma: f64, omega_cav: f64) -> Result<Self> {
        require_positive("omega_cav", omega_cav)?;
        Self::new(gamma, gamma / omega_cav)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Round-trip time (s).
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `pi / gamma`.
    pub fn finesse(&self) -> f64 {
        std::f64::consts::PI / self.gamma
    }

    /// `gamma / tau` (rad/s).
    pub fn bandwidth(&self) -> f64 {
        self.gamma / self.tau
    }
}

/// Incident laser.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drive {
    power: f64,
    wavelength: f64,
}

impl Drive {
    pub fn new(power: f64, wavelength: f64) -> Result<Self> {
        if !(power.is_finite() && power >= 0.0) {
            return Err(invalid("power", format!("must be finite and >= 0, got {power}")));
        }
        require_positive("wavelength", wavelength)?;
        Ok(Self { power, wavelength })
    }

    /// Incident power (W).
    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Same laser at a different power.
    pub fn with_power(&self, power: f64) -> Result<Self> {
        Self::new(power, self.wavelength)
    }

    /// Incident photon flux `lambda P / h c` (1/s).
    fn photon_flux(&self) -> f64 {
        self.wavelength / (PLANCK * SPEED_OF_LIGHT) * self.power
    }
}

/// Which detuning is held fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Anchor {
    /// Mean detuning `Psi` including the nonlinear shift (rad).
    MeanDetuning(f64),
    /// Detuning `Psi0` of the empty cavity (rad).
    EmptyCavityDetuning(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stability {
    StableBranch,
    UnstableBranch,
    TurningPoint,
}

impl Stability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::StableBranch => "stable",
            Self::UnstableBranch => "unstable",
            Self::TurningPoint => "turning_point",
        }
    }
}

/// Position of a solution among the roots at one power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Lower,
    Middle,
    Upper,
    /// Monostable response outside any bistable window.
    Only,
}

impl Branch {
    /// Identifier stable across a power sweep: lower 0, middle 1, upper 2.
    /// A monostable solution reports 0.
    pub fn id(&self) -> u8 {
        match self {
            Self::Lower | Self::Only => 0,
            Self::Middle => 1,
            Self::Upper => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    /// `Psi` (rad).
    pub mean_detuning: f64,
    /// `Psi0` (rad).
    pub empty_detuning: f64,
    /// `Psi_NL` (rad).
    pub nonlinear_phase: f64,
    /// Mean intracavity photon flux (1/s).
    pub intensity: f64,
    /// Real, non-negative mean field `sqrt(I)`.
    pub amplitude: f64,
    /// `sigma / gamma^2`.
    pub sigma_norm: f64,
    pub stability: Stability,
    pub branch: Branch,
}

/// `2 gamma (lambda / h c) P_in / (gamma^2 + Psi^2)` (1/s).
pub fn mean_intensity(cav: &CavityParams, mean_detuning: f64, power: f64, wavelength: f64) -> Result<f64> {
    let drive = Drive::new(power, wavelength)?;
    Ok(intensity_at(cav, &drive, mean_detuning))
}

fn intensity_at(cav: &CavityParams, drive: &Drive, mean_detuning: f64) -> f64 {
    let g = cav.gamma;
    2.0 * g * drive.photon_flux() / (g * g + mean_detuning * mean_detuning)
}

/// `4 hbar k^2 chi_eff[0] I` (rad).
pub fn nonlinear_phase(static_compliance: f64, intensity: f64, wavevector: f64) -> f64 {
    coupling(static_compliance, wavevector) * intensity
}

fn coupling(static_compliance: f64, wavevector: f64) -> f64 {
    4.0 * HBAR * wavevector * wavevector * static_compliance
}

const TURNING_POINT_TOLERANCE: f64 = 1e-12;

/// Normalized slope `(gamma^2 + Psi^2 + 2 Psi Psi_NL) / gamma^2` and the
/// resulting stability tag.
pub fn bistability_slope(gamma: f64, mean_detuning: f64, nonlinear_phase: f64) -> (f64, Stability) {
    let b = mean_detuning / gamma;
    let sigma = 1.0 + b * b + 2.0 * b * (nonlinear_phase / gamma);
    let tag = if sigma.abs() < TURNING_POINT_TOLERANCE {
        Stability::TurningPoint
    } else if sigma > 0.0 {
        Stability::StableBranch
    } else {
        Stability::UnstableBranch
    };
    (sigma, tag)
}

/// All working points for the given drive and detuning anchor, ordered by
/// intensity.
pub fn solve_operating_point(
    cav: &CavityParams,
    drive: &Drive,
    anchor: Anchor,
    static_compliance: f64,
) -> Result<Vec<OperatingPoint>> {
    if !(static_compliance.is_finite() && static_compliance >= 0.0) {
        return Err(invalid(
            "static_compliance",
            format!("must be finite and >= 0, got {static_compliance}"),
        ));
    }
    let k = 2.0 * std::f64::consts::PI / drive.wavelength;
    let c = coupling(static_compliance, k);
    let g = cav.gamma;
    match anchor {
        Anchor::MeanDetuning(psi) => {
            check_detuning(psi)?;
            let intensity = intensity_at(cav, drive, psi);
            let psi_nl = c * intensity;
            Ok(vec![point(g, psi, psi - psi_nl, psi_nl, intensity, Branch::Only)])
        }
        Anchor::EmptyCavityDetuning(psi0) => {
            check_detuning(psi0)?;
            let y = psi0 / g;
            let d = c * 2.0 * g * drive.photon_flux() / (g * g * g);
            if d == 0.0 {
                let intensity = intensity_at(cav, drive, psi0);
                return Ok(vec![point(g, psi0, psi0, c * intensity, intensity, Branch::Only)]);
            }
            let roots = cubic_roots(y, d)?;
            let labels = branch_labels(&roots, y);
            Ok(roots
                .iter()
                .zip(labels)
                .map(|(&x, branch)| {
                    let psi_nl = x * g;
                    let psi = psi0 + psi_nl;
                    point(g, psi, psi0, psi_nl, intensity_at(cav, drive, psi), branch)
                })
                .collect())
        }
    }
}

fn check_detuning(psi: f64) -> Result<()> {
    if psi.is_finite() {
        Ok(())
    } else {
        Err(invalid("detuning", format!("must be finite, got {psi}")))
    }
}

fn point(gamma: f64, psi: f64, psi0: f64, psi_nl: f64, intensity: f64, branch: Branch) -> OperatingPoint {
    let (sigma_norm, stability) = bistability_slope(gamma, psi, psi_nl);
    OperatingPoint {
        mean_detuning: psi,
        empty_detuning: psi0,
        nonlinear_phase: psi_nl,
        intensity,
        amplitude: intensity.sqrt(),
        sigma_norm,
        stability,
        branch,
    }
}

fn cubic(x: f64, y: f64, d: f64) -> f64 {
    let s = x + y;
    x * (s * s + 1.0) - d
}

fn cubic_slope(x: f64, y: f64) -> f64 {
    3.0 * x * x + 4.0 * x * y + y * y + 1.0
}

/// Critical points of the cubic when it has any.
fn critical_points(y: f64) -> Option<(f64, f64)> {
    let disc = y * y - 3.0;
    if disc <= 0.0 {
        return None;
    }
    let r = disc.sqrt();
    Some(((-2.0 * y - r) / 3.0, (-2.0 * y + r) / 3.0))
}

/// Real roots of `x ((x + y)^2 + 1) = d` for `d > 0`, ascending.
fn cubic_roots(y: f64, d: f64) -> Result<Vec<f64>> {
    let mut breaks = vec![0.0];
    if let Some((a, b)) = critical_points(y) {
        for c in [a, b] {
            if c > 0.0 && c < d {
                breaks.push(c);
            }
        }
    }
    breaks.push(d);

    let mut roots: Vec<f64> = Vec::with_capacity(3);
    for pair in breaks.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let (flo, fhi) = (cubic(lo, y, d), cubic(hi, y, d));
        let root = if fhi == 0.0 {
            hi
        } else if flo.signum() != fhi.signum() {
            bisect(lo, hi, y, d)
        } else {
            continue;
        };
        if roots.last().map_or(true, |&r| root > r) {
            roots.push(root);
        }
    }
    if roots.is_empty() {
        return Err(Error::RootNotConverged(format!("no real root bracketed for y = {y}, d = {d}")));
    }
    for &x in &roots {
        let scale = x * ((x + y) * (x + y) + 1.0) + d;
        if cubic(x, y, d).abs() > 1e-12 * scale {
            return Err(Error::RootNotConverged(format!(
                "residual {:e} at x = {x} (y = {y}, d = {d})",
                cubic(x, y, d)
            )));
        }
    }
    Ok(roots)
}

fn bisect(mut lo: f64, mut hi: f64, y: f64, d: f64) -> f64 {
    let rising = cubic(hi, y, d) > cubic(lo, y, d);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f = cubic(mid, y, d);
        if f == 0.0 {
            return mid;
        }
        if (f > 0.0) == rising {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // Newton polish, kept inside the final bracket.
    let mut x = 0.5 * (lo + hi);
    for _ in 0..3 {
        let slope = cubic_slope(x, y);
        if slope == 0.0 {
            break;
        }
        let next = x - cubic(x, y, d) / slope;
        if next < lo || next > hi {
            break;
        }
        x = next;
    }
    x
}

fn branch_labels(roots: &[f64], y: f64) -> Vec<Branch> {
    match roots.len() {
        3 => vec![Branch::Lower, Branch::Middle, Branch::Upper],
        2 => vec![Branch::Lower, Branch::Upper],
        _ => {
            let x = roots[0];
            let label = match critical_points(y) {
                Some((a, _)) if a > 0.0 && x <= a => Branch::Lower,
                Some((_, b)) if b > 0.0 && x >= b => Branch::Upper,
                _ => Branch::Only,
            };
            vec![label]
        }
    }
}
