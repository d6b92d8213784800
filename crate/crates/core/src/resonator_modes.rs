//! Compression acoustic modes of a thin plano-convex resonator.
//!
//! In the paraxial regime (central thickness `h0` much smaller than the
//! curvature radius `R` of the convex side) the cylindrically symmetric
//! compression modes are Gauss-Laguerre beams labelled by a longitudinal
//! index `n >= 1` and a transverse index `p >= 0`:
//!
//! ```text
//! u_np(r, z) = exp(-r^2/w_n^2) L_p(2 r^2/w_n^2) cos(n pi z / h(r)),   h(r) = h0 - r^2/2R
//! w_n^2      = (2 h0 / n pi) sqrt(R h0)
//! W_np^2     = W_M^2 [n^2 + (2/pi) sqrt(h0/R) n (2p + 1)],            W_M = pi c_l / h0
//! M_n        = (pi/4) rho h0 w_n^2
//! ```
//!
//! Modes have unit peak displacement; the mode mass absorbs the volume
//! integral. Shear modes carry no longitudinal displacement on the coated
//! face and are not part of the catalog.

use std::f64::consts::PI;

use crate::error::{invalid, require_positive, Error, Result};

/// Bulk material of the resonator.
///
/// The transverse sound velocity is carried for completeness; the
/// compression-mode formulas depend only on the longitudinal velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialProperties {
    density: f64,
    longitudinal_velocity: f64,
    transverse_velocity: f64,
    quality_factor: f64,
}

impl MaterialProperties {
    pub fn new(
        density: f64,
        longitudinal_velocity: f64,
        transverse_velocity: f64,
        quality_factor: f64,
    ) -> Result<Self> {
        require_positive("density", density)?;
        require_positive("longitudinal_velocity", longitudinal_velocity)?;
        if !(transverse_velocity.is_finite() && transverse_velocity >= 0.0) {
            return Err(invalid(
                "transverse_velocity",
                format!("must be finite and >= 0, got {transverse_velocity}"),
            ));
        }
        require_positive("quality_factor", quality_factor)?;
        Ok(Self {
            density,
            longitudinal_velocity,
            transverse_velocity,
            quality_factor,
        })
    }

    /// Fused silica with a mechanical quality factor of 10^6.
    pub fn fused_silica() -> Self {
        Self {
            density: 2200.0,
            longitudinal_velocity: 5960.0,
            transverse_velocity: 3764.0,
            quality_factor: 1e6,
        }
    }

    /// Mass density (kg/m^3).
    pub fn density(&self) -> f64 {
        self.density
    }

    /// Longitudinal sound velocity (m/s).
    pub fn longitudinal_velocity(&self) -> f64 {
        self.longitudinal_velocity
    }

    /// Transverse sound velocity (m/s).
    pub fn transverse_velocity(&self) -> f64 {
        self.transverse_velocity
    }

    /// Quality factor of the fundamental mode.
    pub fn quality_factor(&self) -> f64 {
        self.quality_factor
    }

    /// Same material with every sound velocity scaled by `factor`.
    pub fn with_scaled_velocities(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.density,
            self.longitudinal_velocity * factor,
            self.transverse_velocity * factor,
            self.quality_factor,
        )
    }
}

/// Plano-convex resonator: central thickness and curvature radius of the
/// convex side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanoConvexGeometry {
    thickness: f64,
    curvature_radius: f64,
}

impl PlanoConvexGeometry {
    /// Accepts any `0 < h0 < R`. The formulas assume `h0 << R`; see
    /// [`paraxial_ratio`](Self::paraxial_ratio).
    pub fn new(thickness: f64, curvature_radius: f64) -> Result<Self> {
        require_positive("thickness", thickness)?;
        require_positive("curvature_radius", curvature_radius)?;
        if thickness >= curvature_radius {
            return Err(invalid(
                "thickness",
                format!("central thickness {thickness} must be smaller than the curvature radius {curvature_radius}"),
            ));
        }
        Ok(Self {
            thickness,
            curvature_radius,
        })
    }

    /// Central thickness `h0` (m).
    pub fn thickness(&self) -> f64 {
        self.thickness
    }

    /// Curvature radius `R` of the convex side (m).
    pub fn curvature_radius(&self) -> f64 {
        self.curvature_radius
    }

    /// `h0 / R`, the small parameter of the paraxial approximation.
    pub fn paraxial_ratio(&self) -> f64 {
        self.thickness / self.curvature_radius
    }

    /// Local thickness `h(r) = h0 - r^2 / 2R`.
    pub fn thickness_at(&self, r: f64) -> f64 {
        self.thickness - r * r / (2.0 * self.curvature_radius)
    }

    /// Radius where the local thickness vanishes, `sqrt(2 R h0)`.
    pub fn aperture_radius(&self) -> f64 {
        (2.0 * self.curvature_radius * self.thickness).sqrt()
    }

    /// Coefficient `(2/pi) sqrt(h0/R)` of the transverse frequency shift.
    pub(crate) fn transverse_shift(&self) -> f64 {
        2.0 / PI * self.paraxial_ratio().sqrt()
    }
}

/// Mode label: longitudinal index `n >= 1`, transverse index `p >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeIndex {
    n: u32,
    p: u32,
}

impl ModeIndex {
    pub fn new(n: u32, p: u32) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "longitudinal index must be >= 1"));
        }
        Ok(Self { n, p })
    }

    /// The fundamental mode {1, 0}.
    pub const FUNDAMENTAL: ModeIndex = ModeIndex { n: 1, p: 0 };

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn p(&self) -> u32 {
        self.p
    }
}

/// One compression mode together with its waist, frequency and mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcousticMode {
    pub index: ModeIndex,
    /// Acoustic waist `w_n` (m).
    pub waist: f64,
    /// Angular eigenfrequency `W_np` (rad/s).
    pub frequency: f64,
    /// Mode mass `M_n` (kg).
    pub mass: f64,
}

impl AcousticMode {
    pub fn new(geom: &PlanoConvexGeometry, mat: &MaterialProperties, index: ModeIndex) -> Self {
        let waist = waist_squared(geom, index.n).sqrt();
        Self {
            index,
            waist,
            frequency: mode_frequency(geom, mat, index),
            mass: mass_of(geom, mat, index.n),
        }
    }

    /// Modal stiffness `M_n W_np^2` (N/m).
    pub fn stiffness(&self) -> f64 {
        self.mass * self.frequency * self.frequency
    }
}

/// Fundamental angular frequency `W_M = pi c_l / h0` (rad/s).
pub fn fundamental_frequency(geom: &PlanoConvexGeometry, mat: &MaterialProperties) -> f64 {
    PI * mat.longitudinal_velocity / geom.thickness
}

pub(crate) fn waist_squared(geom: &PlanoConvexGeometry, n: u32) -> f64 {
    let h0 = geom.thickness;
    2.0 * h0 / (n as f64 * PI) * (geom.curvature_radius * h0).sqrt()
}

/// Acoustic waist `w_n` (m) of the modes with longitudinal index `n`.
pub fn acoustic_waist(geom: &PlanoConvexGeometry, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n", "longitudinal index must be >= 1"));
    }
    Ok(waist_squared(geom, n).sqrt())
}

/// Angular eigenfrequency `W_np` (rad/s).
pub fn mode_frequency(geom: &PlanoConvexGeometry, mat: &MaterialProperties, idx: ModeIndex) -> f64 {
    let n = idx.n as f64;
    let transverse = geom.transverse_shift() * n * (2.0 * idx.p as f64 + 1.0);
    fundamental_frequency(geom, mat) * (n * n + transverse).sqrt()
}

fn mass_of(geom: &PlanoConvexGeometry, mat: &MaterialProperties, n: u32) -> f64 {
    PI / 4.0 * mat.density * geom.thickness * waist_squared(geom, n)
}

/// Mode mass `M_n = (pi/4) rho h0 w_n^2` (kg); independent of `p`.
pub fn mode_mass(geom: &PlanoConvexGeometry, mat: &MaterialProperties, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n", "longitudinal index must be >= 1"));
    }
    Ok(mass_of(geom, mat, n))
}

/// Dimensionless longitudinal displacement `u_np(r, z)` at radius `r` and
/// depth `z` below the coated face.
///
/// Valid on the body: `r` below the aperture radius (positive local
/// thickness) and `0 <= z <= h(r)`.
pub fn displacement(mode: &AcousticMode, geom: &PlanoConvexGeometry, r: f64, z: f64) -> Result<f64> {
    let h = geom.thickness_at(r);
    if !(r >= 0.0 && h > 0.0 && z >= 0.0 && z <= h) {
        return Err(Error::OutsideBody { r, z });
    }
    let x = r * r / (mode.waist * mode.waist);
    let axial = (mode.index.n as f64 * PI * z / h).cos();
    Ok((-x).exp() * laguerre(mode.index.p, 2.0 * x) * axial)
}

/// Laguerre polynomial `L_p(x)` by forward three-term recurrence
/// `(k+1) L_{k+1} = (2k+1-x) L_k - k L_{k-1}`.
pub fn laguerre(p: u32, x: f64) -> f64 {
    let mut prev = 1.0;
    if p == 0 {
        return prev;
    }
    let mut cur = 1.0 - x;
    for k in 1..p {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 - x) * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reference_geometry() -> PlanoConvexGeometry {
        PlanoConvexGeometry::new(1.5e-3, 0.15).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn fundamental_frequency_of_silica_plate() {
        let f = fundamental_frequency(&reference_geometry(), &MaterialProperties::fused_silica()) / (2.0 * PI);
        assert!(rel(f, 1.986_666_7e6) < 1e-7);
        assert!(rel(f, 2e6) < 0.02);
    }

    #[test]
    fn fundamental_frequency_trivial_cases() {
        let mat = MaterialProperties::new(1000.0, PI, 0.0, 10.0).unwrap();
        let geom = PlanoConvexGeometry::new(1.0, 10.0).unwrap();
        assert!(rel(fundamental_frequency(&geom, &mat), PI * PI) < 1e-15);

        let silica = MaterialProperties::fused_silica();
        let thick = PlanoConvexGeometry::new(3e-3, 0.15).unwrap();
        let ratio = fundamental_frequency(&reference_geometry(), &silica) / fundamental_frequency(&thick, &silica);
        assert!(rel(ratio, 2.0) < 1e-15);
    }

    #[test]
    fn acoustic_waists() {
        let geom = reference_geometry();
        let w1 = acoustic_waist(&geom, 1).unwrap();
        assert!((w1 - 3.785e-3).abs() < 5e-7, "w1 = {w1}");
        let w2 = acoustic_waist(&geom, 2).unwrap();
        assert!((w2 - 2.676e-3).abs() < 5e-7, "w2 = {w2}");
        for n in 1..100 {
            let wn = acoustic_waist(&geom, n).unwrap();
            assert!(rel(wn, w1 / (n as f64).sqrt()) < 1e-14);
        }
        assert!(acoustic_waist(&geom, 0).is_err());
    }

    #[test]
    fn mode_frequency_closed_form() {
        // h0/R = 0.01: W_10 = W_M sqrt(1 + 0.2/pi)
        let geom = PlanoConvexGeometry::new(1e-3, 0.1).unwrap();
        let mat = MaterialProperties::fused_silica();
        let om = fundamental_frequency(&geom, &mat);
        let w10 = mode_frequency(&geom, &mat, ModeIndex::FUNDAMENTAL);
        assert!(rel(w10, om * (1.0 + 0.2 / PI).sqrt()) < 1e-15);
        assert!((w10 / om - 1.0313).abs() < 5e-5);

        // Flat limit: W_np -> n W_M.
        let flat = PlanoConvexGeometry::new(1e-3, 1e12).unwrap();
        for n in 1..5 {
            let w = mode_frequency(&flat, &mat, ModeIndex::new(n, 3).unwrap());
            assert!(rel(w, n as f64 * om) < 1e-6);
        }
    }

    #[test]
    fn mode_masses() {
        let geom = reference_geometry();
        let mat = MaterialProperties::fused_silica();
        let m1 = mode_mass(&geom, &mat, 1).unwrap();
        assert!(rel(m1, 3.71e-5) < 1e-3, "m1 = {m1}");
        let m4 = mode_mass(&geom, &mat, 4).unwrap();
        assert!((m4 - 9.28e-6).abs() < 5e-9, "m4 = {m4}");
        for n in 1..=1000 {
            let mn = mode_mass(&geom, &mat, n).unwrap();
            assert!(rel(mn * n as f64, m1) < 4.0 * f64::EPSILON);
        }
        assert!(mode_mass(&geom, &mat, 0).is_err());
    }

    #[test]
    fn monotonic_over_index_grid() {
        let geom = reference_geometry();
        let mat = MaterialProperties::fused_silica();
        for n in 1..=50 {
            for p in 0..=50 {
                let here = mode_frequency(&geom, &mat, ModeIndex::new(n, p).unwrap());
                let up_p = mode_frequency(&geom, &mat, ModeIndex::new(n, p + 1).unwrap());
                let up_n = mode_frequency(&geom, &mat, ModeIndex::new(n + 1, p).unwrap());
                assert!(up_p > here && up_n > here);
            }
            assert!(acoustic_waist(&geom, n + 1).unwrap() < acoustic_waist(&geom, n).unwrap());
        }
    }

    #[test]
    fn displacement_special_points() {
        let geom = reference_geometry();
        let mat = MaterialProperties::fused_silica();
        for (n, p) in [(1, 0), (3, 2), (7, 11)] {
            let mode = AcousticMode::new(&geom, &mat, ModeIndex::new(n, p).unwrap());
            assert_eq!(displacement(&mode, &geom, 0.0, 0.0).unwrap(), 1.0);
        }
        let m10 = AcousticMode::new(&geom, &mat, ModeIndex::new(2, 0).unwrap());
        let at_waist = displacement(&m10, &geom, m10.waist, 0.0).unwrap();
        assert!(rel(at_waist, (-1.0f64).exp()) < 1e-15);

        let m11 = AcousticMode::new(&geom, &mat, ModeIndex::new(1, 1).unwrap());
        let node = displacement(&m11, &geom, m11.waist / 2f64.sqrt(), 0.0).unwrap();
        assert!(node.abs() < 1e-15);
    }

    #[test]
    fn displacement_rejects_points_outside_body() {
        let geom = reference_geometry();
        let mode = AcousticMode::new(&geom, &MaterialProperties::fused_silica(), ModeIndex::FUNDAMENTAL);
        assert!(displacement(&mode, &geom, geom.aperture_radius(), 0.0).is_err());
        assert!(displacement(&mode, &geom, 0.0, -1e-6).is_err());
        assert!(displacement(&mode, &geom, 0.0, 1.6e-3).is_err());
        assert!(displacement(&mode, &geom, 1e-3, geom.thickness_at(1e-3)).is_ok());
    }

    #[test]
    fn laguerre_values() {
        for x in [-3.0, 0.0, 0.7, 12.0] {
            assert_eq!(laguerre(0, x), 1.0);
            assert_eq!(laguerre(1, x), 1.0 - x);
            let series = 1.0 - 2.0 * x + x * x / 2.0;
            assert!((laguerre(2, x) - series).abs() <= 1e-14 * series.abs().max(1.0));
        }
        assert_eq!(laguerre(1, 3.0), -2.0);
        assert_eq!(laguerre(2, 2.0), -1.0);
        for p in 0..=100 {
            assert_eq!(laguerre(p, 0.0), 1.0);
        }
    }

    #[test]
    fn laguerre_matches_explicit_series_at_moderate_order() {
        // L_p(x) = sum_k (-1)^k C(p,k) x^k / k!
        fn series(p: u32, x: f64) -> f64 {
            let mut term = 1.0;
            let mut sum = 1.0;
            for k in 0..p {
                term *= -((p - k) as f64) * x / ((k + 1) as f64 * (k + 1) as f64);
                sum += term;
            }
            sum
        }
        for p in 0..=12 {
            for x in [0.1, 0.5, 1.0, 2.5] {
                assert!((laguerre(p, x) - series(p, x)).abs() < 1e-12, "p={p} x={x}");
            }
        }
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(PlanoConvexGeometry::new(0.2, 0.15).is_err());
        assert!(PlanoConvexGeometry::new(-1.0, 0.15).is_err());
        assert!(MaterialProperties::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(MaterialProperties::new(1.0, 1.0, -1.0, 1.0).is_err());
        assert!(ModeIndex::new(0, 0).is_err());
    }

    proptest! {
        #[test]
        fn velocity_scaling_scales_frequencies_only(
            s in 0.1f64..10.0, n in 1u32..40, p in 0u32..40,
        ) {
            let geom = reference_geometry();
            let mat = MaterialProperties::fused_silica();
            let scaled = mat.with_scaled_velocities(s).unwrap();
            let idx = ModeIndex::new(n, p).unwrap();
            let a = AcousticMode::new(&geom, &mat, idx);
            let b = AcousticMode::new(&geom, &scaled, idx);
            prop_assert!(rel(b.frequency, s * a.frequency) < 1e-14);
            prop_assert_eq!(a.waist, b.waist);
            prop_assert_eq!(a.mass, b.mass);
        }

        #[test]
        fn gaussian_mode_bounded_on_face(n in 1u32..20, r_frac in 0.0f64..0.999) {
            let geom = reference_geometry();
            let mode = AcousticMode::new(&geom, &MaterialProperties::fused_silica(), ModeIndex::new(n, 0).unwrap());
            let u = displacement(&mode, &geom, r_frac * geom.aperture_radius(), 0.0).unwrap();
            prop_assert!(u.abs() <= 1.0);
        }

        #[test]
        fn displacement_finite_on_body(
            n in 1u32..30, p in 0u32..60, r_frac in 0.0f64..0.99, z_frac in 0.0f64..=1.0,
        ) {
            let geom = reference_geometry();
            let mode = AcousticMode::new(&geom, &MaterialProperties::fused_silica(), ModeIndex::new(n, p).unwrap());
            let r = r_frac * geom.aperture_radius();
            let u = displacement(&mode, &geom, r, z_frac * geom.thickness_at(r)).unwrap();
            prop_assert!(u.is_finite());
        }
    }
}
