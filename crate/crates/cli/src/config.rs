//! Flat `key = value` run configuration.
//!
//! Keys are dotted section paths with SI units in their names. `#` starts a
//! comment. Keys under `report.` are skipped so that a run report can be fed
//! back as a configuration. Every key is optional and falls back to the
//! defaults below.
//!
//! ```text
//! material.rho_kg_m3 = 2200
//! material.c_l_m_s = 5960
//! material.c_t_m_s = 3764
//! material.q_factor = 1e6
//! geometry.h0_m = 1.5e-3
//! geometry.r_curv_m = 0.15
//! optics.lambda_m = 800e-9
//! optics.waist_m = 200e-6
//! cavity.gamma = 1e-5
//! cavity.omega_cav_over_omega_m = 1        # or cavity.tau_s
//! cavity.psi_bar_over_gamma = -0.2         # or cavity.psi0_over_gamma
//! drive.p_in_w = 0.01
//! environment.temperature_k = 4
//! numerics.rel_tol = 1e-3
//! numerics.n_max = 10000000
//! numerics.p_max = 10000000
//! numerics.loss_model = constant           # or viscous
//! numerics.freq_grid.min = 0.01            # in units of Omega_M
//! numerics.freq_grid.max = 3
//! numerics.freq_grid.points = 300
//! numerics.freq_grid.spacing = linear      # or log
//! numerics.theta_points = 720
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialConfig {
    pub rho_kg_m3: f64,
    pub c_l_m_s: f64,
    pub c_t_m_s: f64,
    pub q_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryConfig {
    pub h0_m: f64,
    pub r_curv_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticsConfig {
    pub lambda_m: f64,
    pub waist_m: f64,
}

/// How the cavity delay is given.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CavityTiming {
    /// `Omega_cav / Omega_M`, with `Omega_cav = gamma / tau`.
    BandwidthOverOmegaM(f64),
    /// Round-trip time (s).
    Tau(f64),
}

/// Which detuning is held fixed, in units of `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetuningAnchor {
    MeanOverGamma(f64),
    EmptyOverGamma(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityConfig {
    pub gamma: f64,
    pub timing: CavityTiming,
    pub anchor: DetuningAnchor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    Constant,
    Viscous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// Frequency grid in units of `Omega_M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreqGrid {
    pub min: f64,
    pub max: f64,
    pub points: u32,
    pub spacing: Spacing,
}

impl FreqGrid {
    /// Grid values in units of `Omega_M`.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points as usize;
        match self.spacing {
            Spacing::Linear => linear_grid(self.min, self.max, n),
            Spacing::Log => log_grid(self.min, self.max, n),
        }
    }
}

/// `points` values from `lo` to `hi`, evenly spaced on a log scale.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|i| {
                if i + 1 == points {
                    hi
                } else {
                    lo * (hi / lo).powf(i as f64 / (points - 1) as f64)
                }
            })
            .collect(),
    }
}

/// `points` values from `lo` to `hi`, evenly spaced.
pub fn linear_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|i| {
                if i + 1 == points {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (points - 1) as f64
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericsConfig {
    pub rel_tol: f64,
    pub n_max: u32,
    pub p_max: u32,
    pub loss_model: LossKind,
    pub freq_grid: FreqGrid,
    pub theta_points: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub material: MaterialConfig,
    pub geometry: GeometryConfig,
    pub optics: OpticsConfig,
    pub cavity: CavityConfig,
    pub p_in_w: f64,
    pub temperature_k: f64,
    pub numerics: NumericsConfig,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            material: MaterialConfig {
                rho_kg_m3: 2200.0,
                c_l_m_s: 5960.0,
                c_t_m_s: 3764.0,
                q_factor: 1e6,
            },
            geometry: GeometryConfig {
                h0_m: 1.5e-3,
                r_curv_m: 0.15,
            },
            optics: OpticsConfig {
                lambda_m: 800e-9,
                waist_m: 200e-6,
            },
            cavity: CavityConfig {
                gamma: 1e-5,
                timing: CavityTiming::BandwidthOverOmegaM(1.0),
                anchor: DetuningAnchor::MeanOverGamma(-0.2),
            },
            p_in_w: 0.01,
            temperature_k: 4.0,
            numerics: NumericsConfig {
                rel_tol: 1e-3,
                n_max: 10_000_000,
                p_max: 10_000_000,
                loss_model: LossKind::Constant,
                freq_grid: FreqGrid {
                    min: 0.01,
                    max: 3.0,
                    points: 300,
                    spacing: Spacing::Linear,
                },
                theta_points: 720,
            },
        }
    }
}

struct Entry {
    line: usize,
    value: String,
}

/// Parsed entries, consumed key by key so leftovers can be reported.
struct Entries(BTreeMap<String, Entry>);

impl Entries {
    fn take(&mut self, key: &str) -> Option<Entry> {
        self.0.remove(key)
    }

    fn f64(&mut self, key: &str, target: &mut f64) -> Result<(), CliError> {
        if let Some(e) = self.take(key) {
            *target = e
                .value
                .parse()
                .map_err(|_| diag(e.line, key, format!("expected a number, got `{}`", e.value)))?;
            if !target.is_finite() {
                return Err(diag(e.line, key, "must be finite"));
            }
        }
        Ok(())
    }

    fn u32(&mut self, key: &str, target: &mut u32) -> Result<(), CliError> {
        if let Some(e) = self.take(key) {
            *target = e
                .value
                .parse()
                .map_err(|_| diag(e.line, key, format!("expected a non-negative integer, got `{}`", e.value)))?;
        }
        Ok(())
    }

    fn number(&mut self, key: &str) -> Result<Option<(usize, f64)>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some(e) => {
                let v: f64 = e
                    .value
                    .parse()
                    .map_err(|_| diag(e.line, key, format!("expected a number, got `{}`", e.value)))?;
                if !v.is_finite() {
                    return Err(diag(e.line, key, "must be finite"));
                }
                Ok(Some((e.line, v)))
            }
        }
    }
}

fn diag(line: usize, key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("line {line}: {key}: {msg}"))
}

fn field(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {msg}"))
}

impl SimulationConfig {
    /// Parses configuration text, then validates ranges.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(CliError::Config(format!("line {line}: expected `key = value`, got `{content}`")));
            };
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || value.is_empty() {
                return Err(CliError::Config(format!("line {line}: expected `key = value`, got `{content}`")));
            }
            if key.starts_with("report.") {
                continue;
            }
            if let Some(previous) = map.insert(
                key.to_string(),
                Entry {
                    line,
                    value: value.to_string(),
                },
            ) {
                return Err(diag(line, key, format!("already set on line {}", previous.line)));
            }
        }
        let mut entries = Entries(map);
        let mut c = Self::default();

        entries.f64("material.rho_kg_m3", &mut c.material.rho_kg_m3)?;
        entries.f64("material.c_l_m_s", &mut c.material.c_l_m_s)?;
        entries.f64("material.c_t_m_s", &mut c.material.c_t_m_s)?;
        entries.f64("material.q_factor", &mut c.material.q_factor)?;
        entries.f64("geometry.h0_m", &mut c.geometry.h0_m)?;
        entries.f64("geometry.r_curv_m", &mut c.geometry.r_curv_m)?;
        entries.f64("optics.lambda_m", &mut c.optics.lambda_m)?;
        entries.f64("optics.waist_m", &mut c.optics.waist_m)?;
        entries.f64("cavity.gamma", &mut c.cavity.gamma)?;

        c.cavity.timing = match (
            entries.number("cavity.omega_cav_over_omega_m")?,
            entries.number("cavity.tau_s")?,
        ) {
            (Some(_), Some((line, _))) => {
                return Err(diag(line, "cavity.tau_s", "conflicts with cavity.omega_cav_over_omega_m; give one"))
            }
            (Some((_, v)), None) => CavityTiming::BandwidthOverOmegaM(v),
            (None, Some((_, v))) => CavityTiming::Tau(v),
            (None, None) => c.cavity.timing,
        };
        c.cavity.anchor = match (
            entries.number("cavity.psi_bar_over_gamma")?,
            entries.number("cavity.psi0_over_gamma")?,
        ) {
            (Some(_), Some((line, _))) => {
                return Err(diag(line, "cavity.psi0_over_gamma", "conflicts with cavity.psi_bar_over_gamma; give one"))
            }
            (Some((_, v)), None) => DetuningAnchor::MeanOverGamma(v),
            (None, Some((_, v))) => DetuningAnchor::EmptyOverGamma(v),
            (None, None) => c.cavity.anchor,
        };

        entries.f64("drive.p_in_w", &mut c.p_in_w)?;
        entries.f64("environment.temperature_k", &mut c.temperature_k)?;
        entries.f64("numerics.rel_tol", &mut c.numerics.rel_tol)?;
        entries.u32("numerics.n_max", &mut c.numerics.n_max)?;
        entries.u32("numerics.p_max", &mut c.numerics.p_max)?;
        if let Some(e) = entries.take("numerics.loss_model") {
            c.numerics.loss_model = match e.value.as_str() {
                "constant" => LossKind::Constant,
                "viscous" => LossKind::Viscous,
                other => {
                    return Err(diag(e.line, "numerics.loss_model", format!("expected constant or viscous, got `{other}`")))
                }
            };
        }
        entries.f64("numerics.freq_grid.min", &mut c.numerics.freq_grid.min)?;
        entries.f64("numerics.freq_grid.max", &mut c.numerics.freq_grid.max)?;
        entries.u32("numerics.freq_grid.points", &mut c.numerics.freq_grid.points)?;
        if let Some(e) = entries.take("numerics.freq_grid.spacing") {
            c.numerics.freq_grid.spacing = match e.value.as_str() {
                "linear" => Spacing::Linear,
                "log" => Spacing::Log,
                other => {
                    return Err(diag(e.line, "numerics.freq_grid.spacing", format!("expected linear or log, got `{other}`")))
                }
            };
        }
        entries.u32("numerics.theta_points", &mut c.numerics.theta_points)?;

        if let Some((key, e)) = entries.0.iter().next() {
            return Err(diag(e.line, key, "unknown key"));
        }
        c.validate()?;
        Ok(c)
    }

    /// Range checks that do not depend on the command.
    pub fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("material.rho_kg_m3", self.material.rho_kg_m3),
            ("material.c_l_m_s", self.material.c_l_m_s),
            ("material.c_t_m_s", self.material.c_t_m_s),
            ("material.q_factor", self.material.q_factor),
            ("geometry.h0_m", self.geometry.h0_m),
            ("geometry.r_curv_m", self.geometry.r_curv_m),
            ("optics.lambda_m", self.optics.lambda_m),
            ("optics.waist_m", self.optics.waist_m),
            ("cavity.gamma", self.cavity.gamma),
        ];
        for (key, v) in positive {
            if !(v > 0.0) {
                return Err(field(key, format!("must be positive, got {v:e}")));
            }
        }
        if self.cavity.gamma >= 0.1 {
            return Err(field("cavity.gamma", "must be below 0.1"));
        }
        match self.cavity.timing {
            CavityTiming::BandwidthOverOmegaM(v) if !(v > 0.0) => {
                return Err(field("cavity.omega_cav_over_omega_m", format!("must be positive, got {v:e}")))
            }
            CavityTiming::Tau(v) if !(v > 0.0) => return Err(field("cavity.tau_s", format!("must be positive, got {v:e}"))),
            _ => {}
        }
        if self.geometry.h0_m >= self.geometry.r_curv_m {
            return Err(field("geometry.h0_m", "must be smaller than geometry.r_curv_m"));
        }
        if !(self.p_in_w >= 0.0) {
            return Err(field("drive.p_in_w", "must be >= 0"));
        }
        if !(self.temperature_k >= 0.0) {
            return Err(field("environment.temperature_k", "must be >= 0"));
        }
        if !(self.numerics.rel_tol > 0.0 && self.numerics.rel_tol < 1.0) {
            return Err(field("numerics.rel_tol", "must lie in (0, 1)"));
        }
        if self.numerics.n_max < 1 {
            return Err(field("numerics.n_max", "must be at least 1"));
        }
        if self.numerics.p_max < 1 {
            return Err(field("numerics.p_max", "must be at least 1"));
        }
        let g = self.numerics.freq_grid;
        if g.points < 1 {
            return Err(field("numerics.freq_grid.points", "must be at least 1"));
        }
        if g.max < g.min {
            return Err(field("numerics.freq_grid.max", "must not be below numerics.freq_grid.min"));
        }
        if g.spacing == Spacing::Log && !(g.min > 0.0) {
            return Err(field("numerics.freq_grid.min", "log spacing needs a positive minimum"));
        }
        if self.numerics.theta_points < 1 {
            return Err(field("numerics.theta_points", "must be at least 1"));
        }
        Ok(())
    }

    /// Every setting as `(key, value)`, in a form [`parse`](Self::parse)
    /// reads back to an equal configuration.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![
            ("material.rho_kg_m3", format!("{:e}", self.material.rho_kg_m3)),
            ("material.c_l_m_s", format!("{:e}", self.material.c_l_m_s)),
            ("material.c_t_m_s", format!("{:e}", self.material.c_t_m_s)),
            ("material.q_factor", format!("{:e}", self.material.q_factor)),
            ("geometry.h0_m", format!("{:e}", self.geometry.h0_m)),
            ("geometry.r_curv_m", format!("{:e}", self.geometry.r_curv_m)),
            ("optics.lambda_m", format!("{:e}", self.optics.lambda_m)),
            ("optics.waist_m", format!("{:e}", self.optics.waist_m)),
            ("cavity.gamma", format!("{:e}", self.cavity.gamma)),
        ];
        out.push(match self.cavity.timing {
            CavityTiming::BandwidthOverOmegaM(v) => ("cavity.omega_cav_over_omega_m", format!("{v:e}")),
            CavityTiming::Tau(v) => ("cavity.tau_s", format!("{v:e}")),
        });
        out.push(match self.cavity.anchor {
            DetuningAnchor::MeanOverGamma(v) => ("cavity.psi_bar_over_gamma", format!("{v:e}")),
            DetuningAnchor::EmptyOverGamma(v) => ("cavity.psi0_over_gamma", format!("{v:e}")),
        });
        let n = &self.numerics;
        out.extend([
            ("drive.p_in_w", format!("{:e}", self.p_in_w)),
            ("environment.temperature_k", format!("{:e}", self.temperature_k)),
            ("numerics.rel_tol", format!("{:e}", n.rel_tol)),
            ("numerics.n_max", n.n_max.to_string()),
            ("numerics.p_max", n.p_max.to_string()),
            (
                "numerics.loss_model",
                match n.loss_model {
                    LossKind::Constant => "constant",
                    LossKind::Viscous => "viscous",
                }
                .to_string(),
            ),
            ("numerics.freq_grid.min", format!("{:e}", n.freq_grid.min)),
            ("numerics.freq_grid.max", format!("{:e}", n.freq_grid.max)),
            ("numerics.freq_grid.points", n.freq_grid.points.to_string()),
            (
                "numerics.freq_grid.spacing",
                match n.freq_grid.spacing {
                    Spacing::Linear => "linear",
                    Spacing::Log => "log",
                }
                .to_string(),
            ),
            ("numerics.theta_points", n.theta_points.to_string()),
        ]);
        out
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}
