//! One function per subcommand, each producing its table or key-value body.

use std::f64::consts::PI;

use optomech_core::cavity_steady_state::{solve_operating_point, Anchor, CavityParams, Drive, OperatingPoint, Stability};
use optomech_core::effective_response::{
    optical_mass, static_effective_compliance, susceptibility_spectrum, EffectiveResponse, LossModel,
    MechanicalResponse, ModeCatalog, TruncationPolicy,
};
use optomech_core::optical_overlap::{overlap_analytic, OpticalMode};
use optomech_core::resonator_modes::{
    acoustic_waist, fundamental_frequency, mode_mass, AcousticMode, MaterialProperties, ModeIndex, PlanoConvexGeometry,
};
use optomech_core::squeezing_spectra::{compute_spectrum, QuadratureSpectrum, ReferenceKind, SpectrumSetup};

use crate::config::{CavityTiming, DetuningAnchor, LossKind, SimulationConfig};
use crate::error::CliError;
use crate::output::{num, CommandOutput, Table};

/// Physical objects resolved from a configuration.
pub struct Model {
    pub config: SimulationConfig,
    pub geometry: PlanoConvexGeometry,
    pub material: MaterialProperties,
    pub optical: OpticalMode,
    pub loss: LossModel,
    pub truncation: TruncationPolicy,
    pub cavity: CavityParams,
    pub omega_m: f64,
}

impl Model {
    pub fn new(config: &SimulationConfig) -> Result<Self, CliError> {
        let m = config.material;
        let material = MaterialProperties::new(m.rho_kg_m3, m.c_l_m_s, m.c_t_m_s, m.q_factor)?;
        let geometry = PlanoConvexGeometry::new(config.geometry.h0_m, config.geometry.r_curv_m)?;
        let optical = OpticalMode::new(config.optics.lambda_m, config.optics.waist_m)?;
        let omega_m = fundamental_frequency(&geometry, &material);
        let loss = match config.numerics.loss_model {
            LossKind::Constant => LossModel::constant(m.q_factor)?,
            LossKind::Viscous => LossModel::viscous(m.q_factor, omega_m)?,
        };
        let n = config.numerics;
        let truncation = TruncationPolicy::new(n.rel_tol, n.n_max, n.p_max)?;
        let gamma = config.cavity.gamma;
        let cavity = match config.cavity.timing {
            CavityTiming::BandwidthOverOmegaM(x) => CavityParams::from_bandwidth(gamma, x * omega_m)?,
            CavityTiming::Tau(tau) => CavityParams::new(gamma, tau)?,
        };
        Ok(Self {
            config: *config,
            geometry,
            material,
            optical,
            loss,
            truncation,
            cavity,
            omega_m,
        })
    }

    fn catalog(&self) -> ModeCatalog {
        ModeCatalog::plano_convex(self.geometry, self.material)
    }

    fn response(&self) -> EffectiveResponse {
        EffectiveResponse::new(self.catalog(), self.optical, self.loss, self.truncation)
    }

    fn anchor(&self) -> Anchor {
        let g = self.config.cavity.gamma;
        match self.config.cavity.anchor {
            DetuningAnchor::MeanOverGamma(x) => Anchor::MeanDetuning(x * g),
            DetuningAnchor::EmptyOverGamma(x) => Anchor::EmptyCavityDetuning(x * g),
        }
    }

    fn drive(&self, power: f64) -> Result<Drive, CliError> {
        Ok(Drive::new(power, self.config.optics.lambda_m)?)
    }

    fn grid(&self) -> Vec<f64> {
        self.config.numerics.freq_grid.values()
    }
}

fn static_output(resp: &EffectiveResponse, out: &mut CommandOutput) {
    let v = resp.static_value();
    out.chi_eff0 = Some(v.chi.re);
    out.mode_count = out.mode_count.max(v.mode_count);
    out.converged &= v.converged;
    if !v.converged {
        out.warnings.push(format!(
            "static compliance hit the truncation caps after {} modes",
            v.mode_count
        ));
    }
}

fn started() -> CommandOutput {
    CommandOutput {
        converged: true,
        ..Default::default()
    }
}

/// Closed-form mode table for `n = 1..=n_limit`, `p = 0..p_limit`.
pub fn modes(model: &Model, n_limit: u32, p_limit: u32) -> Result<CommandOutput, CliError> {
    if n_limit < 1 || p_limit < 1 {
        return Err(CliError::Config("--n-limit and --p-limit must be at least 1".into()));
    }
    let mut table = Table::new(&["n", "p", "omega_np_rad_s", "f_np_hz", "w_n_m", "m_n_kg", "overlap"]);
    for n in 1..=n_limit {
        for p in 0..p_limit {
            let idx = ModeIndex::new(n, p)?;
            let mode = AcousticMode::new(&model.geometry, &model.material, idx);
            table.row(&[
                n.to_string(),
                p.to_string(),
                num(mode.frequency),
                num(mode.frequency / (2.0 * PI)),
                num(mode.waist),
                num(mode.mass),
                num(overlap_analytic(&model.optical, &model.geometry, idx).value),
            ]);
        }
    }
    let mut out = started();
    out.body = table.into_string();
    out.mode_count = u64::from(n_limit) * u64::from(p_limit);
    Ok(out)
}

/// Effective susceptibility over the configured grid.
pub fn susceptibility(model: &Model) -> Result<CommandOutput, CliError> {
    let resp = model.response();
    let mut out = started();
    static_output(&resp, &mut out);
    let omega: Vec<f64> = model.grid().iter().map(|x| x * model.omega_m).collect();
    let spectrum = susceptibility_spectrum(&resp, &omega)?;
    let chi0 = resp.static_compliance();
    let mut table = Table::new(&["omega_rad_s", "re_chi_eff_m_n", "im_chi_eff_m_n", "re_chi_tilde", "im_chi_tilde"]);
    let mut truncated = 0;
    for (w, v) in spectrum.omega.iter().zip(&spectrum.values) {
        let tilde = v.chi / chi0;
        table.row(&[num(*w), num(v.chi.re), num(v.chi.im), num(tilde.re), num(tilde.im)]);
        out.mode_count = out.mode_count.max(v.mode_count);
        if !v.converged {
            truncated += 1;
        }
    }
    if truncated > 0 {
        out.converged = false;
        out.warnings.push(format!("{truncated} frequencies hit the truncation caps"));
    }
    out.body = table.into_string();
    Ok(out)
}

/// Effective and optical masses as the optical waist shrinks below `w_1`.
pub fn mass_scan(model: &Model, ratios: &[f64]) -> Result<CommandOutput, CliError> {
    if let Some(r) = ratios.iter().find(|r| !(**r >= 1.0 && r.is_finite())) {
        return Err(CliError::Config(format!("mass-scan ratios must be >= 1, got {r:e}")));
    }
    let w1 = acoustic_waist(&model.geometry, 1)?;
    let m1 = mode_mass(&model.geometry, &model.material, 1)?;
    let catalog = model.catalog();
    let mut out = started();
    let mut table = Table::new(&["w1_over_w0", "w0_m", "m_eff_kg", "m_opt_kg", "m_eff_over_m1"]);
    for &ratio in ratios {
        let optical = model.optical.with_waist(w1 / ratio)?;
        let v = static_effective_compliance(&catalog, &optical, &model.truncation);
        let m_eff = 1.0 / (model.omega_m * model.omega_m * v.chi.re);
        table.row(&[
            num(ratio),
            num(optical.waist()),
            num(m_eff),
            num(optical_mass(&model.geometry, &model.material, &optical)),
            num(m_eff / m1),
        ]);
        out.mode_count = out.mode_count.max(v.mode_count);
        if !v.converged {
            out.converged = false;
            out.warnings.push(format!("ratio {ratio:e} hit the truncation caps after {} modes", v.mode_count));
        }
    }
    out.chi_eff0 = Some(model.response().static_compliance());
    out.body = table.into_string();
    Ok(out)
}

fn solve(model: &Model, resp: &EffectiveResponse, power: f64) -> Result<Vec<OperatingPoint>, CliError> {
    Ok(solve_operating_point(
        &model.cavity,
        &model.drive(power)?,
        model.anchor(),
        resp.static_compliance(),
    )?)
}

/// Every working point at the configured drive, as `key = value` lines.
pub fn operating_point(model: &Model) -> Result<CommandOutput, CliError> {
    let resp = model.response();
    let mut out = started();
    static_output(&resp, &mut out);
    let points = solve(model, &resp, model.config.p_in_w)?;
    let g = model.cavity.gamma();
    let mut body = format!("branches = {}\n", points.len());
    for (i, p) in points.iter().enumerate() {
        let entries = [
            ("branch_id", p.branch.id().to_string()),
            ("i_bar", num(p.intensity)),
            ("psi_bar_over_gamma", num(p.mean_detuning / g)),
            ("psi0_over_gamma", num(p.empty_detuning / g)),
            ("psi_nl_over_gamma", num(p.nonlinear_phase / g)),
            ("sigma_norm", num(p.sigma_norm)),
            ("stability", p.stability.as_str().to_string()),
        ];
        for (k, v) in entries {
            body.push_str(&format!("point.{i}.{k} = {v}\n"));
        }
        if p.stability != Stability::StableBranch {
            out.warnings.push(format!("point {i} is not on a stable branch"));
        }
    }
    out.body = body;
    Ok(out)
}

/// Response model used for a squeezing spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Full,
    Kerr,
    SingleOscillator,
}

/// Optimum and fixed-quadrature noise spectra; optionally the full angle
/// scan as a second table.
pub fn squeeze(model: &Model, variant: Variant, with_scan: bool) -> Result<(CommandOutput, Option<String>), CliError> {
    let resp = model.response();
    let mut out = started();
    static_output(&resp, &mut out);
    let points = solve(model, &resp, model.config.p_in_w)?;
    if points.len() > 1 {
        out.warnings.push(format!("{} working points; using the lowest-intensity one", points.len()));
    }
    let op = points[0];
    if op.stability != Stability::StableBranch {
        out.warnings.push(format!("working point is {}", op.stability.as_str()));
    }
    let omega: Vec<f64> = model.grid().iter().map(|x| x * model.omega_m).collect();
    let theta_points = if with_scan { model.config.numerics.theta_points as usize } else { 0 };
    let k = model.optical.wavevector();
    let temperature = model.config.temperature_k;
    let chi0 = resp.static_compliance();
    let spectrum = match variant {
        Variant::Full => {
            let setup = SpectrumSetup {
                op: &op,
                cav: &model.cavity,
                resp: &resp,
                wavevector: k,
                temperature,
                theta_points,
            };
            compute_spectrum(&setup, &omega)?
        }
        Variant::Kerr => optomech_core::squeezing_spectra::reference_curves(
            ReferenceKind::KerrLimit { static_compliance: chi0 },
            &op,
            &model.cavity,
            k,
            temperature,
            &omega,
            theta_points,
        )?,
        Variant::SingleOscillator => optomech_core::squeezing_spectra::reference_curves(
            ReferenceKind::SingleOscillator {
                mass: 1.0 / (model.omega_m * model.omega_m * chi0),
                frequency: model.omega_m,
                loss: model.loss,
            },
            &op,
            &model.cavity,
            k,
            temperature,
            &omega,
            theta_points,
        )?,
    };
    record_spectrum(&spectrum, variant, &mut out);
    let mut table = Table::new(&["omega_over_omega_m", "s_opt", "theta_opt_rad", "s_theta0", "s_theta90"]);
    for p in &spectrum.points {
        table.row(&[
            num(p.omega / model.omega_m),
            num(p.s_opt),
            num(p.theta_opt),
            num(p.s_theta0),
            num(p.s_theta90),
        ]);
    }
    out.body = table.into_string();
    let scan = with_scan.then(|| {
        let mut t = Table::new(&["omega_over_omega_m", "theta_rad", "s_theta"]);
        for (p, row) in spectrum.points.iter().zip(&spectrum.scan) {
            for (theta, s) in spectrum.theta.iter().zip(row) {
                t.row(&[num(p.omega / model.omega_m), num(*theta), num(*s)]);
            }
        }
        t.into_string()
    });
    Ok((out, scan))
}

fn record_spectrum(spectrum: &QuadratureSpectrum, variant: Variant, out: &mut CommandOutput) {
    if variant != Variant::Full {
        return;
    }
    out.mode_count = out.mode_count.max(spectrum.max_mode_count());
    let truncated = spectrum.points.iter().filter(|p| !p.converged).count();
    if truncated > 0 {
        out.converged = false;
        out.warnings.push(format!("{truncated} frequencies hit the truncation caps"));
    }
}

/// Every branch of the working point over a sweep of incident power.
pub fn bistability(model: &Model, powers: &[f64]) -> Result<CommandOutput, CliError> {
    if !matches!(model.config.cavity.anchor, DetuningAnchor::EmptyOverGamma(_)) {
        return Err(CliError::Config(
            "bistability sweeps hold the empty-cavity detuning fixed; set cavity.psi0_over_gamma".into(),
        ));
    }
    if let Some(p) = powers.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
        return Err(CliError::Config(format!("powers must be >= 0, got {p:e}")));
    }
    let resp = model.response();
    let mut out = started();
    static_output(&resp, &mut out);
    let g = model.cavity.gamma();
    let mut table = Table::new(&["p_in_w", "branch_id", "i_bar", "psi_bar_over_gamma", "sigma_norm", "stability"]);
    for &power in powers {
        for p in solve(model, &resp, power)? {
            table.row(&[
                num(power),
                p.branch.id().to_string(),
                num(p.intensity),
                num(p.mean_detuning / g),
                num(p.sigma_norm),
                p.stability.as_str().to_string(),
            ]);
        }
    }
    out.body = table.into_string();
    Ok(out)
}
