use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use optomech_cli::commands::{self, Model, Variant};
use optomech_cli::config::{linear_grid, log_grid, SimulationConfig};
use optomech_cli::output::{write_file, CommandOutput, RunReport};
use optomech_cli::CliError;

#[derive(Parser)]
#[command(name = "optomech", version, about = "Radiation-pressure coupling and squeezing in a cavity with a vibrating mirror")]
struct Cli {
    /// Worker threads for the parallel sums (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,

    /// Output file for the table; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Run report file; stderr if omitted.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Full,
    Kerr,
    #[value(name = "single_oscillator", alias = "single-oscillator")]
    SingleOscillator,
}

#[derive(Subcommand)]
enum Command {
    /// Table of acoustic modes with their overlap with the beam.
    Modes {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        n_limit: u32,
        #[arg(long, default_value_t = 1)]
        p_limit: u32,
    },
    /// Effective susceptibility over the frequency grid.
    Susceptibility {
        #[command(flatten)]
        common: Common,
    },
    /// Effective and optical mass versus w1 / w0.
    MassScan {
        #[command(flatten)]
        common: Common,
        /// Explicit comma-separated ratios; overrides the log grid.
        #[arg(long, value_delimiter = ',')]
        ratios: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        ratio_min: f64,
        #[arg(long, default_value_t = 100.0)]
        ratio_max: f64,
        #[arg(long, default_value_t = 20)]
        ratio_points: usize,
    },
    /// Mean intracavity field, nonlinear phase and stability.
    OperatingPoint {
        #[command(flatten)]
        common: Common,
    },
    /// Noise spectra of the reflected field.
    Squeeze {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "full")]
        variant: VariantArg,
        /// Also write the noise of every scanned quadrature to this file.
        #[arg(long)]
        scan: Option<PathBuf>,
    },
    /// Working-point branches versus incident power.
    Bistability {
        #[command(flatten)]
        common: Common,
        /// Explicit comma-separated powers (W); overrides the linear grid.
        #[arg(long, value_delimiter = ',')]
        powers: Vec<f64>,
        #[arg(long, default_value_t = 0.0)]
        p_min: f64,
        #[arg(long, default_value_t = 0.3)]
        p_max: f64,
        #[arg(long, default_value_t = 301)]
        p_points: usize,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Modes { common, .. }
            | Command::Susceptibility { common }
            | Command::MassScan { common, .. }
            | Command::OperatingPoint { common }
            | Command::Squeeze { common, .. }
            | Command::Bistability { common, .. } => common,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Modes { .. } => "modes",
            Command::Susceptibility { .. } => "susceptibility",
            Command::MassScan { .. } => "mass-scan",
            Command::OperatingPoint { .. } => "operating-point",
            Command::Squeeze { .. } => "squeeze",
            Command::Bistability { .. } => "bistability",
        }
    }
}

fn execute(command: &Command, model: &Model) -> Result<CommandOutput, CliError> {
    match command {
        Command::Modes { n_limit, p_limit, .. } => commands::modes(model, *n_limit, *p_limit),
        Command::Susceptibility { .. } => commands::susceptibility(model),
        Command::MassScan {
            ratios,
            ratio_min,
            ratio_max,
            ratio_points,
            ..
        } => {
            let grid = if ratios.is_empty() {
                log_grid(*ratio_min, *ratio_max, *ratio_points)
            } else {
                ratios.clone()
            };
            commands::mass_scan(model, &grid)
        }
        Command::OperatingPoint { .. } => commands::operating_point(model),
        Command::Squeeze { variant, scan, .. } => {
            let variant = match variant {
                VariantArg::Full => Variant::Full,
                VariantArg::Kerr => Variant::Kerr,
                VariantArg::SingleOscillator => Variant::SingleOscillator,
            };
            let (out, table) = commands::squeeze(model, variant, scan.is_some())?;
            if let (Some(path), Some(table)) = (scan, table) {
                write_file(path, &table)?;
            }
            Ok(out)
        }
        Command::Bistability {
            powers,
            p_min,
            p_max,
            p_points,
            ..
        } => {
            let grid = if powers.is_empty() {
                linear_grid(*p_min, *p_max, *p_points)
            } else {
                powers.clone()
            };
            commands::bistability(model, &grid)
        }
    }
}

fn read_config(path: &Path) -> Result<SimulationConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    SimulationConfig::parse(&text)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let start = Instant::now();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let common = cli.command.common();
    let config = read_config(&common.config)?;
    let model = Model::new(&config)?;
    let result = execute(&cli.command, &model)?;

    let output = match &common.out {
        Some(path) => {
            write_file(path, &result.body)?;
            path.display().to_string()
        }
        None => {
            std::io::stdout().write_all(result.body.as_bytes())?;
            "stdout".to_string()
        }
    };
    let report = RunReport {
        command: cli.command.name().to_string(),
        config,
        output,
        wall_clock_s: start.elapsed().as_secs_f64(),
        omega_m: model.omega_m,
        h0_over_r: model.geometry.paraxial_ratio(),
        result,
    };
    let text = report.to_text();
    match &common.report {
        Some(path) => write_file(path, &text),
        None => Ok(std::io::stderr().write_all(text.as_bytes())?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
