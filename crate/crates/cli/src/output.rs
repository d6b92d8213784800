//! CSV tables and the key-value run report.

use std::fmt::Write as _;
use std::path::Path;

use crate::config::SimulationConfig;
use crate::error::CliError;

/// Scientific notation with 9 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.8e}")
}

/// Comma-separated table with a single header line.
#[derive(Debug, Clone)]
pub struct Table {
    text: String,
    columns: usize,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self {
            text,
            columns: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.columns);
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// Result of one command before it is written out.
#[derive(Debug, Clone, Default)]
pub struct CommandOutput {
    pub body: String,
    pub mode_count: u64,
    pub converged: bool,
    pub warnings: Vec<String>,
    pub chi_eff0: Option<f64>,
}

/// Everything known about a finished run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub command: String,
    pub config: SimulationConfig,
    pub output: String,
    pub wall_clock_s: f64,
    pub omega_m: f64,
    pub h0_over_r: f64,
    pub result: CommandOutput,
}

impl RunReport {
    /// `key = value` lines; the configuration part reparses as a config.
    pub fn to_text(&self) -> String {
        let mut s = self.config.to_text();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(s, "report.{k} = {v}");
        };
        line("command", self.command.clone());
        line("output", self.output.clone());
        line("mode_count", self.result.mode_count.to_string());
        line(
            "truncation",
            if self.result.converged { "converged" } else { "truncated" }.to_string(),
        );
        if let Some(chi) = self.result.chi_eff0 {
            line("chi_eff0_m_n", num(chi));
        }
        line("omega_m_rad_s", num(self.omega_m));
        line("h0_over_r", num(self.h0_over_r));
        line("wall_clock_s", format!("{:.3}", self.wall_clock_s));
        line("warnings", self.result.warnings.len().to_string());
        for (i, w) in self.result.warnings.iter().enumerate() {
            line(&format!("warning.{i}"), w.clone());
        }
        s
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
