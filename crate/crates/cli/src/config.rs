//! Run configuration: defaults, JSON config file, command-line overrides.
//!
//! Resolution order is defaults < config file < flags.  The config file
//! path comes from `--config` or, failing that, the `TWISTED_EIG_CONFIG`
//! environment variable.

use serde::{Deserialize, Serialize};
use std::path::Path;

pub const CONFIG_ENV_VAR: &str = "TWISTED_EIG_CONFIG";

/// Fully resolved run configuration.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub p: f64,
    pub q: f64,
    pub dim: u32,
    pub ode_tol: f64,
    pub newton_tol: f64,
    pub zero_tol: f64,
    pub grid: usize,
    pub steps: usize,
    /// Total volume of two-ball sweeps; `None` means `omega_N`.
    pub total_volume: Option<f64>,
    pub seed: u64,
    /// Output format of single-run reports: "json" or "csv".
    pub out: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            p: 2.0,
            q: 2.0,
            dim: 2,
            ode_tol: 1e-10,
            newton_tol: 1e-10,
            zero_tol: 1e-12,
            grid: 512,
            steps: 33,
            total_volume: None,
            seed: 0,
            out: "json".into(),
        }
    }
}

/// Partial configuration as read from a JSON file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub dim: Option<u32>,
    pub ode_tol: Option<f64>,
    pub newton_tol: Option<f64>,
    pub zero_tol: Option<f64>,
    pub grid: Option<usize>,
    pub steps: Option<usize>,
    pub total_volume: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))
    }
}

impl RunConfig {
    /// Applies a config file on top of the defaults.
    pub fn apply_file(&mut self, file: &FileConfig) {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = file.$field { self.$field = v; })*
            };
        }
        take!(p, q, dim, ode_tol, newton_tol, zero_tol, grid, steps, seed);
        if file.total_volume.is_some() {
            self.total_volume = file.total_volume;
        }
        if let Some(out) = &file.out {
            self.out = out.clone();
        }
    }

    /// Sanity limits on the numeric knobs; violations are usage errors.
    pub fn validate_numerics(&self) -> Result<(), String> {
        for (name, v) in [
            ("ode_tol", self.ode_tol),
            ("newton_tol", self.newton_tol),
            ("zero_tol", self.zero_tol),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        if self.grid < 64 {
            return Err(format!("grid must be at least 64, got {}", self.grid));
        }
        if self.steps < 8 {
            return Err(format!("steps must be at least 8, got {}", self.steps));
        }
        if let Some(v) = self.total_volume {
            if !(v > 0.0) {
                return Err(format!("total_volume must be positive, got {v}"));
            }
        }
        if self.out != "json" && self.out != "csv" {
            return Err(format!("out must be json or csv, got {}", self.out));
        }
        Ok(())
    }
}
