//! Experiment configuration files (TOML, unknown keys rejected).

use std::path::Path;

use ballwalk_core::analysis::GridPolicy;
use ballwalk_core::eigen::LanczosOptions;
use ballwalk_core::{DensityConfig, Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub density: DensityConfig,
    pub grid: GridPolicy,
    #[serde(default)]
    pub lanczos: LanczosOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_sweep: Option<GapSweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weyl: Option<WeylSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tv: Option<TvSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<BandSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dump_multiplier: Option<DumpMultiplierSection>,
}

/// Where the reference levels `μ_k` of `L_ρ` come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuSource {
    /// `4α·n` with harmonic-oscillator multiplicities (Gaussian only).
    #[default]
    Exact,
    /// Richardson-extrapolated finite differences.
    Schrodinger,
}

fn default_spacings() -> [f64; 2] {
    [4e-3, 2e-3]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub h_list: Vec<f64>,
    pub k_max: usize,
    #[serde(default)]
    pub mu: MuSource,
    #[serde(default = "default_spacings")]
    pub schrodinger_spacings: [f64; 2],
}

fn default_alpha_cfg() -> f64 {
    0.9
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapSweepSection {
    pub h_list: Vec<f64>,
    #[serde(default = "default_alpha_cfg")]
    pub alpha_cfg: f64,
    /// `μ_1`; defaults to `4α` for Gaussians and is required otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu1: Option<f64>,
}

fn default_lambda_max() -> f64 {
    0.3
}

fn default_lambda_step() -> f64 {
    0.01
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeylSection {
    pub h_list: Vec<f64>,
    #[serde(default = "default_lambda_max")]
    pub lambda_max: f64,
    #[serde(default = "default_lambda_step")]
    pub lambda_step: f64,
}

impl WeylSection {
    pub fn lambdas(&self) -> Vec<f64> {
        let steps = (self.lambda_max / self.lambda_step + 1e-9).floor() as usize;
        (1..=steps).map(|i| i as f64 * self.lambda_step).collect()
    }
}

fn default_cells_per_bin() -> usize {
    8
}

fn default_replicates() -> usize {
    200
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub h: f64,
    /// Start point; absent means a draw from `ν_h`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    pub paths: usize,
    pub horizon: usize,
    #[serde(default = "default_cells_per_bin")]
    pub cells_per_bin: usize,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    /// One-step samples for the χ² test of the step law (`d = 1`); `0` skips it.
    #[serde(default)]
    pub step_samples: usize,
    #[serde(default = "default_step_bins")]
    pub step_bins: usize,
}

fn default_step_bins() -> usize {
    25
}

fn default_mc_check_n() -> usize {
    5
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TvSection {
    pub h: f64,
    pub x0: Vec<f64>,
    pub tau: f64,
    pub n_max: usize,
    /// Asymptotic window `[from, to]` for the log-slope; defaults to the second half.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope_window: Option<[usize; 2]>,
    /// Monte-Carlo paths; `0` skips the simulation columns.
    #[serde(default)]
    pub paths: usize,
    #[serde(default = "default_cells_per_bin")]
    pub cells_per_bin: usize,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_mc_check_n")]
    pub mc_check_n: usize,
    /// Gate the asymptotic decay rates; off for short pre-asymptotic runs.
    #[serde(default = "default_true")]
    pub rate_gates: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContainmentSection {
    pub h_list: Vec<f64>,
    pub grid: GridPolicy,
    #[serde(default = "default_containment_tol")]
    pub tolerance: f64,
}

fn default_containment_tol() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandSection {
    pub h_list: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub containment: Option<ContainmentSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DumpMultiplierSection {
    pub r_max: f64,
    pub step: f64,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always serializable")
    }
}

/// Unwraps the section a subcommand needs.
pub fn section<'a, T>(value: &'a Option<T>, name: &str) -> Result<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig(format!("missing [{name}] section")))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 4
[density]
kind = "gaussian"
dim = 1
alpha = 0.5
[grid]
half_width = 12.0
spacing_per_h = 40.0
scheme = "fourier_multiplier"
[weyl]
h_list = [0.3, 0.2]
"#;

    #[test]
    fn round_trips_and_fills_defaults() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        let w = c.weyl.as_ref().unwrap();
        assert_eq!(w.lambda_max, 0.3);
        assert_eq!(w.lambdas().len(), 30);
        let again = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(again.to_toml(), c.to_toml());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("seed = 4", "seed = 4\nstray = 1");
        assert!(ExperimentConfig::from_toml(&text).is_err());
        let text = MINIMAL.replace("[weyl]", "[weyl]\nexponent = 2");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }
}
