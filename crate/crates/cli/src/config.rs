//! Experiment configuration: a single JSON document, every field optional.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use chiral_gap_core::arithmetic::SamplingMode;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("malformed config: {0}")]
    Syntax(String),
    #[error("Assumption A violated: {0}")]
    AssumptionA(&'static str),
    #[error("Assumption B violated: {0}")]
    AssumptionB(&'static str),
    #[error("Assumption C violated: {0}")]
    AssumptionC(&'static str),
    #[error("Assumption G violated: {0}")]
    AssumptionG(&'static str),
    #[error("invalid config: {0}")]
    Invalid(&'static str),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialConfig {
    pub period: f64,
    /// `U(y) = Σ_r c_r cos(2πry/L)`, `r = 1, 2, …`.
    pub cosine_coefficients: Vec<f64>,
    /// Must vanish: the potential is even.
    pub sine_coefficients: Vec<f64>,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self {
            period: 1.0,
            cosine_coefficients: vec![2.0],
            sine_coefficients: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    IidUniform,
    ConstantOne,
}

impl From<Mode> for SamplingMode {
    fn from(mode: Mode) -> Self {
        match mode {
            Mode::IidUniform => SamplingMode::IidUniform,
            Mode::ConstantOne => SamplingMode::ConstantOne,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub potential: PotentialConfig,
    /// Plane-wave cutoff: harmonics `−M..=M`.
    #[serde(rename = "M")]
    pub truncation: usize,
    #[serde(rename = "N_kappa")]
    pub n_kappa: usize,
    pub n_bands: usize,
    pub gap_index: usize,
    #[serde(rename = "N_P")]
    pub n_primes: usize,
    #[serde(rename = "N_H")]
    pub n_modes: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub mode: Mode,
    /// Gaussian test-function width.
    pub alpha: f64,
    /// Number of leading levels used in the affine fit.
    #[serde(rename = "K")]
    pub fit_count: usize,
    /// Staircase comparison window `[−T, T]`.
    #[serde(rename = "T")]
    pub window: f64,
    /// Upper bound on the time step of the separated-trace quadrature.
    pub t_max_step: f64,
    pub model_max_fibers: usize,
    pub model_max_modes: usize,
    /// Also emit the exploratory arithmetic shift density.
    pub shift_density: bool,
    /// Zero table CSV; the bundled table when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeros: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            potential: PotentialConfig::default(),
            truncation: 32,
            n_kappa: 201,
            n_bands: 8,
            gap_index: 0,
            n_primes: 20,
            n_modes: 20,
            epsilon: 0.35,
            seed: 12345,
            mode: Mode::IidUniform,
            alpha: 0.5,
            fit_count: 20,
            window: 80.0,
            t_max_step: 0.01,
            model_max_fibers: 256,
            model_max_modes: 16,
            shift_density: false,
            zeros: None,
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_primes == 0 {
            return Err(ConfigError::AssumptionA("N_P must be >= 1"));
        }
        if self.n_modes == 0 {
            return Err(ConfigError::AssumptionA("N_H must be >= 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(ConfigError::AssumptionB(
                "epsilon must be positive and finite",
            ));
        }
        if self.potential.sine_coefficients.iter().any(|&s| s != 0.0) {
            return Err(ConfigError::AssumptionC(
                "potential must be even (nonzero sine coefficients)",
            ));
        }
        if !(self.potential.period > 0.0 && self.potential.period.is_finite()) {
            return Err(ConfigError::AssumptionC(
                "period must be positive and finite",
            ));
        }
        if self
            .potential
            .cosine_coefficients
            .iter()
            .any(|c| !c.is_finite())
        {
            return Err(ConfigError::AssumptionC(
                "cosine coefficients must be finite",
            ));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(ConfigError::AssumptionG(
                "Gaussian width alpha must be positive",
            ));
        }
        if self.n_kappa < 3 || self.n_kappa.is_multiple_of(2) {
            return Err(ConfigError::Invalid("N_kappa must be odd and >= 3"));
        }
        if self.n_bands == 0 {
            return Err(ConfigError::Invalid("n_bands must be >= 1"));
        }
        if self.fit_count < 2 {
            return Err(ConfigError::Invalid("K must be >= 2"));
        }
        if !(self.window > 0.0 && self.window.is_finite()) {
            return Err(ConfigError::Invalid("T must be positive"));
        }
        if !(self.t_max_step > 0.0 && self.t_max_step.is_finite()) {
            return Err(ConfigError::Invalid("t_max_step must be positive"));
        }
        if self.model_max_fibers == 0 || self.model_max_modes == 0 {
            return Err(ConfigError::Invalid("matrix model caps must be >= 1"));
        }
        Ok(())
    }

    /// Canonical JSON used for hashing and the manifest.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of [`Self::canonical_json`].
    pub fn hash(&self) -> String {
        hex(&Sha256::digest(self.canonical_json().as_bytes()))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Parses and validates; a blank document gives the defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let config = if text.trim().is_empty() {
        ExperimentConfig::default()
    } else {
        serde_json::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?
    };
    config.validate()?;
    Ok(config)
}
