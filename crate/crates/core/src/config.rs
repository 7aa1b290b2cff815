//! Scenario configuration shared by the experiments and the CLI.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{HomError, Result};
use crate::numeric::linspace;
use crate::spectra::SpectralModel;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 7;

/// Bandwidth ratios of the filtering family.
pub const DEFAULT_RATIOS: [f64; 4] = [1.0, 0.75, 0.5, 0.25];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    /// Wave-coherence model with the ±π/2 pair shift (`sin²`).
    Coherence,
    /// Wave-coherence model without the shift (`cos²`).
    CoherenceUnshifted,
    /// Two-photon Fock oracle.
    Fock,
}

impl Model {
    pub fn as_str(self) -> &'static str {
        match self {
            Model::Coherence => "coherence",
            Model::CoherenceUnshifted => "coherence-unshifted",
            Model::Fock => "fock",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Model {
    type Err = HomError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coherence" => Ok(Model::Coherence),
            "coherence-unshifted" => Ok(Model::CoherenceUnshifted),
            "fock" => Ok(Model::Fock),
            _ => Err(HomError::Argument(format!("unknown model `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: Model,
    /// Spectral width in rad/s. For the Fock oracle this is each photon's
    /// intensity standard deviation.
    pub sigma: f64,
    pub mean_offset: f64,
    pub bandwidth_ratio: f64,
    pub tau_max: f64,
    pub tau_steps: usize,
    pub n_pairs: usize,
    pub seed: u64,
    pub analytic: bool,
    /// Filtering family for bandwidth sweeps.
    pub ratios: Vec<f64>,
    /// Signal/idler center offset from degeneracy (Fock oracle).
    pub center_split: f64,
    /// Relative phase of the path-entangled input (Fock oracle).
    pub psi_rel: f64,
    /// Pump envelope width for the anticorrelated Fock state; `None` means a
    /// separable spectrum.
    pub pump_sigma: Option<f64>,
    pub grid_points: usize,
    pub output_format: OutputFormat,
    /// `None` writes to standard output.
    pub output_path: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: Model::Coherence,
            sigma: 1.0,
            mean_offset: 0.0,
            bandwidth_ratio: 1.0,
            tau_max: 4.0,
            tau_steps: 65,
            n_pairs: 100_000,
            seed: DEFAULT_SEED,
            analytic: false,
            ratios: DEFAULT_RATIOS.to_vec(),
            center_split: 0.0,
            psi_rel: 0.0,
            pump_sigma: None,
            grid_points: crate::fock::DEFAULT_GRID_POINTS,
            output_format: OutputFormat::Csv,
            output_path: None,
        }
    }
}

impl RunConfig {
    /// Checks every numeric field; returns one message per problem.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            out.push(format!("sigma must be > 0, got {}", self.sigma));
        }
        if !self.mean_offset.is_finite() {
            out.push(format!("mean-offset must be finite, got {}", self.mean_offset));
        }
        if !(self.bandwidth_ratio > 0.0 && self.bandwidth_ratio <= 1.0) {
            out.push(format!(
                "bandwidth-ratio must lie in (0, 1], got {}",
                self.bandwidth_ratio
            ));
        }
        if !(self.tau_max.is_finite() && self.tau_max > 0.0) {
            out.push(format!("tau-max must be > 0, got {}", self.tau_max));
        }
        if self.tau_steps < 2 {
            out.push(format!("tau-steps must be >= 2, got {}", self.tau_steps));
        }
        if self.n_pairs < 2 || !self.n_pairs.is_multiple_of(2) {
            out.push(format!("n-pairs must be even and >= 2, got {}", self.n_pairs));
        }
        if self.ratios.is_empty() {
            out.push("ratios must not be empty".into());
        }
        for r in &self.ratios {
            if !(*r > 0.0 && *r <= 1.0) {
                out.push(format!("ratio {r} outside (0, 1]"));
            }
        }
        if !self.center_split.is_finite() {
            out.push("center-split must be finite".into());
        }
        if !self.psi_rel.is_finite() {
            out.push("psi-rel must be finite".into());
        }
        if let Some(p) = self.pump_sigma {
            if !(p.is_finite() && p > 0.0) {
                out.push(format!("pump-sigma must be > 0, got {p}"));
            }
        }
        if self.grid_points < 3 {
            out.push(format!("grid-points must be >= 3, got {}", self.grid_points));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.problems().into_iter().next() {
            None => Ok(()),
            Some(p) => Err(HomError::Config(p)),
        }
    }

    pub fn spectral_model(&self) -> Result<SpectralModel> {
        SpectralModel::new(self.sigma, self.mean_offset, self.bandwidth_ratio)
    }

    /// `tau_steps` delays evenly spaced on `[0, tau_max]`.
    pub fn tau_grid(&self) -> Vec<f64> {
        linspace(0.0, self.tau_max, self.tau_steps)
    }
}
