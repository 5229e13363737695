use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hyperparameters of the echo-state network. Everything random about the
/// network is a function of `seed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReservoirConfig {
    /// Neuron count N.
    pub size: usize,
    /// Input dimension M.
    pub input_dim: usize,
    /// Output dimension L.
    pub output_dim: usize,
    pub spectral_radius: f64,
    /// Fraction of nonzero recurrent weights.
    pub density: f64,
    pub input_scaling: f64,
    pub param_scaling: f64,
    pub bias_scaling: f64,
    pub leak_rate: f64,
    pub ridge: f64,
    /// Samples discarded from the start of every driven sequence.
    pub warmup: usize,
    /// Standard deviation of Gaussian noise added to the (normalized)
    /// training inputs; targets stay clean. Zero disables it.
    pub input_noise: f64,
    pub seed: u64,
}

impl Default for ReservoirConfig {
    fn default() -> Self {
        Self {
            size: 600,
            input_dim: 3,
            output_dim: 3,
            spectral_radius: 0.9,
            density: 0.02,
            input_scaling: 0.5,
            param_scaling: 0.5,
            bias_scaling: 0.2,
            leak_rate: 1.0,
            ridge: 1e-6,
            warmup: 500,
            input_noise: 0.0,
            seed: 0,
        }
    }
}

impl ReservoirConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.size == 0 {
            return bad("reservoir size must be at least 1".into());
        }
        if self.input_dim == 0 || self.output_dim == 0 {
            return bad("input and output dimensions must be positive".into());
        }
        if !(self.spectral_radius.is_finite() && self.spectral_radius > 0.0) {
            return bad(format!("spectral radius must be positive, got {}", self.spectral_radius));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return bad(format!("density must lie in (0, 1], got {}", self.density));
        }
        if !(self.leak_rate > 0.0 && self.leak_rate <= 1.0) {
            return bad(format!("leak rate must lie in (0, 1], got {}", self.leak_rate));
        }
        if !(self.ridge.is_finite() && self.ridge >= 0.0) {
            return bad(format!("ridge coefficient must be non-negative, got {}", self.ridge));
        }
        for (name, v) in
            [("input", self.input_scaling), ("param", self.param_scaling), ("bias", self.bias_scaling), ("input noise", self.input_noise)]
        {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} scaling must be non-negative, got {v}"));
            }
        }
        Ok(())
    }

    /// Extra requirement for closed-loop use: outputs feed back as inputs.
    pub fn validate_for_twin(&self) -> Result<()> {
        self.validate()?;
        if self.input_dim != self.output_dim {
            return Err(Error::InvalidConfig(format!(
                "a twin needs input dimension == output dimension, got {} and {}",
                self.input_dim, self.output_dim
            )));
        }
        Ok(())
    }

    /// Non-fatal advisories.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.size < 10 * self.input_dim {
            w.push(format!("reservoir size {} is small relative to input dimension {}; expect poor fits", self.size, self.input_dim));
        }
        w
    }
}
