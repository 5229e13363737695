use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-channel affine input scaling (zero mean, unit variance over the
/// training data) and the map of the bifurcation parameter onto `[-1, 1]`
/// over the training range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub param_center: f64,
    pub param_half_range: f64,
}

impl Normalization {
    pub fn fit<'a>(samples: impl Iterator<Item = &'a [f64]> + Clone, dim: usize, params: &[f64]) -> Result<Self> {
        let mut count = 0usize;
        let mut mean = vec![0.0; dim];
        for s in samples.clone() {
            count += 1;
            mean.iter_mut().zip(s).for_each(|(m, v)| *m += v);
        }
        if count == 0 {
            return Err(Error::InvalidInput("no samples to normalize".into()));
        }
        mean.iter_mut().for_each(|m| *m /= count as f64);
        let mut var = vec![0.0; dim];
        for s in samples {
            var.iter_mut().zip(s).zip(&mean).for_each(|((acc, v), m)| *acc += (v - m) * (v - m));
        }
        let scale: Vec<f64> = var.iter().map(|v| (v / count as f64).sqrt()).collect();
        if let Some(i) = scale.iter().position(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidInput(format!("channel {} is constant over the training data", i + 1)));
        }
        let lo = params.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = params.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (param_center, param_half_range) = if hi > lo { ((lo + hi) / 2.0, (hi - lo) / 2.0) } else { (lo, 1.0) };
        Ok(Self { mean, scale, param_center, param_half_range })
    }

    pub fn forward_into(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..x.len() {
            out[i] = (x[i] - self.mean[i]) / self.scale[i];
        }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.forward_into(x, &mut out);
        out
    }

    pub fn inverse_into(&self, z: &[f64], out: &mut [f64]) {
        for i in 0..z.len() {
            out[i] = z[i] * self.scale[i] + self.mean[i];
        }
    }

    pub fn param(&self, p: f64) -> f64 {
        (p - self.param_center) / self.param_half_range
    }
}
