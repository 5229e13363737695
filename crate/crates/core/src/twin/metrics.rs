use crate::dynsys::Trajectory;
use crate::error::{Error, Result};

/// Per-channel population standard deviation.
pub fn channel_std(traj: &Trajectory) -> Vec<f64> {
    let n = traj.len().max(1) as f64;
    (0..traj.dim())
        .map(|v| {
            let mean = traj.column(v).sum::<f64>() / n;
            (traj.column(v).map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt()
        })
        .collect()
}

/// Root-mean-square error over the first `min(len)` samples, each channel
/// divided by `scale[channel]`.
pub fn nrmse(pred: &Trajectory, truth: &Trajectory, scale: &[f64]) -> Result<f64> {
    if pred.dim() != truth.dim() || scale.len() != truth.dim() {
        return Err(Error::DimensionMismatch {
            expected: truth.dim(),
            got: if pred.dim() != truth.dim() { pred.dim() } else { scale.len() },
        });
    }
    if scale.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::InvalidInput("normalizing scales must be positive".into()));
    }
    let n = pred.len().min(truth.len());
    if n == 0 {
        return Err(Error::InvalidInput("nothing to compare".into()));
    }
    let mut sum = 0.0;
    for i in 0..n {
        for ((a, b), s) in pred.sample(i).iter().zip(truth.sample(i)).zip(scale) {
            sum += ((a - b) / s).powi(2);
        }
    }
    Ok((sum / (n * truth.dim()) as f64).sqrt())
}
