use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reservoir::ReservoirConfig;
use crate::rng::{stage_rng, Stage};

use super::metrics::{channel_std, nrmse};
use super::{predict_at_parameter, train_twin, Status, TimeSeriesSet};

/// Fraction of every trajectory used for fitting; the rest validates.
pub const FIT_FRACTION: f64 = 0.8;

/// Uniform ranges for the searched hyperparameters; the ridge coefficient is
/// drawn log-uniformly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSpace {
    pub spectral_radius: (f64, f64),
    pub input_scaling: (f64, f64),
    pub param_scaling: (f64, f64),
    pub leak_rate: (f64, f64),
    pub log10_ridge: (f64, f64),
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            spectral_radius: (0.3, 1.4),
            input_scaling: (0.1, 1.5),
            param_scaling: (0.1, 1.5),
            leak_rate: (0.1, 1.0),
            log10_ridge: (-8.0, -3.0),
        }
    }
}

impl SearchSpace {
    fn validate(&self) -> Result<()> {
        let ranges = [self.spectral_radius, self.input_scaling, self.param_scaling, self.leak_rate, self.log10_ridge];
        if ranges.iter().any(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi)) {
            return Err(Error::InvalidConfig("search ranges must be finite with lo <= hi".into()));
        }
        Ok(())
    }

    fn sample(&self, base: &ReservoirConfig, rng: &mut impl Rng) -> ReservoirConfig {
        let mut draw = |(lo, hi): (f64, f64)| if lo == hi { lo } else { rng.random_range(lo..hi) };
        ReservoirConfig {
            spectral_radius: draw(self.spectral_radius),
            input_scaling: draw(self.input_scaling),
            param_scaling: draw(self.param_scaling),
            leak_rate: draw(self.leak_rate),
            ridge: 10f64.powf(draw(self.log10_ridge)),
            ..base.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub config: ReservoirConfig,
    /// Mean validation NRMSE; infinite when the candidate failed.
    pub score: f64,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome {
    pub best: ReservoirConfig,
    pub best_index: usize,
    /// Every candidate, in the order drawn; candidate 0 is the base config.
    pub leaderboard: Vec<Candidate>,
}

/// Seeded random search. Each trajectory is split in time: the first 80%
/// trains the candidate, which is then warmed on that part and run closed
/// loop over the next `horizon` samples (0 = the whole remaining 20%) at the
/// trajectory's own parameter. The score is the NRMSE against the held-out
/// samples, scaled by each channel's spread, averaged over trajectories.
///
/// Candidate 0 is `base` itself, so the winner never scores worse than it.
/// All candidates share `base.seed`, i.e. the same random reservoir draws.
pub fn optimize_hyperparameters(
    data: &TimeSeriesSet,
    base: &ReservoirConfig,
    space: &SearchSpace,
    budget: usize,
    seed: u64,
    horizon: usize,
) -> Result<SearchOutcome> {
    if budget < 1 {
        return Err(Error::InvalidConfig("search budget must be at least 1".into()));
    }
    space.validate()?;
    base.validate_for_twin()?;
    let mut fit = TimeSeriesSet { system: data.system, trajectories: Vec::with_capacity(data.trajectories.len()) };
    let mut held = Vec::with_capacity(data.trajectories.len());
    for t in &data.trajectories {
        let cut = (t.len() as f64 * FIT_FRACTION).floor() as usize;
        if cut < base.warmup + 2 || cut >= t.len() {
            return Err(Error::InvalidInput(format!(
                "trajectory at p = {} ({} samples) is too short to split into fit and validation parts",
                t.param,
                t.len()
            )));
        }
        let scale: Vec<f64> = channel_std(t).into_iter().map(|s| if s > 0.0 { s } else { 1.0 }).collect();
        fit.trajectories.push(t.slice(0, cut));
        held.push((t.slice(cut, t.len()), scale));
    }

    let mut rng = stage_rng(seed, Stage::HyperSearch);
    let configs: Vec<ReservoirConfig> = std::iter::once(base.clone()).chain((1..budget).map(|_| space.sample(base, &mut rng))).collect();
    let indices: Vec<usize> = (0..budget).collect();
    let leaderboard = crate::par::map_ordered(&indices, |i| {
        let config = configs[i].clone();
        match score(&fit, &held, &config, horizon) {
            Ok(score) => Candidate { config, score, note: None },
            Err(e) if e.is_numerical() || matches!(e, Error::InvalidConfig(_)) => {
                Candidate { config, score: f64::INFINITY, note: Some(e.to_string()) }
            }
            Err(e) => Candidate { config, score: f64::NAN, note: Some(e.to_string()) },
        }
    });
    if let Some(c) = leaderboard.iter().find(|c| c.score.is_nan()) {
        return Err(Error::InvalidInput(c.note.clone().unwrap_or_default()));
    }
    let best_index = (0..budget).fold(0, |b, i| if leaderboard[i].score < leaderboard[b].score { i } else { b });
    if !leaderboard[best_index].score.is_finite() {
        return Err(Error::Numerical("no candidate produced a finite validation score".into()));
    }
    Ok(SearchOutcome { best: leaderboard[best_index].config.clone(), best_index, leaderboard })
}

fn score(fit: &TimeSeriesSet, held: &[(crate::dynsys::Trajectory, Vec<f64>)], config: &ReservoirConfig, horizon: usize) -> Result<f64> {
    let twin = train_twin(fit, config)?;
    let mut total = 0.0;
    for (warm, (truth, scale)) in fit.trajectories.iter().zip(held) {
        let h = if horizon == 0 { truth.len() } else { horizon.min(truth.len()) };
        let f = predict_at_parameter(&twin, warm.param, warm, h)?;
        if f.status == Status::Diverged {
            return Ok(f64::INFINITY);
        }
        total += nrmse(&f.trajectory, truth, scale)?;
    }
    Ok(total / held.len() as f64)
}
