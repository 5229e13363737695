use rand_distr::{Distribution, Normal};

use crate::diagram::CollapseCriterion;
use crate::dynsys::{SystemKind, SystemSpec};
use crate::error::{Error, Result};
use crate::reservoir::{build_reservoir, update, NormalEquations, Readout, ReservoirConfig, ReservoirMatrices, ReservoirState};
use crate::rng::{stage_rng, Stage};

use super::{Normalization, TimeSeriesSet};

/// A trained, parameter-aware digital twin. Immutable after training; every
/// rollout owns its own reservoir state.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainedTwin {
    pub config: ReservoirConfig,
    pub matrices: ReservoirMatrices,
    pub readout: Readout,
    pub normalization: Normalization,
    pub train_params: Vec<f64>,
    /// RMS one-step training error, in normalized units.
    pub residual: f64,
    /// The system the data came from, when known.
    pub system: Option<SystemSpec>,
    pub criterion: CollapseCriterion,
}

impl TrainedTwin {
    pub fn dim(&self) -> usize {
        self.config.input_dim
    }

    pub fn kind(&self) -> SystemKind {
        self.system.map_or(SystemKind::DiscreteMap, |s| s.kind())
    }

    /// Drives a fresh reservoir (r = 0) open-loop through `inputs` at raw
    /// parameter `p`, returning the final state.
    pub fn warm<'a>(&self, inputs: impl IntoIterator<Item = &'a [f64]>, p: f64) -> Result<ReservoirState> {
        let pn = self.normalization.param(p);
        let mut state = ReservoirState::zeros(self.config.size);
        let mut scratch = vec![0.0; self.config.size];
        let mut u = vec![0.0; self.dim()];
        for x in inputs {
            if x.len() != self.dim() {
                return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("non-finite warm-up sample".into()));
            }
            self.normalization.forward_into(x, &mut u);
            update(&self.matrices, self.config.leak_rate, &mut state, &u, pn, &mut scratch);
        }
        Ok(state)
    }
}

/// Fits one readout over all trajectories: each is driven from r = 0 with its
/// own (normalized) parameter injected, its first `warmup` states dropped, and
/// the remaining states regressed onto the next input sample.
pub fn train_twin(data: &TimeSeriesSet, config: &ReservoirConfig) -> Result<TrainedTwin> {
    config.validate_for_twin()?;
    let dim = data.dim().ok_or_else(|| Error::InvalidInput("no training trajectories".into()))?;
    if dim != config.input_dim {
        return Err(Error::DimensionMismatch { expected: config.input_dim, got: dim });
    }
    for t in &data.trajectories {
        if t.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: t.dim() });
        }
        if !t.param.is_finite() {
            return Err(Error::InvalidInput("trajectory parameter tag is not finite".into()));
        }
        if t.len() < config.warmup + 2 {
            return Err(Error::InvalidInput(format!(
                "trajectory at p = {} has {} samples; need more than warm-up ({}) + 1",
                t.param,
                t.len(),
                config.warmup
            )));
        }
    }
    let params = data.params();
    let normalization = Normalization::fit(data.trajectories.iter().flat_map(|t| t.samples()), dim, &params)?;
    let matrices = build_reservoir(config)?;

    let n = config.size;
    let mut eq = NormalEquations::new(n, dim);
    let mut scratch = vec![0.0; n];
    let mut u = vec![0.0; dim];
    let mut target = vec![0.0; dim];
    let mut noise_rng = stage_rng(config.seed, Stage::TrainingNoise);
    let noise = Normal::new(0.0, config.input_noise).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    for traj in &data.trajectories {
        let pn = normalization.param(traj.param);
        let mut state = ReservoirState::zeros(n);
        for t in 0..traj.len() - 1 {
            normalization.forward_into(traj.sample(t), &mut u);
            if config.input_noise > 0.0 {
                u.iter_mut().for_each(|x| *x += noise.sample(&mut noise_rng));
            }
            update(&matrices, config.leak_rate, &mut state, &u, pn, &mut scratch);
            if t >= config.warmup {
                normalization.forward_into(traj.sample(t + 1), &mut target);
                eq.push(state.r.as_slice(), &target)?;
            }
        }
    }
    let fit = eq.solve(config.ridge)?;
    let system = data.system;
    let criterion = system.map_or(CollapseCriterion::FixedPoint { amplitude: 1e-3, blowup: f64::INFINITY }, |s| s.model.default_collapse());
    Ok(TrainedTwin {
        config: config.clone(),
        matrices,
        readout: fit.readout,
        normalization,
        train_params: params,
        residual: fit.residual,
        system,
        criterion,
    })
}
