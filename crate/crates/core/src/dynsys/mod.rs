//! Ground-truth simulators: the Ikeda map, the three-species food chain, a
//! fixed-step integrator, trajectory CSV files and direct-simulation
//! bifurcation scans.

mod food_chain;
mod ikeda;
mod integrate;
pub(crate) mod scan;
pub(crate) mod trajectory;

pub use food_chain::{food_chain_rhs, FoodChainParams, FoodChainState};
pub use ikeda::{ikeda_step, IkedaParams, IkedaState};
pub use integrate::{integrate, rk4_step, Simulator};
pub use scan::{oracle_bifurcation_scan, ScanSettings};
pub use trajectory::Trajectory;

use serde::{Deserialize, Serialize};

use crate::diagram::CollapseCriterion;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    DiscreteMap,
    ContinuousOde,
}

/// A concrete target system with its fixed parameters. The bifurcation
/// parameter stored here is a placeholder; simulation calls take `p` explicitly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Model {
    Ikeda(IkedaParams),
    FoodChain(FoodChainParams),
}

impl Model {
    pub fn kind(&self) -> SystemKind {
        match self {
            Model::Ikeda(_) => SystemKind::DiscreteMap,
            Model::FoodChain(_) => SystemKind::ContinuousOde,
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Model::Ikeda(_) => 2,
            Model::FoodChain(_) => 3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Model::Ikeda(_) => "ikeda",
            Model::FoodChain(_) => "food-chain",
        }
    }

    pub fn parameter_name(&self) -> &'static str {
        match self {
            Model::Ikeda(_) => "mu",
            Model::FoodChain(_) => "K",
        }
    }

    pub fn variable_names(&self) -> &'static [&'static str] {
        match self {
            Model::Ikeda(_) => &["x", "y"],
            Model::FoodChain(_) => &["R", "C", "P"],
        }
    }

    pub fn parameter(&self) -> f64 {
        match self {
            Model::Ikeda(q) => q.mu,
            Model::FoodChain(q) => q.k,
        }
    }

    pub fn with_parameter(mut self, p: f64) -> Self {
        match &mut self {
            Model::Ikeda(q) => q.mu = p,
            Model::FoodChain(q) => q.k = p,
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Model::Ikeda(q) => q.validate(),
            Model::FoodChain(q) => q.validate(),
        }
    }

    /// Initial condition used when the caller does not supply one.
    pub fn default_initial(&self) -> Vec<f64> {
        match self {
            Model::Ikeda(_) => vec![0.1, 0.1],
            Model::FoodChain(_) => vec![0.7, 0.2, 0.8],
        }
    }

    pub fn default_collapse(&self) -> CollapseCriterion {
        match self {
            Model::Ikeda(q) => CollapseCriterion::FixedPoint { amplitude: 1e-3, blowup: 10.0 * q.radius_bound().max(1.0) },
            Model::FoodChain(_) => CollapseCriterion::BelowThreshold { variable: 2, threshold: 1e-4 },
        }
    }
}

/// A parameterized system plus how it is sampled.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub model: Model,
    /// Time units between recorded samples (maps: whole number of iterations).
    pub sampling_interval: f64,
    /// Integration step for ODEs; ignored for maps.
    pub step: f64,
}

impl SystemSpec {
    pub fn ikeda(params: IkedaParams) -> Self {
        Self { model: Model::Ikeda(params), sampling_interval: 1.0, step: 1.0 }
    }

    pub fn food_chain(params: FoodChainParams) -> Self {
        Self { model: Model::FoodChain(params), sampling_interval: 1.0, step: 1e-2 }
    }

    pub fn kind(&self) -> SystemKind {
        self.model.kind()
    }

    pub fn dimension(&self) -> usize {
        self.model.dimension()
    }

    pub fn parameter_name(&self) -> &'static str {
        self.model.parameter_name()
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(self.sampling_interval.is_finite() && self.sampling_interval > 0.0) {
            return Err(Error::InvalidConfig(format!("sampling interval must be positive, got {}", self.sampling_interval)));
        }
        match self.kind() {
            SystemKind::DiscreteMap => {
                if self.sampling_interval.fract() != 0.0 {
                    return Err(Error::InvalidConfig("map sampling interval must be a whole number of iterations".into()));
                }
            }
            SystemKind::ContinuousOde => {
                steps_per_sample(self.sampling_interval, self.step)?;
            }
        }
        Ok(())
    }
}

pub(crate) fn steps_per_sample(interval: f64, dt: f64) -> Result<usize> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidInput(format!("integration step must be positive, got {dt}")));
    }
    let ratio = interval / dt;
    let n = ratio.round();
    if n < 1.0 || (ratio - n).abs() > 1e-9 * n {
        return Err(Error::InvalidConfig(format!("sampling interval {interval} is not a whole multiple of the integration step {dt}")));
    }
    Ok(n as usize)
}
