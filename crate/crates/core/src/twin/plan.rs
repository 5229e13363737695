use serde::{Deserialize, Serialize};

use crate::dynsys::{oracle_bifurcation_scan, ScanSettings, Simulator, SystemSpec, Trajectory};
use crate::error::{Error, Result};

/// Which parameter values to observe, and how much, before training.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingPlan {
    pub system: SystemSpec,
    /// Strictly increasing, all in the normal regime.
    pub train_params: Vec<f64>,
    pub samples_per_param: usize,
    /// Time units discarded before recording each trajectory.
    pub transient: f64,
    /// The parameter value "now".
    pub present_param: f64,
    /// Known critical value, for validation experiments only.
    pub declared_critical: Option<f64>,
    pub initial: Option<Vec<f64>>,
    /// Direct-simulation check that no training parameter is already collapsed.
    pub oracle: ScanSettings,
}

impl TrainingPlan {
    pub fn new(system: SystemSpec, train_params: Vec<f64>) -> Self {
        let present = train_params.last().copied().unwrap_or(f64::NAN);
        Self {
            system,
            train_params,
            samples_per_param: 10_000,
            transient: 1_000.0,
            present_param: present,
            declared_critical: None,
            initial: None,
            oracle: ScanSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidPlan(m));
        if self.train_params.is_empty() {
            return bad("no training parameter values".into());
        }
        if self.train_params.iter().any(|p| !p.is_finite()) || self.train_params.windows(2).any(|w| !(w[0] < w[1])) {
            return bad(format!("training parameters must be finite and strictly increasing: {:?}", self.train_params));
        }
        if let Some(pc) = self.declared_critical {
            if let Some(p) = self.train_params.iter().find(|p| **p >= pc) {
                return bad(format!("training parameter {p} is not below the declared critical value {pc}"));
            }
        }
        if self.samples_per_param < 2 {
            return bad("need at least 2 samples per parameter".into());
        }
        Ok(())
    }
}

/// Trajectories tagged with the parameter they were observed at.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeriesSet {
    /// The generating system, when known.
    pub system: Option<SystemSpec>,
    pub trajectories: Vec<Trajectory>,
}

impl TimeSeriesSet {
    pub fn params(&self) -> Vec<f64> {
        self.trajectories.iter().map(|t| t.param).collect()
    }

    pub fn dim(&self) -> Option<usize> {
        self.trajectories.first().map(Trajectory::dim)
    }

    /// Trajectory observed at the present parameter (the last one).
    pub fn latest(&self) -> Option<&Trajectory> {
        self.trajectories.last()
    }
}

/// Simulates one trajectory per training parameter. Refuses any parameter at
/// which the direct-simulation oracle finds the system already collapsed.
pub fn assemble_training_data(plan: &TrainingPlan) -> Result<TimeSeriesSet> {
    plan.validate()?;
    plan.system.validate()?;
    let oracle = oracle_bifurcation_scan(&plan.system, &plan.train_params, &plan.oracle)?;
    if let Some(e) = oracle.entries.iter().find(|e| e.summary.collapsed) {
        return Err(Error::InvalidPlan(format!(
            "{} = {} is already past the transition (the system collapses there); train on the normal regime only",
            plan.system.parameter_name(),
            e.p
        )));
    }
    let initial = plan.initial.clone().unwrap_or_else(|| plan.system.model.default_initial());
    let skip = (plan.transient / plan.system.sampling_interval).round() as usize;
    let trajectories = crate::par::map_ordered(&plan.train_params, |p| -> Result<Trajectory> {
        let mut sim = Simulator::new(&plan.system, &initial, p, plan.system.step)?;
        sim.skip(skip)?;
        sim.record(plan.samples_per_param - 1)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(TimeSeriesSet { system: Some(plan.system), trajectories })
}
