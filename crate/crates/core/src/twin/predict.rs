use std::fmt;

use serde::{Deserialize, Serialize};

use crate::diagram::{AttractorSummary, BifurcationDiagram, DiagramEntry, DiagramSource};
use crate::dynsys::{ScanSettings, Trajectory};
use crate::error::{Error, Result};
use crate::reservoir::ClosedLoop;

use super::TrainedTwin;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Sustained,
    Collapsed,
    Diverged,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Sustained => "sustained",
            Status::Collapsed => "collapsed",
            Status::Diverged => "diverged",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Forecast {
    /// De-normalized closed-loop output; truncated if the twin diverged.
    pub trajectory: Trajectory,
    pub status: Status,
    pub note: Option<String>,
}

/// Warms the reservoir open-loop on the tail of `warm` (at most `warmup`
/// samples) while injecting `p`, then runs `horizon` closed-loop steps at `p`.
/// Returns the de-normalized outputs and whether the run was cut short.
pub(crate) fn rollout(twin: &TrainedTwin, p: f64, warm: &Trajectory, horizon: usize) -> Result<(Trajectory, bool)> {
    if !p.is_finite() {
        return Err(Error::InvalidInput(format!("parameter value {p} is not finite")));
    }
    if warm.dim() != twin.dim() {
        return Err(Error::DimensionMismatch { expected: twin.dim(), got: warm.dim() });
    }
    let start = warm.len().saturating_sub(twin.config.warmup);
    let mut state = twin.warm((start..warm.len()).map(|i| warm.sample(i)), p)?;
    let pn = twin.normalization.param(p);
    let t_last = warm.times().last().copied().unwrap_or(0.0);
    let dt = warm.dt();
    let mut out = Trajectory::new(twin.dim(), p, dt);
    let mut looped = ClosedLoop::new(&twin.matrices, &twin.readout, twin.config.leak_rate);
    let mut x = vec![0.0; twin.dim()];
    for k in 1..=horizon {
        if looped.step(&mut state, pn).is_err() {
            return Ok((out, true));
        }
        twin.normalization.inverse_into(&looped.v, &mut x);
        if twin.criterion.is_blown_up(&x) {
            return Ok((out, true));
        }
        out.push(t_last + k as f64 * dt, &x);
    }
    Ok((out, false))
}

/// Runs the twin at parameter `p` and classifies what it does.
pub fn predict_at_parameter(twin: &TrainedTwin, p: f64, warm: &Trajectory, horizon: usize) -> Result<Forecast> {
    let (trajectory, diverged) = rollout(twin, p, warm, horizon)?;
    let (status, note) = if diverged {
        (Status::Diverged, Some(format!("twin output left the admissible range after {} steps", trajectory.len())))
    } else if trajectory.is_empty() {
        (Status::Sustained, Some("insufficient data: empty forecast, no transition assessed".to_string()))
    } else if twin.criterion.is_collapsed(&trajectory) {
        (Status::Collapsed, None)
    } else {
        (Status::Sustained, None)
    };
    Ok(Forecast { trajectory, status, note })
}

/// Twin bifurcation diagram. Every grid point is warmed on the same series
/// and summarized with the oracle's transient/window policy; per-point
/// divergence is recorded and the scan continues.
pub fn scan_bifurcation(twin: &TrainedTwin, grid: &[f64], warm: &Trajectory, settings: &ScanSettings) -> Result<BifurcationDiagram> {
    crate::dynsys::scan::check_grid(grid, true)?;
    let interval = twin.system.map_or(1.0, |s| s.sampling_interval);
    let (skip, keep) = settings.samples(interval);
    let criterion = settings.criterion.unwrap_or(twin.criterion);
    let kind = twin.kind();
    let entries = crate::par::map_ordered(grid, |p| -> Result<DiagramEntry> {
        let (traj, diverged) = rollout(twin, p, warm, skip + keep)?;
        let window = traj.skip(skip);
        Ok(DiagramEntry { p, summary: AttractorSummary::from_window(&window, kind, &criterion, diverged) })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(BifurcationDiagram { source: DiagramSource::Twin, entries })
}
