use serde::{Deserialize, Serialize};

use super::{Simulator, SystemSpec};
use crate::diagram::{AttractorSummary, BifurcationDiagram, CollapseCriterion, DiagramEntry, DiagramSource};
use crate::error::{Error, Result};

/// Transient/window policy shared by oracle and twin scans.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSettings {
    /// Time units (maps: iterations) discarded before summarizing.
    pub transient: f64,
    /// Time units (maps: iterations) summarized after the transient.
    pub window: f64,
    /// Initial condition; the model default when absent.
    pub initial: Option<Vec<f64>>,
    /// Collapse predicate; the model default when absent.
    pub criterion: Option<CollapseCriterion>,
}

impl Default for ScanSettings {
    fn default() -> Self {
        Self { transient: 1e4, window: 2e3, initial: None, criterion: None }
    }
}

impl ScanSettings {
    pub(crate) fn samples(&self, interval: f64) -> (usize, usize) {
        ((self.transient / interval).round() as usize, (self.window / interval).round().max(1.0) as usize)
    }
}

pub(crate) fn check_grid(grid: &[f64], allow_empty: bool) -> Result<()> {
    if grid.is_empty() && !allow_empty {
        return Err(Error::InvalidInput("parameter grid is empty".into()));
    }
    if grid.iter().any(|p| !p.is_finite()) || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput("parameter grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// Direct-simulation bifurcation diagram: for each `p`, discard the
/// transient, then summarize the window.
pub fn oracle_bifurcation_scan(spec: &SystemSpec, grid: &[f64], settings: &ScanSettings) -> Result<BifurcationDiagram> {
    check_grid(grid, false)?;
    spec.validate()?;
    let initial = settings.initial.clone().unwrap_or_else(|| spec.model.default_initial());
    let criterion = settings.criterion.unwrap_or_else(|| spec.model.default_collapse());
    let (skip, keep) = settings.samples(spec.sampling_interval);
    let one = |p: f64| -> Result<DiagramEntry> {
        let mut sim = Simulator::new(spec, &initial, p, spec.step)?;
        sim.skip(skip)?;
        let window = sim.record(keep)?.skip(1);
        Ok(DiagramEntry { p, summary: AttractorSummary::from_window(&window, spec.kind(), &criterion, false) })
    };
    let entries = crate::par::map_ordered(grid, one).into_iter().collect::<Result<Vec<_>>>()?;
    Ok(BifurcationDiagram { source: DiagramSource::Oracle, entries })
}

#[cfg(test)]
mod tests {
    use super::super::{FoodChainParams, IkedaParams};
    use super::*;

    #[test]
    fn ikeda_without_reflection_is_fixed_point_everywhere() {
        let spec = SystemSpec::ikeda(IkedaParams { gamma: 0.0, ..Default::default() });
        let grid = [0.6, 0.7, 0.8, 0.9, 1.0];
        let settings = ScanSettings { transient: 10.0, window: 50.0, ..Default::default() };
        let d = oracle_bifurcation_scan(&spec, &grid, &settings).unwrap();
        for e in &d.entries {
            assert_eq!(e.summary.variables[0].min, e.p);
            assert_eq!(e.summary.variables[0].max, e.p);
            assert_eq!(e.summary.variables[1].max, 0.0);
            assert!(e.summary.collapsed);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        let spec = SystemSpec::food_chain(FoodChainParams::default());
        let s = ScanSettings::default();
        assert!(oracle_bifurcation_scan(&spec, &[], &s).is_err());
        assert!(oracle_bifurcation_scan(&spec, &[1.0, 0.9], &s).is_err());
    }
}
