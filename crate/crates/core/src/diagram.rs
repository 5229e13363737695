//! Attractor summaries and bifurcation diagrams, shared by the direct
//! simulation oracle and the twin.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dynsys::trajectory::{fmt_f64, parse_row};
use crate::dynsys::{SystemKind, Trajectory};
use crate::error::{Error, Result};

/// At most this many extrema are kept per variable.
pub const MAX_EXTREMA: usize = 200;

/// Fraction of a window, counted from its end, over which collapse is judged.
pub const COLLAPSE_TAIL: f64 = 0.25;

/// What "the attractor is gone" means for a given system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum CollapseCriterion {
    /// `variable` stays below `threshold` over the tail of the window.
    BelowThreshold { variable: usize, threshold: f64 },
    /// Every variable's peak-to-peak range over the tail is below
    /// `amplitude` (convergence to a fixed point). Any |value| above `blowup`
    /// marks the run as diverged.
    FixedPoint { amplitude: f64, blowup: f64 },
}

impl CollapseCriterion {
    /// Same predicate for data multiplied by `factor > 0`.
    pub fn rescaled(self, factor: f64) -> Self {
        match self {
            CollapseCriterion::BelowThreshold { variable, threshold } => {
                CollapseCriterion::BelowThreshold { variable, threshold: threshold * factor }
            }
            CollapseCriterion::FixedPoint { amplitude, blowup } => {
                CollapseCriterion::FixedPoint { amplitude: amplitude * factor, blowup: blowup * factor }
            }
        }
    }

    /// Index of the first sample of the judged tail.
    pub fn tail_start(len: usize) -> usize {
        len - ((len as f64 * COLLAPSE_TAIL).ceil() as usize).min(len)
    }

    /// Applies the predicate to the tail of `traj`. Empty input is never collapsed.
    pub fn is_collapsed(&self, traj: &Trajectory) -> bool {
        if traj.is_empty() {
            return false;
        }
        let tail = traj.skip(Self::tail_start(traj.len()));
        match *self {
            CollapseCriterion::BelowThreshold { variable, threshold } => tail.column(variable).all(|v| v < threshold),
            CollapseCriterion::FixedPoint { amplitude, .. } => (0..tail.dim()).all(|var| {
                let (lo, hi) = min_max(tail.column(var));
                hi - lo < amplitude
            }),
        }
    }

    pub fn is_blown_up(&self, sample: &[f64]) -> bool {
        match *self {
            CollapseCriterion::FixedPoint { blowup, .. } => sample.iter().any(|v| !(v.abs() <= blowup)),
            CollapseCriterion::BelowThreshold { .. } => sample.iter().any(|v| !v.is_finite()),
        }
    }
}

fn min_max(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariableSummary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Maps: the last iterates. Flows: the last local maxima.
    pub extrema: Vec<f64>,
}

impl VariableSummary {
    /// Peak-to-peak oscillation amplitude.
    pub fn amplitude(&self) -> f64 {
        self.max - self.min
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttractorSummary {
    pub variables: Vec<VariableSummary>,
    pub collapsed: bool,
    pub diverged: bool,
}

impl AttractorSummary {
    /// Summarizes a post-transient window. `diverged` is forced when the
    /// producer already gave up on the run.
    pub fn from_window(window: &Trajectory, kind: SystemKind, criterion: &CollapseCriterion, diverged: bool) -> Self {
        let diverged = diverged || window.samples().any(|s| criterion.is_blown_up(s));
        let variables = (0..window.dim())
            .map(|var| {
                let col: Vec<f64> = window.column(var).collect();
                let (min, max) = if col.is_empty() { (f64::NAN, f64::NAN) } else { min_max(col.iter().copied()) };
                let mean = col.iter().sum::<f64>() / col.len() as f64;
                VariableSummary { min, max, mean, extrema: extrema(&col, kind) }
            })
            .collect();
        let collapsed = !diverged && criterion.is_collapsed(window);
        Self { variables, collapsed, diverged }
    }
}

fn extrema(col: &[f64], kind: SystemKind) -> Vec<f64> {
    let picked: Vec<f64> = match kind {
        SystemKind::DiscreteMap => col.to_vec(),
        SystemKind::ContinuousOde => col.windows(3).filter(|w| w[1] > w[0] && w[1] >= w[2]).map(|w| w[1]).collect(),
    };
    picked[picked.len().saturating_sub(MAX_EXTREMA)..].to_vec()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagramSource {
    Twin,
    Oracle,
}

impl DiagramSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            DiagramSource::Twin => "twin",
            DiagramSource::Oracle => "oracle",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramEntry {
    pub p: f64,
    pub summary: AttractorSummary,
}

/// Per-parameter attractor summaries, sorted by parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BifurcationDiagram {
    pub source: DiagramSource,
    pub entries: Vec<DiagramEntry>,
}

pub const DIAGRAM_CSV_HEADER: &str = "source,p,variable,min,max,mean,collapsed,diverged,extrema";

impl BifurcationDiagram {
    pub fn params(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.p).collect()
    }

    pub fn collapsed_flags(&self) -> Vec<bool> {
        self.entries.iter().map(|e| e.summary.collapsed).collect()
    }

    /// One row per (p, variable). `extrema` is a `;`-separated list;
    /// `collapsed`/`diverged` are `0`/`1` and repeat on every variable row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(DIAGRAM_CSV_HEADER);
        out.push('\n');
        for e in &self.entries {
            for (var, v) in e.summary.variables.iter().enumerate() {
                let ext: Vec<String> = v.extrema.iter().map(|x| fmt_f64(*x)).collect();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    self.source.as_str(),
                    fmt_f64(e.p),
                    var + 1,
                    fmt_f64(v.min),
                    fmt_f64(v.max),
                    fmt_f64(v.mean),
                    u8::from(e.summary.collapsed),
                    u8::from(e.summary.diverged),
                    ext.join(";")
                );
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |detail: String| Error::format("diagram csv", detail);
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(DIAGRAM_CSV_HEADER) {
            return Err(bad(format!("header must be {DIAGRAM_CSV_HEADER:?}")));
        }
        let mut source = None;
        let mut entries: Vec<DiagramEntry> = Vec::new();
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let row = i + 2;
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 9 {
                return Err(bad(format!("row {row}: expected 9 fields, found {}", fields.len())));
            }
            let src = match fields[0] {
                "twin" => DiagramSource::Twin,
                "oracle" => DiagramSource::Oracle,
                other => return Err(bad(format!("row {row}: unknown source {other:?}"))),
            };
            if *source.get_or_insert(src) != src {
                return Err(bad(format!("row {row}: mixed sources")));
            }
            let nums = parse_row(&fields[1..6].join(","), 5).map_err(|e| bad(format!("row {row}: {e}")))?;
            let flag = |s: &str| match s {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(bad(format!("row {row}: flag must be 0 or 1, got {other:?}"))),
            };
            let (collapsed, diverged) = (flag(fields[6])?, flag(fields[7])?);
            let extrema = if fields[8].is_empty() {
                Vec::new()
            } else {
                parse_row(&fields[8].replace(';', ","), fields[8].split(';').count()).map_err(|e| bad(format!("row {row}: {e}")))?
            };
            let var = nums[1] as usize;
            let summary = VariableSummary { min: nums[2], max: nums[3], mean: nums[4], extrema };
            match entries.last_mut() {
                Some(e) if e.p.to_bits() == nums[0].to_bits() => {
                    if var != e.summary.variables.len() + 1 || e.summary.collapsed != collapsed || e.summary.diverged != diverged {
                        return Err(bad(format!("row {row}: inconsistent variable rows for p = {}", nums[0])));
                    }
                    e.summary.variables.push(summary);
                }
                last => {
                    if var != 1 || last.is_some_and(|e| !(e.p < nums[0])) {
                        return Err(bad(format!("row {row}: entries must be sorted by p and start at variable 1")));
                    }
                    entries.push(DiagramEntry { p: nums[0], summary: AttractorSummary { variables: vec![summary], collapsed, diverged } });
                }
            }
        }
        Ok(Self { source: source.unwrap_or(DiagramSource::Oracle), entries })
    }
}
