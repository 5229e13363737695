use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::diagram::{AttractorSummary, BifurcationDiagram, CollapseCriterion, DiagramSource};
use crate::dynsys::trajectory::fmt_f64;
use crate::dynsys::{ScanSettings, SystemKind, Trajectory};
use crate::error::{Error, Result};

use super::predict::rollout;
use super::TrainedTwin;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransitionKind {
    Collapse,
    None,
    Diverged,
}

impl TransitionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TransitionKind::Collapse => "collapse",
            TransitionKind::None => "none",
            TransitionKind::Diverged => "diverged",
        }
    }
}

/// One summary row the verdict rests on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub p: f64,
    pub summary: AttractorSummary,
}

/// Outcome of [`detect_transition`].
///
/// `bracket` is set in diagram mode when the collapsed flag changes along the
/// grid; its endpoints are grid points or bisection iterates and `lo < hi`.
/// `onset` is set in trajectory mode: the time from which the trajectory
/// stays collapsed to the end of the window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionReport {
    pub kind: TransitionKind,
    pub bracket: Option<(f64, f64)>,
    pub onset: Option<f64>,
    pub evidence: Vec<Evidence>,
    pub notes: Vec<String>,
}

/// What to look for a transition in.
#[derive(Clone, Copy, Debug)]
pub enum TransitionInput<'a> {
    Trajectory { trajectory: &'a Trajectory, kind: SystemKind, criterion: CollapseCriterion },
    Diagram(&'a BifurcationDiagram),
}

pub fn detect_transition(input: TransitionInput<'_>) -> TransitionReport {
    match input {
        TransitionInput::Trajectory { trajectory, kind, criterion } => detect_in_trajectory(trajectory, kind, &criterion),
        TransitionInput::Diagram(d) => detect_in_diagram(d),
    }
}

/// Trajectory mode: collapse iff the criterion holds over the final quarter
/// of the window; the onset is where the collapsed stretch that reaches the
/// end of the window begins.
pub fn detect_in_trajectory(traj: &Trajectory, kind: SystemKind, criterion: &CollapseCriterion) -> TransitionReport {
    let mut report = TransitionReport { kind: TransitionKind::None, bracket: None, onset: None, evidence: Vec::new(), notes: Vec::new() };
    if traj.is_empty() {
        report.notes.push("insufficient data: empty trajectory".into());
        return report;
    }
    let summary = AttractorSummary::from_window(traj, kind, criterion, false);
    if summary.diverged {
        report.kind = TransitionKind::Diverged;
        report.notes.push("trajectory leaves the admissible range".into());
    } else if summary.collapsed {
        report.kind = TransitionKind::Collapse;
        let start = collapsed_since(traj, criterion);
        report.onset = Some(traj.times()[start]);
    }
    report.evidence.push(Evidence { p: traj.param, summary });
    report
}

/// Earliest index `i` such that samples `i..` satisfy the criterion.
fn collapsed_since(traj: &Trajectory, criterion: &CollapseCriterion) -> usize {
    let n = traj.len();
    match *criterion {
        CollapseCriterion::BelowThreshold { variable, threshold } => {
            (0..n).rev().find(|&i| traj.sample(i)[variable] >= threshold).map_or(0, |i| i + 1)
        }
        CollapseCriterion::FixedPoint { amplitude, .. } => {
            let dim = traj.dim();
            let mut lo = vec![f64::INFINITY; dim];
            let mut hi = vec![f64::NEG_INFINITY; dim];
            for i in (0..n).rev() {
                for (v, &x) in traj.sample(i).iter().enumerate() {
                    lo[v] = lo[v].min(x);
                    hi[v] = hi[v].max(x);
                    if hi[v] - lo[v] >= amplitude {
                        return i + 1;
                    }
                }
            }
            0
        }
    }
}

/// Diagram mode: brackets the first change of the collapsed flag between
/// neighbouring non-diverged grid points.
pub fn detect_in_diagram(diagram: &BifurcationDiagram) -> TransitionReport {
    let mut report = TransitionReport { kind: TransitionKind::None, bracket: None, onset: None, evidence: Vec::new(), notes: Vec::new() };
    if diagram.entries.is_empty() {
        report.notes.push("insufficient data: empty diagram".into());
        return report;
    }
    let usable: Vec<_> = diagram.entries.iter().filter(|e| !e.summary.diverged).collect();
    let diverged = diagram.entries.len() - usable.len();
    if usable.is_empty() {
        report.kind = TransitionKind::Diverged;
        report.notes.push("every grid point diverged".into());
        report.evidence = diagram.entries.iter().map(|e| Evidence { p: e.p, summary: e.summary.clone() }).collect();
        return report;
    }
    if diverged > 0 {
        report.notes.push(format!("{diverged} diverged grid point(s) ignored"));
    }
    let flips: Vec<usize> = (1..usable.len()).filter(|&i| usable[i].summary.collapsed != usable[i - 1].summary.collapsed).collect();
    match flips.first() {
        Some(&i) => {
            let (a, b) = (usable[i - 1], usable[i]);
            report.kind = TransitionKind::Collapse;
            report.bracket = Some((a.p, b.p));
            if a.summary.collapsed {
                report.notes.push("collapsed below the bracket and sustained above it".into());
            }
            if flips.len() > 1 {
                report.notes.push(format!("warning: collapsed flag flips {} times along the grid; reporting the first", flips.len()));
            }
            report.evidence = vec![Evidence { p: a.p, summary: a.summary.clone() }, Evidence { p: b.p, summary: b.summary.clone() }];
        }
        None if usable[0].summary.collapsed => {
            report.kind = TransitionKind::Collapse;
            report.notes.push("collapsed at every grid point; the transition lies outside the grid".into());
            report.evidence = usable.iter().map(|e| Evidence { p: e.p, summary: e.summary.clone() }).collect();
        }
        None => {
            report.evidence = usable.iter().map(|e| Evidence { p: e.p, summary: e.summary.clone() }).collect();
        }
    }
    if diagram.source == DiagramSource::Oracle {
        report.notes.push("source: direct simulation".into());
    }
    report
}

/// Narrows a bracket `(lo, hi)` whose endpoints have collapsed flags
/// `lo_collapsed` and `!lo_collapsed` by bisection with twin rollouts. Every
/// iterate halves the interval and stays inside it. Stops early (with a note)
/// if a midpoint diverges. Returns the bracket and the midpoint evidence.
pub fn refine_bracket(
    twin: &TrainedTwin,
    bracket: (f64, f64),
    lo_collapsed: bool,
    warm: &Trajectory,
    settings: &ScanSettings,
    iterations: usize,
) -> Result<(f64, f64, Vec<Evidence>, Option<String>)> {
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInput(format!("bracket ({lo}, {hi}) is not an increasing finite interval")));
    }
    let interval = twin.system.map_or(1.0, |s| s.sampling_interval);
    let (skip, keep) = settings.samples(interval);
    let criterion = settings.criterion.unwrap_or(twin.criterion);
    let mut evidence = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        if !(lo < mid && mid < hi) {
            break;
        }
        let (traj, diverged) = rollout(twin, mid, warm, skip + keep)?;
        let summary = AttractorSummary::from_window(&traj.skip(skip), twin.kind(), &criterion, diverged);
        let (collapsed, diverged) = (summary.collapsed, summary.diverged);
        evidence.push(Evidence { p: mid, summary });
        if diverged {
            return Ok((lo, hi, evidence, Some(format!("bisection stopped: twin diverged at p = {mid}"))));
        }
        if collapsed == lo_collapsed {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi, evidence, None))
}

/// Diagram-mode detection on a twin scan followed by `iterations` bisection
/// steps on the bracket, if one was found.
pub fn detect_and_refine(
    twin: &TrainedTwin,
    diagram: &BifurcationDiagram,
    warm: &Trajectory,
    settings: &ScanSettings,
    iterations: usize,
) -> Result<TransitionReport> {
    let mut report = detect_in_diagram(diagram);
    if let (Some(b), Some(first)) = (report.bracket, report.evidence.first()) {
        let (lo, hi, extra, note) = refine_bracket(twin, b, first.summary.collapsed, warm, settings, iterations)?;
        report.bracket = Some((lo, hi));
        report.evidence.extend(extra);
        report.evidence.sort_by(|a, b| a.p.total_cmp(&b.p));
        report.notes.push(format!("bracket refined by {iterations} bisection step(s)"));
        report.notes.extend(note);
    }
    Ok(report)
}

pub const REPORT_CSV_HEADER: &str = "kind,p_lo,p_hi,onset,p,variable,min,max,mean,collapsed,diverged";

impl TransitionReport {
    /// One row per (evidence p, variable); the verdict columns repeat on
    /// every row and are empty when absent. A report without evidence is a
    /// single row with empty evidence columns.
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        let head =
            format!("{},{},{},{}", self.kind.as_str(), opt(self.bracket.map(|b| b.0)), opt(self.bracket.map(|b| b.1)), opt(self.onset));
        let mut out = String::from(REPORT_CSV_HEADER);
        out.push('\n');
        if self.evidence.is_empty() {
            let _ = writeln!(out, "{head},,,,,,,");
        }
        for e in &self.evidence {
            for (i, v) in e.summary.variables.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{head},{},{},{},{},{},{},{}",
                    fmt_f64(e.p),
                    i + 1,
                    fmt_f64(v.min),
                    fmt_f64(v.max),
                    fmt_f64(v.mean),
                    u8::from(e.summary.collapsed),
                    u8::from(e.summary.diverged)
                );
            }
        }
        out
    }

    /// Human-readable TOML rendering of the full report.
    pub fn to_text(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            transition: Head<'a>,
            evidence: Vec<Row>,
        }
        #[derive(Serialize)]
        struct Head<'a> {
            kind: &'a str,
            #[serde(skip_serializing_if = "Option::is_none")]
            p_lo: Option<f64>,
            #[serde(skip_serializing_if = "Option::is_none")]
            p_hi: Option<f64>,
            #[serde(skip_serializing_if = "Option::is_none")]
            onset: Option<f64>,
            notes: &'a [String],
        }
        #[derive(Serialize)]
        struct Row {
            p: f64,
            collapsed: bool,
            diverged: bool,
            min: Vec<f64>,
            max: Vec<f64>,
            mean: Vec<f64>,
        }
        let doc = Doc {
            transition: Head {
                kind: self.kind.as_str(),
                p_lo: self.bracket.map(|b| b.0),
                p_hi: self.bracket.map(|b| b.1),
                onset: self.onset,
                notes: &self.notes,
            },
            evidence: self
                .evidence
                .iter()
                .map(|e| Row {
                    p: e.p,
                    collapsed: e.summary.collapsed,
                    diverged: e.summary.diverged,
                    min: e.summary.variables.iter().map(|v| v.min).collect(),
                    max: e.summary.variables.iter().map(|v| v.max).collect(),
                    mean: e.summary.variables.iter().map(|v| v.mean).collect(),
                })
                .collect(),
        };
        toml::to_string(&doc).expect("report fields are plain numbers and strings")
    }
}
