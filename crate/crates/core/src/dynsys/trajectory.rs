use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Uniformly sampled M-dimensional time series tagged with the bifurcation
/// parameter it was generated at.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub param: f64,
    dt: f64,
    dim: usize,
    times: Vec<f64>,
    data: Vec<f64>,
}

impl Trajectory {
    /// Empty trajectory; samples are appended by the simulators.
    pub fn new(dim: usize, param: f64, dt: f64) -> Self {
        assert!(dim > 0, "trajectory dimension must be positive");
        Self { param, dt, dim, times: Vec::new(), data: Vec::new() }
    }

    pub fn from_samples(dim: usize, param: f64, t0: f64, dt: f64, samples: &[Vec<f64>]) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidInput(format!("sample spacing must be positive, got {dt}")));
        }
        let mut traj = Self::new(dim, param, dt);
        for (i, s) in samples.iter().enumerate() {
            if s.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: s.len() });
            }
            if s.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("sample {i} is not finite")));
            }
            traj.push(t0 + i as f64 * dt, s);
        }
        Ok(traj)
    }

    pub(crate) fn push(&mut self, t: f64, sample: &[f64]) {
        debug_assert_eq!(sample.len(), self.dim);
        self.times.push(t);
        self.data.extend_from_slice(sample);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t0(&self) -> Option<f64> {
        self.times.first().copied()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn samples(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn last(&self) -> Option<&[f64]> {
        (!self.is_empty()).then(|| self.sample(self.len() - 1))
    }

    /// Row-major sample storage.
    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, var: usize) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().skip(var).step_by(self.dim).copied()
    }

    /// Samples `[start, end)` as a new trajectory.
    pub fn slice(&self, start: usize, end: usize) -> Trajectory {
        let end = end.min(self.len());
        let start = start.min(end);
        Trajectory {
            param: self.param,
            dt: self.dt,
            dim: self.dim,
            times: self.times[start..end].to_vec(),
            data: self.data[start * self.dim..end * self.dim].to_vec(),
        }
    }

    /// Drops the first `n` samples.
    pub fn skip(&self, n: usize) -> Trajectory {
        self.slice(n, self.len())
    }

    /// Trajectory CSV: header `t,x1,...,xM,p`, one row per sample, 17
    /// significant digits, LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for i in 1..=self.dim {
            let _ = write!(out, ",x{i}");
        }
        out.push_str(",p\n");
        for (t, s) in self.times.iter().zip(self.samples()) {
            out.push_str(&fmt_f64(*t));
            for v in s {
                out.push(',');
                out.push_str(&fmt_f64(*v));
            }
            out.push(',');
            out.push_str(&fmt_f64(self.param));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Trajectory> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::format("trajectory csv", "empty file"))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        let dim = cols
            .len()
            .checked_sub(2)
            .filter(|d| *d > 0)
            .ok_or_else(|| Error::format("trajectory csv", format!("header needs t, at least one state column and p: {header:?}")))?;
        let expected: Vec<String> =
            std::iter::once("t".to_string()).chain((1..=dim).map(|i| format!("x{i}"))).chain(std::iter::once("p".to_string())).collect();
        if cols != expected {
            return Err(Error::format("trajectory csv", format!("unexpected header {header:?}")));
        }
        let mut times = Vec::new();
        let mut data = Vec::new();
        let mut param = None;
        for (lineno, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let row = parse_row(line, dim + 2).map_err(|e| Error::format("trajectory csv", format!("row {}: {e}", lineno + 2)))?;
            times.push(row[0]);
            data.extend_from_slice(&row[1..=dim]);
            let p = row[dim + 1];
            match param {
                None => param = Some(p),
                Some(q) if q.to_bits() != p.to_bits() => {
                    return Err(Error::format("trajectory csv", format!("row {}: parameter changes within file", lineno + 2)));
                }
                _ => {}
            }
        }
        let dt = match times.as_slice() {
            [a, b, ..] => b - a,
            _ => 1.0,
        };
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::format("trajectory csv", "time column must be strictly increasing"));
        }
        Ok(Trajectory { param: param.unwrap_or(f64::NAN), dt, dim, times, data })
    }
}

pub(crate) fn parse_row(line: &str, width: usize) -> std::result::Result<Vec<f64>, String> {
    let row: Vec<f64> =
        line.split(',').map(|f| f.trim().parse::<f64>().map_err(|e| format!("{f:?}: {e}"))).collect::<std::result::Result<_, _>>()?;
    if row.len() != width {
        return Err(format!("expected {width} fields, found {}", row.len()));
    }
    Ok(row)
}

/// 17 significant digits, which round-trips every finite f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_header_and_rows() {
        let t = Trajectory::from_samples(2, 0.9, 0.0, 1.0, &[vec![0.0, 0.0], vec![0.9, 0.0]]).unwrap();
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,x1,x2,p"));
        assert_eq!(lines.next(), Some("0.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0,9.0000000000000002e-1"));
        assert!(!csv.contains('\r'));
        assert_eq!(Trajectory::from_csv(&csv).unwrap(), t);
    }

    #[test]
    fn csv_rejects_bad_header_and_ragged_rows() {
        assert!(Trajectory::from_csv("time,x1,p\n").is_err());
        assert!(Trajectory::from_csv("t,x1,p\n0,1\n").is_err());
        assert!(Trajectory::from_csv("t,x1,p\n0,1,0.5\n1,2,0.6\n").is_err());
    }

    #[test]
    fn from_samples_validates() {
        assert!(Trajectory::from_samples(2, 0.0, 0.0, 0.0, &[]).is_err());
        assert!(Trajectory::from_samples(2, 0.0, 0.0, 1.0, &[vec![1.0]]).is_err());
        assert!(Trajectory::from_samples(1, 0.0, 0.0, 1.0, &[vec![f64::NAN]]).is_err());
    }
}
