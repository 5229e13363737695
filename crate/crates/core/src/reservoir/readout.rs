use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Trained linear output layer, `v = W_out r`.
#[derive(Clone, Debug, PartialEq)]
pub struct Readout {
    /// L x N.
    pub w_out: DMatrix<f64>,
}

impl Readout {
    pub fn output_dim(&self) -> usize {
        self.w_out.nrows()
    }

    pub fn apply(&self, r: &DVector<f64>) -> DVector<f64> {
        let mut v = vec![0.0; self.output_dim()];
        self.apply_into(r, &mut v);
        DVector::from_vec(v)
    }

    pub(crate) fn apply_into(&self, r: &DVector<f64>, out: &mut [f64]) {
        let l = self.output_dim();
        out.iter_mut().for_each(|v| *v = 0.0);
        // column-major: walk columns once
        for (j, col) in self.w_out.as_slice().chunks_exact(l).enumerate() {
            let rj = r[j];
            for (o, w) in out.iter_mut().zip(col) {
                *o += w * rj;
            }
        }
    }
}

/// Result of a ridge fit.
#[derive(Clone, Debug, PartialEq)]
pub struct Fit {
    pub readout: Readout,
    /// Root-mean-square training error per output component.
    pub residual: f64,
    pub samples: usize,
}

const CHUNK: usize = 512;

/// Streaming accumulator for the regularized normal equations
/// `(Σ r rᵀ + β I) W_outᵀ = Σ r yᵀ`. Samples are folded in order in fixed-size
/// blocks, so the result depends only on the sample sequence.
#[derive(Clone, Debug)]
pub struct NormalEquations {
    n: usize,
    l: usize,
    gram: DMatrix<f64>,
    cross: DMatrix<f64>,
    target_sq: f64,
    count: usize,
    states: Vec<f64>,
    targets: Vec<f64>,
}

impl NormalEquations {
    pub fn new(n: usize, l: usize) -> Self {
        Self {
            n,
            l,
            gram: DMatrix::zeros(n, n),
            cross: DMatrix::zeros(n, l),
            target_sq: 0.0,
            count: 0,
            states: Vec::with_capacity(n * CHUNK),
            targets: Vec::with_capacity(l * CHUNK),
        }
    }

    pub fn len(&self) -> usize {
        self.count + self.states.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn push(&mut self, r: &[f64], y: &[f64]) -> Result<()> {
        if r.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: r.len() });
        }
        if y.len() != self.l {
            return Err(Error::DimensionMismatch { expected: self.l, got: y.len() });
        }
        if r.iter().chain(y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite training sample".into()));
        }
        self.states.extend_from_slice(r);
        self.targets.extend_from_slice(y);
        if self.states.len() == self.n * CHUNK {
            self.flush();
        }
        Ok(())
    }

    fn flush(&mut self) {
        let cols = self.states.len() / self.n;
        if cols == 0 {
            return;
        }
        let r = DMatrix::from_column_slice(self.n, cols, &self.states);
        let y = DMatrix::from_column_slice(self.l, cols, &self.targets);
        self.gram.gemm(1.0, &r, &r.transpose(), 1.0);
        self.cross.gemm(1.0, &r, &y.transpose(), 1.0);
        self.target_sq += self.targets.iter().map(|v| v * v).sum::<f64>();
        self.count += cols;
        self.states.clear();
        self.targets.clear();
    }

    /// Solves for `W_out` by Cholesky factorization of `Σ r rᵀ + β I`.
    pub fn solve(mut self, ridge: f64) -> Result<Fit> {
        if !(ridge.is_finite() && ridge >= 0.0) {
            return Err(Error::InvalidConfig(format!("ridge coefficient must be non-negative, got {ridge}")));
        }
        self.flush();
        if self.count == 0 {
            return Err(Error::InvalidInput("no training samples".into()));
        }
        let mut a = self.gram.clone();
        for i in 0..self.n {
            a[(i, i)] += ridge;
        }
        let singular = || {
            if ridge == 0.0 {
                Error::RankDeficient
            } else {
                Error::Numerical(format!("normal matrix is not positive definite at ridge {ridge:e}"))
            }
        };
        let chol = a.cholesky().ok_or_else(singular)?;
        if ridge == 0.0 {
            // Cholesky succeeds on some numerically singular matrices; reject
            // a vanishing pivot relative to the largest one.
            let l = chol.l_dirty();
            let diag: Vec<f64> = (0..self.n).map(|i| l[(i, i)]).collect();
            let max = diag.iter().cloned().fold(0.0, f64::max);
            if diag.iter().any(|d| *d <= max * 1e-7) {
                return Err(Error::RankDeficient);
            }
        }
        let x = chol.solve(&self.cross);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(singular());
        }
        // Σ‖W r − y‖² = Σ‖y‖² − 2 tr(Xᵀ C) + tr(Xᵀ G X), with X = W_outᵀ.
        let gx = &self.gram * &x;
        let sq = self.target_sq - 2.0 * x.dot(&self.cross) + x.dot(&gx);
        let residual = (sq.max(0.0) / (self.count * self.l) as f64).sqrt();
        Ok(Fit { readout: Readout { w_out: x.transpose() }, residual, samples: self.count })
    }
}

/// Ridge-regression readout: `W_out = argmin Σ‖W r(t) − y(t)‖² + β‖W‖²_F`.
pub fn fit_readout(states: &[DVector<f64>], targets: &[DVector<f64>], ridge: f64) -> Result<Fit> {
    if states.len() != targets.len() {
        return Err(Error::InvalidInput(format!("{} states but {} targets", states.len(), targets.len())));
    }
    let first = states.first().ok_or_else(|| Error::InvalidInput("no training samples".into()))?;
    let mut eq = NormalEquations::new(first.len(), targets[0].len());
    for (r, y) in states.iter().zip(targets) {
        eq.push(r.as_slice(), y.as_slice())?;
    }
    eq.solve(ridge)
}

#[cfg(test)]
mod tests {
    use rand::Rng;

    use super::*;

    fn random_states(n: usize, t: usize, seed: u64) -> Vec<DVector<f64>> {
        let mut rng = crate::rng::stage_rng(seed, crate::rng::Stage::InitialState);
        (0..t).map(|_| DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))).collect()
    }

    #[test]
    fn recovers_exact_linear_model() {
        let (n, l) = (12, 3);
        let a = DMatrix::from_fn(l, n, |i, j| ((i * n + j) as f64).cos());
        let states = random_states(n, 200, 1);
        let targets: Vec<_> = states.iter().map(|r| &a * r).collect();
        let fit = fit_readout(&states, &targets, 0.0).unwrap();
        assert!((&fit.readout.w_out - &a).amax() < 1e-8);
        assert!(fit.residual < 1e-6);
    }

    #[test]
    fn large_ridge_shrinks_weights() {
        let states = random_states(10, 100, 2);
        let targets: Vec<_> = states.iter().map(|r| DVector::from_element(2, r.sum())).collect();
        let small = fit_readout(&states, &targets, 1e-6).unwrap().readout.w_out.norm();
        let large = fit_readout(&states, &targets, 1e6).unwrap().readout.w_out.norm();
        assert!(large < 1e-3 * small, "{large} vs {small}");
    }

    #[test]
    fn duplicated_neuron_is_rank_deficient_without_ridge() {
        let mut states = random_states(6, 50, 3);
        for s in &mut states {
            s[5] = s[4];
        }
        let targets: Vec<_> = states.iter().map(|r| DVector::from_element(1, r[0])).collect();
        assert!(matches!(fit_readout(&states, &targets, 0.0), Err(Error::RankDeficient)));
        assert!(fit_readout(&states, &targets, 1e-3).is_ok());
    }

    #[test]
    fn residual_matches_direct_evaluation() {
        let states = random_states(8, 300, 4);
        let targets: Vec<_> = states.iter().map(|r| DVector::from_vec(vec![r[0].sin(), r[1] * r[2]])).collect();
        let fit = fit_readout(&states, &targets, 1e-3).unwrap();
        let direct =
            (states.iter().zip(&targets).map(|(r, y)| (fit.readout.apply(r) - y).norm_squared()).sum::<f64>() / (300.0 * 2.0)).sqrt();
        assert!((fit.residual - direct).abs() < 1e-10);
    }

    #[test]
    fn mismatched_lengths_rejected() {
        let states = random_states(4, 10, 5);
        let targets = vec![DVector::from_element(1, 0.0); 9];
        assert!(fit_readout(&states, &targets, 0.0).is_err());
        assert!(fit_readout(&[], &[], 0.0).is_err());
    }
}
