use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::{CsrMatrix, ReservoirConfig};
use crate::error::{Error, Result};
use crate::rng::{stage_rng, Stage};

pub const POWER_TOLERANCE: f64 = 1e-9;
pub const POWER_MAX_ITERATIONS: usize = 10_000;

/// The fixed random matrices of a reservoir.
#[derive(Clone, Debug, PartialEq)]
pub struct ReservoirMatrices {
    /// N x M input weights.
    pub w_in: DMatrix<f64>,
    /// N-vector feeding the bifurcation parameter into every neuron.
    pub w_p: DVector<f64>,
    /// N x N recurrent weights.
    pub w_r: CsrMatrix,
    pub bias: DVector<f64>,
}

impl ReservoirMatrices {
    pub fn size(&self) -> usize {
        self.w_r.dim()
    }

    pub fn input_dim(&self) -> usize {
        self.w_in.ncols()
    }

    pub(crate) fn check(&self) -> Result<()> {
        let n = self.size();
        if self.w_in.nrows() != n || self.w_p.len() != n || self.bias.len() != n {
            return Err(Error::InvalidConfig("reservoir matrices have inconsistent sizes".into()));
        }
        let finite = self.w_in.iter().chain(self.w_p.iter()).chain(self.bias.iter()).chain(self.w_r.values()).all(|v| v.is_finite());
        if !finite {
            return Err(Error::Numerical("reservoir matrices contain non-finite entries".into()));
        }
        Ok(())
    }
}

/// Generates the reservoir for `config`: an Erdős–Rényi recurrent matrix with
/// uniform weights rescaled to the target spectral radius, and uniform input,
/// parameter and bias weights.
pub fn build_reservoir(config: &ReservoirConfig) -> Result<ReservoirMatrices> {
    config.validate()?;
    let n = config.size;
    let mut pattern = stage_rng(config.seed, Stage::RecurrentPattern);
    let mut weights = stage_rng(config.seed, Stage::RecurrentWeights);
    let rows = (0..n)
        .map(|_| (0..n).filter(|_| pattern.random::<f64>() < config.density).map(|j| (j, weights.random_range(-1.0..=1.0))).collect())
        .collect();
    let mut w_r = CsrMatrix::from_rows(n, rows);
    let radius = spectral_radius(&w_r)?;
    if radius == 0.0 {
        return Err(Error::DegenerateReservoir);
    }
    w_r.scale(config.spectral_radius / radius);

    let uniform = |stage, len: usize, scale: f64| -> Vec<f64> {
        let mut rng = stage_rng(config.seed, stage);
        (0..len).map(|_| if scale == 0.0 { 0.0 } else { rng.random_range(-scale..=scale) }).collect()
    };
    let w_in = DMatrix::from_row_slice(n, config.input_dim, &uniform(Stage::InputWeights, n * config.input_dim, config.input_scaling));
    let w_p = DVector::from_vec(uniform(Stage::ParamWeights, n, config.param_scaling));
    let bias = DVector::from_vec(uniform(Stage::Bias, n, config.bias_scaling));
    let mats = ReservoirMatrices { w_in, w_p, w_r, bias };
    mats.check()?;
    Ok(mats)
}

/// Largest eigenvalue modulus by power iteration from the normalized
/// all-ones vector.
///
/// Plain power iteration cannot settle when several eigenvalues share the
/// largest modulus (a complex-conjugate pair, or a permutation-like cycle), so
/// each sweep builds an orthonormal Krylov block from the current iterate and
/// reads the estimate off the eigenvalues of the projected block
/// (Rayleigh–Ritz). The next sweep restarts from the normalized power iterate.
///
/// A matrix whose sparsity graph has no directed cycle is nilpotent; its
/// radius is reported as exactly zero rather than as the O(ε^(1/k)) round-off
/// an eigensolver produces for it.
pub fn spectral_radius(a: &CsrMatrix) -> Result<f64> {
    if a.has_acyclic_pattern() {
        return Ok(0.0);
    }
    krylov_radius(a)
}

fn krylov_radius(a: &CsrMatrix) -> Result<f64> {
    let n = a.dim();
    let k = n.min(KRYLOV_BLOCK);
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut prev = f64::NAN;
    let mut stable = 0;
    let mut matvecs = 0;
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k + 1);
    let mut w = vec![0.0; n];
    while matvecs < POWER_MAX_ITERATIONS {
        basis.clear();
        basis.push(x.clone());
        let mut h = DMatrix::<f64>::zeros(k + 1, k);
        let mut dim = k;
        for j in 0..k {
            a.mul_vec_into(&basis[j], &mut w);
            matvecs += 1;
            // Modified Gram-Schmidt, applied twice.
            for _ in 0..2 {
                for (i, q) in basis.iter().enumerate() {
                    let c = dot(q, &w);
                    h[(i, j)] += c;
                    w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
                }
            }
            let beta = norm(&w);
            h[(j + 1, j)] = beta;
            if beta <= 1e-12 * h.column(j).amax().max(f64::MIN_POSITIVE) || beta == 0.0 {
                // Invariant subspace: the projected eigenvalues are exact.
                dim = j + 1;
                break;
            }
            basis.push(w.iter().map(|v| v / beta).collect());
        }
        let projected = h.view((0, 0), (dim, dim)).into_owned();
        let estimate = projected.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dim < k || estimate == 0.0 {
            return Ok(estimate);
        }
        if (estimate - prev).abs() <= POWER_TOLERANCE * estimate {
            stable += 1;
            if stable >= 2 {
                return Ok(estimate);
            }
        } else {
            stable = 0;
        }
        prev = estimate;
        // Restart from the power iterate A^k x.
        for _ in 0..k {
            a.mul_vec_into(&x, &mut w);
            matvecs += 1;
            let nw = norm(&w);
            if nw == 0.0 {
                return Ok(0.0);
            }
            x.iter_mut().zip(&w).for_each(|(xi, wi)| *xi = wi / nw);
        }
    }
    Err(Error::Numerical(format!("power iteration did not converge to {POWER_TOLERANCE:e} within {POWER_MAX_ITERATIONS} iterations")))
}

const KRYLOV_BLOCK: usize = 12;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
