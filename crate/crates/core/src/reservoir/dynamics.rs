use nalgebra::DVector;

use super::{Readout, ReservoirConfig, ReservoirMatrices};
use crate::error::{Error, Result};

/// Neuron activations `r(t)` at step `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReservoirState {
    pub r: DVector<f64>,
    pub t: usize,
}

impl ReservoirState {
    pub fn zeros(n: usize) -> Self {
        Self { r: DVector::zeros(n), t: 0 }
    }
}

/// Leaky-tanh update
/// `r ← (1 − α) r + α tanh(W_r r + W_in u + W_p p + b)`, in place.
///
/// `scratch` must have length N.
pub(crate) fn update(mats: &ReservoirMatrices, leak: f64, state: &mut ReservoirState, u: &[f64], p: f64, scratch: &mut [f64]) {
    let r = state.r.as_mut_slice();
    mats.w_r.mul_vec_into(r, scratch);
    let n = r.len();
    let w_in = mats.w_in.as_slice();
    for (i, pre) in scratch.iter_mut().enumerate() {
        let mut acc = *pre + mats.w_p[i] * p + mats.bias[i];
        for (m, um) in u.iter().enumerate() {
            // column-major N x M
            acc += w_in[m * n + i] * um;
        }
        *pre = acc;
    }
    if leak == 1.0 {
        r.iter_mut().zip(scratch.iter()).for_each(|(ri, pre)| *ri = pre.tanh());
    } else {
        r.iter_mut().zip(scratch.iter()).for_each(|(ri, pre)| *ri = (1.0 - leak) * *ri + leak * pre.tanh());
    }
    state.t += 1;
}

fn check_input(u: &[f64], m: usize) -> Result<()> {
    if u.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: u.len() });
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite reservoir input {u:?}")));
    }
    Ok(())
}

/// Drives the reservoir with external inputs `u(t)` at (already normalized)
/// parameter `p`. Returns the state after each input.
pub fn drive_open_loop<'a>(
    mats: &ReservoirMatrices,
    config: &ReservoirConfig,
    r0: &ReservoirState,
    inputs: impl IntoIterator<Item = &'a [f64]>,
    p: f64,
) -> Result<Vec<ReservoirState>> {
    if !p.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite parameter value {p}")));
    }
    let mut state = r0.clone();
    let mut scratch = vec![0.0; mats.size()];
    let mut out = Vec::new();
    for u in inputs {
        check_input(u, mats.input_dim())?;
        update(mats, config.leak_rate, &mut state, u, p, &mut scratch);
        out.push(state.clone());
    }
    Ok(out)
}

/// One self-evolution step: `v = W_out r`, then `v` is fed back as the input.
pub fn step_closed_loop(
    mats: &ReservoirMatrices,
    config: &ReservoirConfig,
    readout: &Readout,
    state: &ReservoirState,
    p: f64,
) -> Result<(ReservoirState, DVector<f64>)> {
    if readout.output_dim() != mats.input_dim() {
        return Err(Error::DimensionMismatch { expected: mats.input_dim(), got: readout.output_dim() });
    }
    let mut next = state.clone();
    let mut scratch = vec![0.0; mats.size()];
    let v = readout.apply(&state.r);
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::TwinDivergence { step: state.t });
    }
    update(mats, config.leak_rate, &mut next, v.as_slice(), p, &mut scratch);
    Ok((next, v))
}

/// Closed-loop runner that reuses its buffers across steps.
pub(crate) struct ClosedLoop<'a> {
    pub mats: &'a ReservoirMatrices,
    pub readout: &'a Readout,
    pub leak: f64,
    pub scratch: Vec<f64>,
    pub v: Vec<f64>,
}

impl<'a> ClosedLoop<'a> {
    pub fn new(mats: &'a ReservoirMatrices, readout: &'a Readout, leak: f64) -> Self {
        Self { mats, readout, leak, scratch: vec![0.0; mats.size()], v: vec![0.0; readout.output_dim()] }
    }

    /// Emits `v = W_out r` into `self.v` and advances the state with it.
    pub fn step(&mut self, state: &mut ReservoirState, p: f64) -> Result<()> {
        self.readout.apply_into(&state.r, &mut self.v);
        if self.v.iter().any(|x| !x.is_finite()) {
            return Err(Error::TwinDivergence { step: state.t });
        }
        update(self.mats, self.leak, state, &self.v, p, &mut self.scratch);
        Ok(())
    }
}
