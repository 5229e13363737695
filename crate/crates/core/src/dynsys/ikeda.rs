use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ikeda optical-cavity map parameters. `mu` is the bifurcation parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IkedaParams {
    /// Dimensionless laser input amplitude.
    pub mu: f64,
    /// Mirror reflection coefficient, `0 <= gamma < 1`.
    pub gamma: f64,
    /// Cavity detuning (radians).
    pub kappa: f64,
    /// Detuning contributed by the nonlinear medium.
    pub nu: f64,
}

impl Default for IkedaParams {
    fn default() -> Self {
        Self { mu: 0.9, gamma: 0.9, kappa: 0.4, nu: 6.0 }
    }
}

impl IkedaParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::InvalidConfig(format!("ikeda gamma must lie in [0, 1), got {}", self.gamma)));
        }
        if ![self.mu, self.kappa, self.nu].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidConfig("ikeda parameters must be finite".into()));
        }
        Ok(())
    }

    /// Radius of the absorbing disc `|z| <= mu / (1 - gamma)`.
    pub fn radius_bound(&self) -> f64 {
        self.mu.abs() / (1.0 - self.gamma)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IkedaState {
    pub x: f64,
    pub y: f64,
}

impl IkedaState {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn modulus(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// One application of the map `z' = mu + gamma z exp(i (kappa - nu / (1 + |z|^2)))`
/// in real arithmetic.
pub fn ikeda_step(state: IkedaState, params: &IkedaParams) -> Result<IkedaState> {
    if !(state.x.is_finite() && state.y.is_finite()) {
        return Err(Error::InvalidState(format!("non-finite ikeda state ({}, {})", state.x, state.y)));
    }
    Ok(ikeda_step_unchecked(state.x, state.y, params))
}

#[inline]
pub(crate) fn ikeda_step_unchecked(x: f64, y: f64, params: &IkedaParams) -> IkedaState {
    let theta = params.kappa - params.nu / (1.0 + x * x + y * y);
    let (sin, cos) = theta.sin_cos();
    IkedaState { x: params.mu + params.gamma * (x * cos - y * sin), y: params.gamma * (x * sin + y * cos) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_maps_to_mu() {
        let p = IkedaParams { mu: 0.73, ..Default::default() };
        let next = ikeda_step(IkedaState::new(0.0, 0.0), &p).unwrap();
        assert_eq!(next, IkedaState::new(0.73, 0.0));
    }

    #[test]
    fn zero_reflection_is_constant_map() {
        let p = IkedaParams { mu: 0.81, gamma: 0.0, ..Default::default() };
        for (x, y) in [(1.0, -2.0), (0.3, 0.4), (-5.0, 7.5)] {
            assert_eq!(ikeda_step(IkedaState::new(x, y), &p).unwrap(), IkedaState::new(0.81, 0.0));
        }
    }

    #[test]
    fn rejects_non_finite_state() {
        let p = IkedaParams::default();
        assert!(matches!(ikeda_step(IkedaState::new(f64::NAN, 0.0), &p), Err(Error::InvalidState(_))));
        assert!(ikeda_step(IkedaState::new(0.0, f64::INFINITY), &p).is_err());
    }

    #[test]
    fn gamma_out_of_range_is_rejected() {
        assert!(IkedaParams { gamma: 1.0, ..Default::default() }.validate().is_err());
        assert!(IkedaParams { gamma: -0.1, ..Default::default() }.validate().is_err());
        assert!(IkedaParams::default().validate().is_ok());
    }
}
