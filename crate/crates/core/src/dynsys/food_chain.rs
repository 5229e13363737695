use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Resource / consumer / predator food-chain parameters. `k` (carrying
/// capacity) is the bifurcation parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoodChainParams {
    pub k: f64,
    pub x_c: f64,
    pub y_c: f64,
    pub x_p: f64,
    pub y_p: f64,
    pub r0: f64,
    pub c0: f64,
}

impl Default for FoodChainParams {
    fn default() -> Self {
        Self { k: 0.98, x_c: 0.4, y_c: 2.009, x_p: 0.08, y_p: 2.876, r0: 0.16129, c0: 0.5 }
    }
}

impl FoodChainParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.k, self.x_c, self.y_c, self.x_p, self.y_p, self.r0, self.c0];
        if all.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("food-chain parameters must be strictly positive: {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoodChainState {
    pub r: f64,
    pub c: f64,
    pub p: f64,
}

impl FoodChainState {
    pub fn new(r: f64, c: f64, p: f64) -> Self {
        Self { r, c, p }
    }
}

/// Time derivatives `(dR/dt, dC/dt, dP/dt)`.
pub fn food_chain_rhs(state: FoodChainState, params: &FoodChainParams) -> Result<[f64; 3]> {
    let s = [state.r, state.c, state.p];
    if s.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidState(format!("densities must be finite and non-negative: {state:?}")));
    }
    // `+ 0.0` turns a signed zero into +0.0 and leaves every other value alone.
    Ok(rhs(&s, params).map(|v| v + 0.0))
}

#[inline]
pub(crate) fn rhs(s: &[f64], q: &FoodChainParams) -> [f64; 3] {
    let (r, c, p) = (s[0], s[1], s[2]);
    let uptake = r / (r + q.r0);
    let predation = c / (c + q.c0);
    [
        r * (1.0 - r / q.k) - q.x_c * q.y_c * c * uptake,
        q.x_c * c * (q.y_c * uptake - 1.0) - q.x_p * q.y_p * p * predation,
        q.x_p * p * (q.y_p * predation - 1.0),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extinction_point_is_exactly_stationary() {
        let q = FoodChainParams::default();
        let d = food_chain_rhs(FoodChainState::new(0.0, 0.0, 0.0), &q).unwrap();
        assert_eq!(d.map(f64::to_bits), [0.0f64; 3].map(f64::to_bits));
    }

    #[test]
    fn carrying_capacity_is_exactly_stationary() {
        for k in [0.9, 0.98, 1.0, 1.17] {
            let q = FoodChainParams { k, ..Default::default() };
            let d = food_chain_rhs(FoodChainState::new(k, 0.0, 0.0), &q).unwrap();
            assert_eq!(d.map(f64::to_bits), [0.0f64; 3].map(f64::to_bits));
        }
    }

    #[test]
    fn logistic_maximum_at_half_capacity() {
        let q = FoodChainParams { k: 1.0, ..Default::default() };
        let d = food_chain_rhs(FoodChainState::new(0.5, 0.0, 0.0), &q).unwrap();
        assert_eq!(d, [0.25, 0.0, 0.0]);
    }

    #[test]
    fn negative_density_rejected() {
        let q = FoodChainParams::default();
        assert!(matches!(food_chain_rhs(FoodChainState::new(0.5, -1e-3, 0.1), &q), Err(Error::InvalidState(_))));
    }

    #[test]
    fn non_positive_params_rejected() {
        assert!(FoodChainParams { r0: 0.0, ..Default::default() }.validate().is_err());
        assert!(FoodChainParams::default().validate().is_ok());
    }
}
