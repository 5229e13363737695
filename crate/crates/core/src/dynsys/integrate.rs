use super::food_chain::rhs as food_chain_rhs;
use super::ikeda::ikeda_step_unchecked;
use super::{steps_per_sample, Model, SystemKind, SystemSpec, Trajectory};
use crate::error::{Error, Result};

/// Populations in `[-NEGATIVE_TOLERANCE, 0)` are rounded to zero after each
/// step; anything lower is an integration error.
const NEGATIVE_TOLERANCE: f64 = 1e-12;

/// Classic fourth-order Runge-Kutta step.
pub fn rk4_step<const D: usize>(y: &[f64; D], dt: f64, f: impl Fn(&[f64; D]) -> [f64; D]) -> [f64; D] {
    let k1 = f(y);
    let k2 = f(&std::array::from_fn(|i| y[i] + 0.5 * dt * k1[i]));
    let k3 = f(&std::array::from_fn(|i| y[i] + 0.5 * dt * k2[i]));
    let k4 = f(&std::array::from_fn(|i| y[i] + dt * k3[i]));
    std::array::from_fn(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Stateful sampler that advances a system one sampling interval at a time.
#[derive(Clone, Debug)]
pub struct Simulator {
    model: Model,
    inner_steps: usize,
    dt: f64,
    interval: f64,
    t0: f64,
    count: u64,
    state: Vec<f64>,
}

impl Simulator {
    pub fn new(spec: &SystemSpec, initial: &[f64], p: f64, dt: f64) -> Result<Self> {
        let model = spec.model.with_parameter(p);
        model.validate()?;
        if initial.len() != model.dimension() {
            return Err(Error::DimensionMismatch { expected: model.dimension(), got: initial.len() });
        }
        if initial.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidState(format!("non-finite initial condition {initial:?}")));
        }
        let (inner_steps, dt) = match model.kind() {
            SystemKind::DiscreteMap => {
                if spec.sampling_interval.fract() != 0.0 || spec.sampling_interval < 1.0 {
                    return Err(Error::InvalidConfig("map sampling interval must be a positive whole number".into()));
                }
                (spec.sampling_interval as usize, 1.0)
            }
            SystemKind::ContinuousOde => {
                if initial.iter().any(|v| *v < 0.0) {
                    return Err(Error::InvalidState(format!("negative population in initial condition {initial:?}")));
                }
                (steps_per_sample(spec.sampling_interval, dt)?, dt)
            }
        };
        Ok(Self { model, inner_steps, dt, interval: spec.sampling_interval, t0: 0.0, count: 0, state: initial.to_vec() })
    }

    pub fn state(&self) -> &[f64] {
        &self.state
    }

    pub fn time(&self) -> f64 {
        self.t0 + self.count as f64 * self.interval
    }

    pub fn param(&self) -> f64 {
        self.model.parameter()
    }

    /// Advances by one sampling interval.
    pub fn advance(&mut self) -> Result<()> {
        match &self.model {
            Model::Ikeda(q) => {
                let (mut x, mut y) = (self.state[0], self.state[1]);
                for _ in 0..self.inner_steps {
                    let z = ikeda_step_unchecked(x, y, q);
                    x = z.x;
                    y = z.y;
                }
                self.state[0] = x;
                self.state[1] = y;
            }
            Model::FoodChain(q) => {
                let mut s = [self.state[0], self.state[1], self.state[2]];
                for k in 0..self.inner_steps {
                    s = rk4_step(&s, self.dt, |v| food_chain_rhs(v, q));
                    for v in &mut s {
                        if *v < 0.0 {
                            if *v >= -NEGATIVE_TOLERANCE {
                                *v = 0.0;
                            } else if v.is_finite() {
                                let t = self.time() + (k + 1) as f64 * self.dt;
                                return Err(Error::Numerical(format!("population fell to {v:e} at t = {t}; reduce the integration step")));
                            }
                        }
                    }
                }
                self.state.copy_from_slice(&s);
            }
        }
        self.count += 1;
        if self.state.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { time: self.time(), param: Some(self.param()) });
        }
        Ok(())
    }

    /// Advances `n` sampling intervals without recording.
    pub fn skip(&mut self, n: usize) -> Result<()> {
        (0..n).try_for_each(|_| self.advance())
    }

    /// Records the current state and then `n` further samples.
    pub fn record(&mut self, n: usize) -> Result<Trajectory> {
        let mut traj = Trajectory::new(self.state.len(), self.param(), self.interval);
        traj.push(self.time(), &self.state);
        for _ in 0..n {
            self.advance()?;
            traj.push(self.time(), &self.state);
        }
        Ok(traj)
    }
}

/// Simulates `duration` time units (maps: iterations) from `initial` at
/// bifurcation parameter `p`, recording the initial state and every sampling
/// interval thereafter. For maps `dt` must be 1.
pub fn integrate(spec: &SystemSpec, initial: &[f64], p: f64, duration: f64, dt: f64) -> Result<Trajectory> {
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(Error::InvalidInput(format!("duration must be non-negative, got {duration}")));
    }
    if spec.kind() == SystemKind::DiscreteMap && dt != 1.0 {
        return Err(Error::InvalidInput(format!("maps advance in unit steps, got dt = {dt}")));
    }
    let mut sim = Simulator::new(spec, initial, p, dt)?;
    let n = (duration / spec.sampling_interval + 1e-9).floor() as usize;
    sim.record(n)
}
