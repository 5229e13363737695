//! Parameter-aware reservoir computing digital twins.
//!
//! A reservoir computer with an extra input channel carrying the bifurcation
//! parameter is trained on time series from a handful of parameter values in
//! a system's normal regime. Run in closed loop at a shifted parameter value
//! it evolves as a stand-in for the real system, so a collapse of the real
//! system beyond a critical parameter can be seen in the twin before the
//! real system gets there.
//!
//! * [`dynsys`]: ground-truth simulators and the direct-simulation oracle.
//! * [`reservoir`]: the echo-state network with its parameter channel.
//! * [`twin`]: training, prediction at shifted parameters, scans and
//!   transition detection.
//! * [`config`]: run configuration files.

// `!(a < b)` is used on purpose throughout: it rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod diagram;
pub mod dynsys;
mod error;
pub mod files;
mod par;
pub mod reservoir;
pub mod rng;
pub mod twin;

pub use error::{Error, Result};
