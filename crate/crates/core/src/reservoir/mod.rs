//! Echo-state reservoir with a bifurcation-parameter input channel.
//!
//! Training drives the reservoir open-loop with measured data and fits a
//! linear readout by ridge regression; prediction closes the loop so the
//! readout output becomes the next input.

mod build;
mod config;
mod dynamics;
mod readout;
mod sparse;

pub use build::{build_reservoir, spectral_radius, ReservoirMatrices, POWER_MAX_ITERATIONS, POWER_TOLERANCE};
pub use config::ReservoirConfig;
pub use dynamics::{drive_open_loop, step_closed_loop, ReservoirState};
pub(crate) use dynamics::{update, ClosedLoop};
pub use readout::{fit_readout, Fit, NormalEquations, Readout};
pub use sparse::CsrMatrix;
