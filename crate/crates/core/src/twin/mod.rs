//! The digital-twin protocol: observe a system at a few parameter values in
//! its normal regime, train one parameter-aware reservoir on all of it, then
//! run the reservoir at shifted parameter values to see whether the real
//! system would keep oscillating or collapse.

mod detect;
mod hyper;
mod metrics;
mod model;
mod normalize;
mod plan;
mod predict;
mod presets;
mod train;

pub use detect::{
    detect_and_refine, detect_in_diagram, detect_in_trajectory, detect_transition, refine_bracket, Evidence, TransitionInput,
    TransitionKind, TransitionReport, REPORT_CSV_HEADER,
};
pub use hyper::{optimize_hyperparameters, Candidate, SearchOutcome, SearchSpace, FIT_FRACTION};
pub use metrics::{channel_std, nrmse};
pub use model::{MODEL_MAGIC, MODEL_VERSION};
pub use normalize::Normalization;
pub use plan::{assemble_training_data, TimeSeriesSet, TrainingPlan};
pub use predict::{predict_at_parameter, scan_bifurcation, Forecast, Status};
pub use presets::Preset;
pub use train::{train_twin, TrainedTwin};
