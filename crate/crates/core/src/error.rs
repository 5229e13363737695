use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid training plan: {0}")]
    InvalidPlan(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("integration diverged at t = {time}{}", param.map(|p| format!(" (p = {p})")).unwrap_or_default())]
    Divergence { time: f64, param: Option<f64> },
    #[error("twin output became non-finite at closed-loop step {step}")]
    TwinDivergence { step: usize },
    #[error("degenerate reservoir: recurrent matrix has zero spectral radius before rescaling")]
    DegenerateReservoir,
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("normal matrix is singular at ridge coefficient 0; use a ridge coefficient > 0")]
    RankDeficient,
    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for errors that originate in the numerics rather than in the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Divergence { .. }
                | Error::TwinDivergence { .. }
                | Error::DegenerateReservoir
                | Error::Numerical(_)
                | Error::RankDeficient
        )
    }

    pub(crate) fn format(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Format { what, detail: detail.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
