use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation (off-grid window,
    /// exponent out of range, segment reaching before the history, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A scenario or solver configuration violates its invariants.
    #[error("configuration error: {0}")]
    Config(String),

    /// Driver sampling failed.
    #[error("driver generation failed: {0}")]
    Generation(String),

    /// The greedy stopping-time construction cannot fit one mesh cell.
    #[error("driver too rough at t = {at}: one mesh cell already has residual {residual:.6e} > {threshold:.6e}; refine mesh or increase mu")]
    TooRough {
        at: f64,
        residual: f64,
        threshold: f64,
    },

    /// Picard iteration did not reach the tolerance on some window.
    #[error("picard iteration did not converge on [{start}, {end}] after {iterations} iterations (last residual {last:.3e})")]
    NonConvergence {
        start: f64,
        end: f64,
        iterations: usize,
        last: f64,
        history: Vec<f64>,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short machine-readable tag for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Config(_) => "config",
            Error::Generation(_) => "generation",
            Error::TooRough { .. } => "too_rough",
            Error::NonConvergence { .. } => "non_convergence",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
