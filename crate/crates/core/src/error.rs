use thiserror::Error;

/// Errors raised by geometry, objectives, the integrator and the benchmark layer.
#[derive(Debug, Error)]
pub enum Error {
    /// Caller supplied data violating a documented precondition.
    #[error("invalid input: {0}")]
    Input(String),

    /// The operation is undefined at the given arguments (e.g. log at an antipode).
    #[error("outside domain: {0}")]
    Domain(String),

    /// A numerical kernel failed (non-convergent eigensolver, non-finite result).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An integrator step failed; the index identifies the offending step.
    #[error("step {step} at t = {t}: {source}")]
    Step {
        step: usize,
        t: f64,
        #[source]
        source: Box<Error>,
    },

    /// A benchmark oracle did not certify its answer.
    #[error("oracle failed: {0}")]
    Oracle(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
