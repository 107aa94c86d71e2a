use thiserror::Error;

/// Errors raised by waveform synthesis, correlation metrics and the optimizer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error(
        "Nyquist violation: peak instantaneous frequency {peak_hz:.6} Hz exceeds 0.9 * fs/2 = {limit_hz:.6} Hz"
    )]
    Nyquist { peak_hz: f64, limit_hz: f64 },

    #[error("no mainlobe null found: {0}")]
    NoNullFound(String),

    #[error("empty region: {0}")]
    EmptyRegion(String),

    #[error("line search stalled after {backtracks} step reductions (step {step:e})")]
    LineSearchStalled { backtracks: usize, step: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// True for errors that signal a degenerate waveform or metric region
    /// rather than bad input.
    pub fn is_numerical_degeneracy(&self) -> bool {
        matches!(self, Error::NoNullFound(_) | Error::EmptyRegion(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
