use thiserror::Error;

/// Errors reported by state construction and evolution operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A run parameter is outside its valid range (for example a zero cycle
    /// count).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An operation was applied to modes it is not defined on, such as a
    /// rotation touching a detector sink.
    #[error("operation contract violated: {0}")]
    Contract(String),

    /// Amplitudes that must form a unit-norm qubit do not.
    #[error("amplitudes not normalized: |norm² − 1| = {excess:.3e}")]
    NotNormalized { excess: f64 },

    /// Renormalization was requested on a state with (numerically) zero
    /// surviving probability.
    #[error("state norm vanished; cannot renormalize")]
    ZeroNorm,
}

pub type Result<T> = std::result::Result<T, Error>;
