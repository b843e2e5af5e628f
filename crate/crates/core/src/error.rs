//! Crate-wide error type.

/// Errors produced by model construction, quadrature, and bound evaluation.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Model parameters rejected at construction time.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Adaptive quadrature ran out of subdivisions. The partial value and
    /// its error estimate are attached so callers can decide what to do.
    #[error("quadrature did not converge after {subdivisions} subdivisions (partial value {partial:e}, error estimate {error:e})")]
    QuadratureFailure {
        partial: f64,
        error: f64,
        subdivisions: usize,
    },

    /// A model does not support the requested operation (for example a
    /// sampler was requested from a model that has none).
    #[error("model capability: {0}")]
    Capability(String),

    /// Missing or inconsistent run configuration.
    #[error("configuration: {0}")]
    Config(String),

    /// The requested bound is not defined for these inputs (for example a
    /// divergent inner integral).
    #[error("bound undefined: {0}")]
    BoundUndefined(String),

    /// A Fourier coefficient set failed the positivity validation.
    #[error("coefficient series not positive: {0}")]
    Positivity(String),
}

pub type Result<T> = std::result::Result<T, Error>;
