use thiserror::Error;

/// Errors from grid construction, spectral operations and experiment setup.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid resolution {0} must be a power of two and at least 8")]
    InvalidResolution(usize),
    #[error("dimension {0} unsupported, expected 1, 2 or 3")]
    InvalidDimension(usize),
    #[error("non-finite value at flat index {index}")]
    NonFinite { index: usize },
    #[error("shape mismatch: (dim {0}, n {1}) vs (dim {2}, n {3})", .expected.0, .expected.1, .got.0, .got.1)]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("exponent p = {0} out of range")]
    InvalidExponent(f64),
    #[error("operation requires a real-valued grid function")]
    ComplexInput,
    #[error("band-limit contract violated: {0}")]
    BandLimit(String),
    #[error("symbol support (radius {support_radius}) exceeds half the quadrature box ({half_box})")]
    UnderResolved { support_radius: f64, half_box: f64 },
    #[error("invalid dyadic seed function: {0}")]
    InvalidSeed(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("adjoint route disagrees with direct route: |delta| = {delta:.3e}")]
    AdjointMismatch { delta: f64 },
    #[error("csv: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, Error>;
