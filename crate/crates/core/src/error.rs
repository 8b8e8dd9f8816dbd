use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = LsdError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum LsdError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid spectral measure: {0}")]
    InvalidMeasure(String),

    /// H = δ₀: the limiting distribution is itself δ₀, nothing to solve.
    #[error("degenerate covariance spectrum (H = δ0); the LSD is δ0")]
    DegenerateSpectrum,

    #[error("fixed point did not converge after {iterations} iterations (residual {residual:e}, best h = {best})")]
    NoConvergence {
        best: Complex64,
        residual: f64,
        iterations: usize,
    },

    #[error("expected exactly one cubic root with positive real part, found {count}")]
    RootSelectionAmbiguity { count: usize },

    #[error("solver failed at grid points {xs:?}")]
    GridFailure { xs: Vec<f64> },

    #[error("eigensolver did not converge (matrix fingerprint {fingerprint})")]
    EigenNoConvergence { fingerprint: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
