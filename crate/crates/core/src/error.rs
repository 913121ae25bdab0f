use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A dense-representation size guard was exceeded.
    #[error("system size L={l} exceeds the dense guard L<={guard} (3^L would be too large)")]
    SizeGuard { l: usize, guard: usize },

    /// Invalid argument or state for the requested operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Iterative eigensolver failed to reach the requested tolerance.
    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:.3e}, tol {tol:.3e})")]
    Convergence {
        iterations: usize,
        residual: f64,
        tol: f64,
    },

    /// The sampled curve peaks on the grid boundary; the scan must be widened.
    #[error("peak lies on the {side} boundary of the sampled grid at D={d}")]
    BoundaryPeak { side: &'static str, d: f64 },

    /// No interior local maximum could be identified.
    #[error("no interior local maximum found: {0}")]
    PeakNotFound(String),

    /// Too few data points or sizes for the requested fit.
    #[error("insufficient data: need {needed}, got {got} ({what})")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    /// Command-level misuse (bad flags, malformed config, unknown format).
    #[error("usage error: {0}")]
    Usage(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config parse error: {0}")]
    Config(String),

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error("linear algebra backend error: {0}")]
    Linalg(String),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
