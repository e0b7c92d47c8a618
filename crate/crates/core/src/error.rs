use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point {point:?} lies outside the domain [0, {period}]^d")]
    OutOfDomain { point: Vec<f64>, period: f64 },

    #[error("pattern file, line {line}: {msg}")]
    PatternParse { line: usize, msg: String },

    #[error("pattern library {library}: {got} surviving stencils, expected {expected}")]
    ChecksumMismatch {
        library: String,
        got: usize,
        expected: usize,
    },

    #[error("spectral moments violate the nondegeneracy condition: {0}")]
    Moments(String),

    #[error("covariance factorization failed: {0}")]
    Factorization(String),

    #[error("degenerate correlation {0} (|rho| must be < 1)")]
    DegenerateCorrelation(f64),

    #[error("reference homology unresolved: M={coarse} and M={fine} disagree")]
    Unresolved { coarse: usize, fine: usize },

    #[error("expansion check: {0}")]
    Expansion(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
