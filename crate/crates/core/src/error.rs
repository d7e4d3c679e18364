use thiserror::Error;

/// Errors produced by parameter validation, truncation, and the oracle paths.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    /// Requested the stationary state of a system without decoherence.
    #[error("no stationary state exists for gamma = 0")]
    NoStationaryState,

    #[error("evolution time must be nonnegative, got t = {0}")]
    NegativeTime(f64),

    /// The decoherence series did not converge within the term budget.
    #[error("decoherence series did not converge after {terms} terms (last term {last_term:.3e})")]
    SeriesDivergence { terms: usize, last_term: f64 },

    /// The thermal tail bound demands a Fock cutoff beyond the configured cap,
    /// i.e. the requested temperature is too high for this configuration.
    #[error("mean photon number {mbar} needs Fock cutoff {required}, above hard cap {cap}")]
    TruncationOverflow {
        mbar: f64,
        required: usize,
        cap: usize,
    },

    /// Error located at a specific sweep grid point.
    #[error("at grid point ({axis1}{}): {source}", .axis2.map(|v| format!(", {v}")).unwrap_or_default())]
    AtGridPoint {
        axis1: f64,
        axis2: Option<f64>,
        #[source]
        source: Box<Error>,
    },

    #[error("dense oracle dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("eigensolver did not converge: {0}")]
    EigenFailure(String),

    #[error("field state is not normalized (trace = {0})")]
    Unnormalized(f64),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    /// An oracle cross-check exceeded its tolerance.
    #[error("oracle check failed: {0}")]
    OracleMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
