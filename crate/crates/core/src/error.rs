use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The indicator is uncorrelated with the return, so it carries no
    /// information about the next-period return.
    #[error("indicator has zero correlation with the return (no knowledge)")]
    NoKnowledge,

    /// Correlation of one: the ratio-based formulas are singular and only
    /// their limits are meaningful.
    #[error("correlation is (numerically) one; only limiting values are defined")]
    DegenerateCorrelation,

    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (estimate {estimate:e}, error {error:e})"
    )]
    QuadratureNonConvergence {
        subdivisions: usize,
        estimate: f64,
        error: f64,
    },

    #[error("objective is not unimodal in log(lambda) near {log_lambda}")]
    NonUnimodal { log_lambda: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("{0} has zero sample variance")]
    ZeroVariance(&'static str),

    #[error("not enough observations: need at least {required}, got {got}")]
    TooFewObservations { required: usize, got: usize },

    #[error("design matrix is rank deficient; collinear columns: {}", columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),

    #[error("line {line}: {message}")]
    Data { line: u64, message: String },

    #[error("{0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { name, value })
    }
}
