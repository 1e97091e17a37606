use thiserror::Error;

/// Errors raised by the solvers, verifiers and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of a formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// A solver or transform was configured inconsistently (CFL, grid, form).
    #[error("configuration error: {0}")]
    Config(String),

    /// A scenario failed validation; every offending field is listed.
    #[error("invalid scenario: {}", .0.join("; "))]
    Validation(Vec<String>),

    /// Adaptive quadrature hit its subdivision cap before reaching tolerance.
    #[error(
        "quadrature did not converge on [{lower}, {upper}]: value {value:.6e}, \
         error estimate {abs_error:.3e} after {intervals} intervals"
    )]
    Quadrature {
        lower: f64,
        upper: f64,
        value: f64,
        abs_error: f64,
        intervals: usize,
    },

    /// Any other numerical failure (non-finite values, degenerate fits).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// The Picard iteration stopped contracting.
    #[error("Picard iteration diverged after {} steps (difference history {history:?})", .history.len())]
    Divergence { history: Vec<f64> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Config(_) | Error::Domain(_) => 2,
            Error::Quadrature { .. } | Error::Numerical(_) => 3,
            Error::Divergence { .. } => 4,
            Error::Io(_) | Error::Serialization(_) => 1,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Serialization(err.to_string())
    }
}

impl From<toml::de::Error> for Error {
    fn from(err: toml::de::Error) -> Self {
        Error::Serialization(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
