use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical argument outside its domain (non-positive distance, temperature, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature stopped before reaching its tolerance.
    #[error(
        "quadrature did not converge: estimate {estimate:e}, error estimate {error:e} after {evaluations} evaluations"
    )]
    Convergence {
        estimate: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// The requested parameter cannot be inferred from the measurement configuration.
    #[error("non-identifiable configuration: {0}")]
    NonIdentifiable(String),

    #[error("config error{}: {msg}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Config { line: Option<usize>, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config {
            line: None,
            msg: msg.into(),
        }
    }

    /// Short machine-readable error class.
    pub fn class(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Convergence { .. } => "convergence",
            Error::Capacity(_) => "capacity",
            Error::NonIdentifiable(_) => "non_identifiable",
            Error::Config { .. } => "config",
            Error::Io(_) => "io",
        }
    }
}
