use thiserror::Error;

/// Errors raised by the simulation and estimation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside the domain where the model is defined.
    #[error("parameter `{name}` out of domain: {detail}")]
    Domain { name: &'static str, detail: String },

    /// An absolute moment of order p >= alpha was requested.
    #[error("moment of order {p} is infinite for alpha = {alpha}")]
    InfiniteMoment { p: f64, alpha: f64 },

    /// An operation precondition (sizes, interval lengths, resolutions) does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Adaptive quadrature stopped before reaching the requested tolerance.
    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e} > tolerance {tolerance:e}")]
    Quadrature {
        estimate: f64,
        error: f64,
        tolerance: f64,
    },

    /// The noise realization does not cover the integration span.
    #[error("noise grid does not cover [{need_lo}, {need_hi}] (grid spans [{have_lo}, {have_hi}])")]
    Coverage {
        need_lo: f64,
        need_hi: f64,
        have_lo: f64,
        have_hi: f64,
    },

    /// Grid or span arithmetic would overflow.
    #[error("size error: {0}")]
    Size(String),

    /// The observed data makes the estimator undefined (for example V_2N = 0).
    #[error("degenerate data: {0}")]
    Degenerate(String),

    /// A theta schedule produced a value outside (0, 1/2].
    #[error("schedule error: {0}")]
    Schedule(String),

    /// Filter order and beta do not satisfy the almost-sure regime condition.
    #[error("regime error: {0}")]
    Regime(String),

    /// Invalid experiment configuration, with the offending field path.
    #[error("config error at `{field}`: {detail}")]
    Config { field: String, detail: String },

    #[error("io error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            name,
            detail: detail.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            detail: detail.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            Error::Io(e.to_string())
        } else {
            Error::Parse(e.to_string())
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
