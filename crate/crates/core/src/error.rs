use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("integrand is not finite at x = {abscissa:e}")]
    NonFiniteIntegrand { abscissa: f64 },

    #[error(
        "quadrature did not converge after {evaluations} evaluations \
         (estimate {estimate}, error estimate {abs_error:e})"
    )]
    NotConverged {
        estimate: Complex64,
        abs_error: f64,
        evaluations: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("singular system: {0}")]
    Singular(String),

    /// `line` is 1-based; 0 when the problem is not tied to a line
    /// (a missing key).
    #[error("config{}: `{key}`: {message}", line_label(*line))]
    Config {
        line: usize,
        key: String,
        message: String,
    },

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn line_label(line: usize) -> String {
    if line == 0 {
        String::new()
    } else {
        format!(" line {line}")
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
