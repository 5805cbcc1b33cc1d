use thiserror::Error;

/// Errors produced anywhere in the library.
///
/// The two broad classes map onto the CLI exit codes: [`Error::Input`] and
/// [`Error::Io`] are configuration/data problems (exit 2), while
/// [`Error::Numeric`] and [`Error::Convergence`] are numerical failures
/// (exit 3).
#[derive(Debug, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("not positive definite: Cholesky pivot {index} is {pivot:e}")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("QP did not converge after {iterations} iterations (KKT gap {gap:e})")]
    Convergence { iterations: usize, gap: f64 },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    /// True for numeric/convergence failures, false for input and I/O problems.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Numeric(_) | Error::NotPositiveDefinite { .. } | Error::Convergence { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
