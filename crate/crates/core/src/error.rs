use thiserror::Error;

use crate::calibration::CoverageReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} is outside its domain {domain}")]
    Domain {
        what: String,
        value: f64,
        domain: String,
    },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("improper posterior: {0}")]
    ImproperPosterior(String),

    #[error("likelihood is zero at every grid node")]
    EmptyLikelihood,

    #[error("singular transformation: {0}")]
    Singularity(String),

    #[error("no convergence after {iterations} iterations ({trace})")]
    NonConvergence { iterations: usize, trace: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "calibration infeasible: {} of {} trials produced improper posteriors",
        .0.improper_count,
        .0.requested_trials
    )]
    CalibrationInfeasible(Box<CoverageReport>),

    #[error("invalid config field `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(what: impl Into<String>, value: f64, domain: impl ToString) -> Self {
        Error::Domain {
            what: what.into(),
            value,
            domain: domain.to_string(),
        }
    }

    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Stable snake_case tag used in machine-readable error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::Unsupported(_) => "unsupported",
            Error::ImproperPosterior(_) => "improper_posterior",
            Error::EmptyLikelihood => "empty_likelihood",
            Error::Singularity(_) => "singularity",
            Error::NonConvergence { .. } => "non_convergence",
            Error::InvalidInput(_) => "invalid_input",
            Error::CalibrationInfeasible(_) => "calibration_infeasible",
            Error::Validation { .. } => "validation",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }

    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ImproperPosterior(_)
                | Error::EmptyLikelihood
                | Error::Singularity(_)
                | Error::NonConvergence { .. }
                | Error::CalibrationInfeasible(_)
        )
    }
}
