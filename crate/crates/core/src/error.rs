use std::path::PathBuf;

use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed JSON or a field of the wrong shape; `at` is the field path.
    #[error("schema error at `{at}`: {message}")]
    Schema { at: String, message: String },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid plan: {}", format_violations(.0))]
    InvalidPlan(Vec<Violation>),

    #[error("compensation {compensation} for pair ({task}, {driver}) outside [0, {cap}]")]
    CapViolation {
        task: usize,
        driver: usize,
        compensation: f64,
        cap: f64,
    },

    #[error("negative expected-cost weight {weight} for pair ({task}, {driver})")]
    NegativeWeight {
        task: usize,
        driver: usize,
        weight: f64,
    },

    #[error("lambert W domain error: argument {0} < 0")]
    LambertDomain(f64),

    #[error("scheme undefined for instance: {0}")]
    SchemeUndefined(String),

    #[error("logistic fit failed: {0}")]
    Fit(String),

    #[error("statistics: {0}")]
    Stats(String),

    #[error("piecewise model: {0}")]
    Milp(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("invalid configuration: {0}")]
    Config(String),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
