use std::path::PathBuf;

/// Unified error type for the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// CSV schema violation with the 1-based line number of the offending row.
    #[error("{path}:{line}: {msg}")]
    Csv {
        path: String,
        line: usize,
        msg: String,
    },

    /// A GCAT configuration outside the imitator's feasible region.
    #[error("infeasible gait configuration: {knob}: {msg}")]
    Constraint { knob: String, msg: String },

    #[error("missing feature: {0}")]
    MissingFeature(String),

    /// No GCAT knob with a strong enough correlation to act on.
    #[error("no actionable knob for feature {0}")]
    NoActionableKnob(String),

    #[error("missing input: {}", .0.display())]
    MissingInput(PathBuf),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
