use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical parameter lies outside its admissible domain.
    #[error("invalid {field}: {value} ({reason})")]
    Domain {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The rate equations do not determine a unique stationary state.
    #[error("singular rate system: {0}")]
    SingularSystem(String),

    #[error("closed-form denominator vanishes ({value:e})")]
    DenominatorVanishing { value: f64 },

    #[error("time step {dt} exceeds stability limit {limit}")]
    StepSize { dt: f64, limit: f64 },

    /// Two routes to the same quantity disagree beyond tolerance.
    #[error("consistency fault: {0}")]
    Consistency(String),

    #[error("temperature gradient is flat: {0}")]
    FlatLandscape(String),

    #[error("rectification undefined: forward and reverse currents both vanish")]
    UndefinedRectification,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    /// Process exit code for the CLI: 2 for invalid input, 3 for numerical faults.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain { .. } | Error::Config(_) | Error::StepSize { .. } => 2,
            Error::SingularSystem(_)
            | Error::DenominatorVanishing { .. }
            | Error::Consistency(_)
            | Error::FlatLandscape(_)
            | Error::UndefinedRectification => 3,
            Error::Io { .. } | Error::Parse { .. } => 1,
        }
    }

    pub(crate) fn domain(field: &'static str, value: f64, reason: &'static str) -> Self {
        Error::Domain { field, value, reason }
    }
}
