use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the inference engine, the semantic map and the harness.
#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a documented precondition (shape, range, simplex...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A moment required by the update does not exist for the given parameters.
    #[error("moment undefined for component {component}{}: {reason}", branch_suffix(*.branch))]
    MomentUndefined {
        component: usize,
        branch: Option<usize>,
        reason: String,
    },

    /// A method-of-moments denominator vanished or went negative.
    #[error("singular projection for component {component}: {quantity} denominator = {value:e}")]
    SingularProjection {
        component: usize,
        quantity: &'static str,
        value: f64,
    },

    /// The projection produced a parameter outside its admissible range.
    #[error("invalid parameter for component {component}: {name} = {value:e}")]
    InvalidParameter {
        component: usize,
        name: &'static str,
        value: f64,
    },

    #[error("invalid contact: normal force {f_n} must be positive")]
    InvalidContact { f_n: f64 },

    #[error("cannot initialise prior for class `{class}`: {reason}")]
    Init { class: String, reason: String },

    #[error("voxel {0:?} not found")]
    NotFound([i64; 3]),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Successive quadrature refinements disagreed.
    #[error("quadrature did not converge: {0}")]
    Precision(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("measurement {index}: {source}")]
    AtMeasurement {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("trial {index}: {source}")]
    AtTrial {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

fn branch_suffix(branch: Option<usize>) -> String {
    match branch {
        Some(j) => format!(" (branch {j})"),
        None => " (prior)".to_string(),
    }
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Broad failure category, used for process exit codes.
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config { .. } | Error::Parse { .. } => ErrorCategory::Config,
            Error::Io { .. } => ErrorCategory::Io,
            Error::AtMeasurement { source, .. } | Error::AtTrial { source, .. } => source.category(),
            _ => ErrorCategory::Numeric,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Numeric,
    Io,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Config => 2,
            ErrorCategory::Numeric => 3,
            ErrorCategory::Io => 4,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
