use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library and the `holodof` binary.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A wavenumber point lies outside the propagating disk, where `gamma`
    /// would be imaginary.
    #[error("evanescent region: kx^2 + ky^2 = {radius_sq:e} exceeds kappa^2 = {kappa_sq:e}")]
    Evanescent { radius_sq: f64, kappa_sq: f64 },

    #[error("numerical failure: {message} (achieved error estimate {estimate:e})")]
    NumericalFailure { message: String, estimate: f64 },

    /// Malformed configuration text. `line`/`column` are 1-based when known.
    #[error("config syntax error at line {line}, column {column}: {message}")]
    ConfigSyntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("config field `{field}`{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    ConfigField {
        field: String,
        line: Option<usize>,
        message: String,
    },

    #[error("{path}: refusing to overwrite existing file (pass --force)")]
    AlreadyExists { path: PathBuf },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>, estimate: f64) -> Self {
        Error::NumericalFailure {
            message: msg.into(),
            estimate,
        }
    }

    pub(crate) fn field(field: impl Into<String>, line: Option<usize>, msg: impl Into<String>) -> Self {
        Error::ConfigField {
            field: field.into(),
            line,
            message: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps the error with a description of what was being attempted.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, skipping any [`Error::Context`] layers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    /// Process exit status used by the command-line tool.
    ///
    /// 2 for configuration problems, 3 for numerical failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::ConfigSyntax { .. } | Error::ConfigField { .. } | Error::InvalidArgument(_) => 2,
            Error::NumericalFailure { .. } | Error::Evanescent { .. } => 3,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
