use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    /// Log-price and transaction rate are undefined at `n_f = 0`.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("integration produced a non-finite state at step {step} (t = {t} s, n_f = {n_f}, xi = {xi})")]
    Integration { step: u64, t: f64, n_f: f64, xi: f64 },

    #[error("series has zero variance")]
    ZeroVariance,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("mismatched inputs: {0}")]
    Mismatch(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("timestamps out of order for symbol `{symbol}` at line {line}")]
    Ordering { line: u64, symbol: String },

    #[error("too many malformed rows: {rejected} of {total} exceed the allowed rate {max_rate}")]
    ErrorRate { rejected: usize, total: usize, max_rate: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    File { path: PathBuf, source: Box<Error> },

    #[error("{module}::{operation}: {source}")]
    Op { module: &'static str, operation: &'static str, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam { name, reason: reason.into() }
    }

    /// The `(module, operation)` pair attached by [`Context::during`], if any.
    pub fn origin(&self) -> Option<(&'static str, &'static str)> {
        match self {
            Error::Op { module, operation, .. } => Some((module, operation)),
            Error::File { source, .. } => source.origin(),
            _ => None,
        }
    }

    /// Short name of the innermost error variant.
    pub fn kind(&self) -> &'static str {
        match self.root() {
            Error::InvalidParam { .. } => "invalid_param",
            Error::Domain(_) => "domain",
            Error::Integration { .. } => "integration",
            Error::ZeroVariance => "zero_variance",
            Error::InsufficientData(_) => "insufficient_data",
            Error::Mismatch(_) => "mismatch",
            Error::Parse { .. } => "parse",
            Error::Ordering { .. } => "ordering",
            Error::ErrorRate { .. } => "error_rate",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
            Error::Toml(_) => "toml",
            Error::File { .. } | Error::Op { .. } => unreachable!("root strips wrappers"),
        }
    }

    /// First file path attached by [`Context::in_file`].
    pub fn file(&self) -> Option<&std::path::Path> {
        match self {
            Error::File { path, .. } => Some(path),
            Error::Op { source, .. } => source.file(),
            _ => None,
        }
    }

    /// Innermost error, with `Op` and `File` wrappers stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Op { source, .. } | Error::File { source, .. } => source.root(),
            e => e,
        }
    }
}

pub trait Context<T> {
    fn during(self, module: &'static str, operation: &'static str) -> Result<T>;
    fn in_file(self, path: impl Into<PathBuf>) -> Result<T>;
}

impl<T, E: Into<Error>> Context<T> for std::result::Result<T, E> {
    fn during(self, module: &'static str, operation: &'static str) -> Result<T> {
        self.map_err(|e| {
            let e = e.into();
            // keep the innermost attribution
            if e.origin().is_some() {
                e
            } else {
                Error::Op { module, operation, source: Box::new(e) }
            }
        })
    }

    fn in_file(self, path: impl Into<PathBuf>) -> Result<T> {
        self.map_err(|e| Error::File { path: path.into(), source: Box::new(e.into()) })
    }
}
