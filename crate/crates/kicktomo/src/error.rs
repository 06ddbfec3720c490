use std::io;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("cannot parse config {}: {message}", path.display())]
    ConfigParse { path: PathBuf, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{}: malformed CSV: {message}", path.display())]
    Format { path: PathBuf, message: String },

    #[error("computation failed: {0}")]
    Numeric(#[from] kicktomo_core::Error),
}

impl RunError {
    pub(crate) fn config(field: &str, reason: impl Into<String>) -> Self {
        RunError::Config {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        RunError::Io {
            path: path.into(),
            source,
        }
    }

    /// `2` for configuration problems, `1` for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config { .. } | RunError::ConfigParse { .. } => 2,
            _ => 1,
        }
    }
}
