use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or configuration value is out of its admissible range.
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: String, message: String },

    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    #[error("failed to parse {what}: {message}")]
    Parse { what: String, message: String },

    /// The Θ field is not uniform on the frame needed for contour anatomy.
    #[error("frame is not uniform: {0}")]
    FrameNotUniform(String),

    #[error("volume too large for exact enumeration: {free} free spins (limit {limit})")]
    VolumeTooLarge { free: usize, limit: usize },

    #[error("field cache desynchronized: max drift {drift:e} at site {site}")]
    CacheDesync { drift: f64, site: usize },

    #[error("infeasible constraint set: {0}")]
    Infeasible(String),

    #[error("numerical fault: {0}")]
    Numerical(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn invalid(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invalid {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn parse(what: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            what: what.into(),
            message: message.to_string(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line front end.
    ///
    /// 2 for validation problems, 3 for runtime faults.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invalid { .. }
            | Error::UnknownKey(_)
            | Error::Parse { .. }
            | Error::FrameNotUniform(_)
            | Error::VolumeTooLarge { .. }
            | Error::Infeasible(_) => 2,
            Error::CacheDesync { .. } | Error::Numerical(_) | Error::Io { .. } => 3,
        }
    }
}
