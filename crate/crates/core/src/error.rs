use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed CSV content; `line` is 1-based and counts the header.
    #[error("{path} line {line}: {msg}", path = path.as_deref().unwrap_or_else(|| std::path::Path::new("<csv>")).display())]
    Csv {
        path: Option<PathBuf>,
        line: usize,
        msg: String,
    },

    /// A precondition or type invariant does not hold.
    #[error("{0}")]
    Domain(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// A filter recursion left the admissible numeric range (|value| > 1e8
    /// or non-finite) at step `t` (0-based).
    #[error("risk path diverged at step {t}")]
    PathDiverged { t: usize },

    #[error("no admissible MCMC starting point after {tries} prior draws")]
    McmcInit { tries: usize },

    #[error("{0}")]
    Mcmc(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn csv(path: Option<&std::path::Path>, line: usize, msg: impl Into<String>) -> Self {
        Error::Csv {
            path: path.map(|p| p.to_path_buf()),
            line,
            msg: msg.into(),
        }
    }
}
