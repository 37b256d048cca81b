//! Outlier-robust 2-D radar odometry.
//!
//! The estimator takes feature correspondences between consecutive radar
//! scans and produces a relative pose per frame. Robustness against heavy
//! outlier contamination comes from three decoupled stages: a maximum-clique
//! search over a pairwise-consistency graph, a graduated non-convexity
//! rotation solver on translation-invariant measurements, and a
//! component-wise consensus estimator for translation that weights each
//! correspondence by its anisotropic range/azimuth uncertainty.

pub mod acote;
pub mod cli;
pub mod config;
pub mod gnc;
pub mod io;
pub mod mcis;
pub mod metrics;
pub mod pipeline;
pub mod preprocess;
pub mod synth;
pub mod types;
pub mod uncertainty;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// The input does not constrain the quantity being estimated
    /// (too few correspondences, all weights zero, and the like).
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    /// A parameter or input value violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A text input (correspondence file, config, trajectory) failed to
    /// parse; `line` is 1-based.
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    /// An I/O error tagged with the file it concerns.
    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn format(line: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            line,
            message: msg.into(),
        }
    }

    pub(crate) fn file(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::File {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
