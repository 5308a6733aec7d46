use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Where in the solution array something happened.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeLocation {
    pub element: usize,
    pub i: usize,
    pub j: usize,
}

impl std::fmt::Display for NodeLocation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "element {} node ({}, {})", self.element, self.i, self.j)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid operator request: {0}")]
    InvalidOperator(String),

    #[error("inadmissible state ({reason}) at {location}")]
    Inadmissible {
        reason: &'static str,
        location: NodeLocation,
    },

    #[error("inadmissible state: {0}")]
    InadmissibleState(&'static str),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("volume flux `{0}` is unavailable")]
    Unavailable(&'static str),

    #[error("blending coefficient {value} outside [0, 1]")]
    AlphaOutOfRange { value: f64 },

    #[error("empty sample window")]
    EmptyWindow,

    #[error("non-finite state after RK stage {stage} at {location}, t = {time}")]
    NonFinite {
        stage: usize,
        location: NodeLocation,
        time: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::InvalidOperator(_)
            | Error::Unsupported(_)
            | Error::Unavailable(_) => 2,
            Error::Io { .. } => 1,
            _ => 3,
        }
    }
}
