use std::path::PathBuf;

use simulcap::ScenarioError;
use thiserror::Error;

/// Problems with a scenario document. Paths use dotted keys with 0-based array
/// indices, e.g. `agents.speeds[2]`.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown key `{path}`")]
    UnknownKey { path: String },
    #[error("missing section `[{0}]`")]
    MissingSection(&'static str),
    #[error("missing key `{0}`")]
    MissingKey(String),
    #[error("`{path}`: {message}")]
    Invalid { path: String, message: String },
    #[error("`{path}`: weights are asymmetric at ({i}, {j}): {wij} vs {wji}")]
    AsymmetricWeights {
        path: String,
        i: usize,
        j: usize,
        wij: f64,
        wji: f64,
    },
    #[error("`{path}`: speed must be positive, got {value}")]
    NonPositiveSpeed { path: String, value: f64 },
    #[error("{0}")]
    Scenario(#[from] ScenarioError),
}

impl ConfigError {
    pub(crate) fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Config {
        path: PathBuf,
        #[source]
        source: ConfigError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },
    #[error("{0}")]
    Runtime(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn data(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Data {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit status: 1 verification failed, 3 configuration, 4 runtime or I/O.
    /// Usage errors exit with 2 from the argument parser.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Config { .. } => 3,
            CliError::Io { .. } | CliError::Data { .. } | CliError::Runtime(_) => 4,
        }
    }
}
