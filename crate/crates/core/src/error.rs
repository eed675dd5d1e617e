use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("episode already finished; call reset before stepping again")]
    EpisodeFinished,
    #[error("environment has not been reset")]
    NotReset,
    #[error("action {action} out of range for {n_actions} control actions")]
    InvalidAction { action: usize, n_actions: usize },
    #[error("repeat count {k} outside 1..={max}")]
    SkipOutOfRange { k: usize, max: usize },
    #[error("DMSOA decisions require a fresh observation")]
    StaleObservation,
    #[error("shape mismatch for {what}: expected {expected}, got {got}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("measurement ratio undefined: no measured steps")]
    UndefinedRatio,
    #[error("priority must be finite and non-negative, got {0}")]
    NegativePriority(f64),
    #[error("replay index {0} is not alive")]
    StaleIndex(usize),
    #[error("replay holds {size} transitions, {requested} requested")]
    Underfilled { size: usize, requested: usize },
    #[error("instance too large: {states} states exceeds limit {limit}")]
    InstanceTooLarge { states: usize, limit: usize },
    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("unknown environment `{0}`")]
    UnknownEnv(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("no episode logs found in {0}")]
    EmptyLogs(String),
    #[error("malformed csv {file} line {line}: {message}")]
    Csv {
        file: String,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
