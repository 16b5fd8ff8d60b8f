use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error in `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid action: {0}")]
    InvalidAction(String),

    #[error("active transmit power {required:.4e} W exceeds the {max:.4e} W limit")]
    InfeasiblePower { required: f64, max: f64 },

    #[error("buffer holds {available} transitions, {requested} requested")]
    InsufficientData { available: usize, requested: usize },

    #[error("index {index} out of range for {len} occupied slots")]
    Index { index: usize, len: usize },

    #[error("action mask excludes every entry")]
    EmptyMask,

    #[error("no results to aggregate")]
    EmptyInput,

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
