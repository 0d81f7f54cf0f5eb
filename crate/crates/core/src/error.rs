use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot interpolate: {0}")]
    CannotInterpolate(String),
    #[error("empty dataset: {0}")]
    EmptyDataset(String),
    #[error("training fault at epoch {epoch}: {reason}")]
    TrainingFault { epoch: usize, reason: String },
    #[error("non-finite input: {0}")]
    NonFiniteInput(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("unsupported baseline: {0}")]
    UnsupportedBaseline(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
