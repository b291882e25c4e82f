use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid field configuration: {0}")]
    Config(String),
    #[error("precision exhausted: {0}")]
    Precision(String),
    #[error("rejected input: {0}")]
    Rejected(String),
    #[error("budget exceeded: {what} needs {required}, cap is {cap}")]
    Budget { what: String, required: u64, cap: u64 },
    #[error("faithfulness gate failed: {0}")]
    Faithfulness(String),
}

pub type Result<T> = std::result::Result<T, Error>;
