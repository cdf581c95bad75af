use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, QseaError>;

#[derive(Debug, Error)]
pub enum QseaError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("invalid qubit index: {0}")]
    Index(String),
    #[error("feature reduction failed: {0}")]
    Reduction(String),
    #[error("invalid parameters: {0}")]
    Parameter(String),
    #[error("empty batch: {0}")]
    Arity(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("gate does not admit a parameter-shift rule: {0}")]
    UnsupportedGate(String),
    #[error("value out of range: {0}")]
    Range(String),
    #[error("bad file format: {0}")]
    Format(String),
    #[error("truncated input: {0}")]
    Length(String),
    #[error("inconsistent dataset: {0}")]
    Consistency(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
