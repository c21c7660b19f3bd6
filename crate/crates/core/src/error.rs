use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("coincident points {0} and {1}")]
    Diagonal(usize, usize),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("malformed format: {0}")]
    Format(String),
    #[error("pole: {0}")]
    Pole(String),
    #[error("integration failed: {msg} (estimated error {estimate:e})")]
    Integration { msg: String, estimate: f64 },
    #[error("mollifier scale {scale:e} not resolvable on grid spacing {spacing:e}")]
    Resolution { scale: f64, spacing: f64 },
    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),
    #[error("size error: {0}")]
    Size(String),
    #[error("schedule error: {0}")]
    Schedule(String),
    #[error("empty term: {0}")]
    EmptyTerm(String),
    #[error("ledger error: {0}")]
    Ledger(String),
    #[error("parameter out of range: {0}")]
    Range(String),
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
