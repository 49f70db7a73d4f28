use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("non-finite value in {what}")]
    NonFinite { what: String },
    #[error("{what} out of range: {value} not in [{lo}, {hi}]")]
    OutOfRange { what: String, value: f64, lo: f64, hi: f64 },
    #[error("checkpoint format error: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
