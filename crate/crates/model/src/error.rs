use graspgen_core::CoreError;
use graspgen_geometry::GeomError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("bad noise schedule: {0}")]
    BadSchedule(String),
    #[error("training diverged at step {step}: {what}")]
    Diverged { step: usize, what: String },
    #[error("codec is frozen; training ops are rejected")]
    Frozen,
    #[error("codec expects {expected} points, got {got}")]
    WrongPointCount { expected: usize, got: usize },
    #[error("not enough training clouds: {got} < {need}")]
    TooFewClouds { got: usize, need: usize },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}
