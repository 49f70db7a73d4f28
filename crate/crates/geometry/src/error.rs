use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("empty point cloud")]
    EmptyCloud,
    #[error("k = {k} exceeds cloud size {n}")]
    KTooLarge { k: usize, n: usize },
    #[error("cloud has {n} points, need at least {need}")]
    TooFewPoints { n: usize, need: usize },
    #[error("point cloud has {got} points, expected {expected}")]
    BadPointCount { expected: usize, got: usize },
    #[error("degenerate mesh: {0}")]
    DegenerateMesh(String),
    #[error("voxel grid dims {dims:?} exceed the 256 per-axis limit")]
    GridTooLarge { dims: [usize; 3] },
    #[error("ply: {0}")]
    Ply(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
