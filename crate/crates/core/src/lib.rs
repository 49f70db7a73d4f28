//! Dense tensors, reverse-mode autodiff, NN layers, Adam, checkpointing and
//! finite-difference gradient verification. Everything is generic over the
//! scalar: f32 for training, f64 for gradient checks and oracles.

pub mod checkpoint;
pub mod error;
pub mod gradcheck;
pub mod graph;
pub mod nn;
pub mod optim;
pub mod rng;
pub mod scalar;
pub mod state;
pub mod tensor;

pub use error::CoreError;
pub use graph::{CustomOp, Graph, NodeId};
pub use scalar::{real, Real};
pub use state::{ModelState, Parameter};
pub use tensor::Tensor;

pub type Tensor32 = Tensor<f32>;
pub type Tensor64 = Tensor<f64>;
pub type ModelState32 = ModelState<f32>;
pub type ModelState64 = ModelState<f64>;
