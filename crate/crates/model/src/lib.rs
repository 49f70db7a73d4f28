//! Latent diffusion core: the point-cloud codec, the noise schedule, the
//! transformer denoiser with independent per-modality clocks, the training
//! objectives, the combined train step, and both samplers.

pub mod codec;
pub mod denoiser;
pub mod error;
pub mod latent;
pub mod losses;
pub mod sampler;
pub mod schedule;
pub mod toy;
pub mod trainer;

pub use codec::{train_codec, CodecConfig, CodecModel, CodecTrainConfig};
pub use denoiser::{Denoiser, DenoiserConfig};
pub use error::ModelError;
pub use latent::{LatentCode, DEFAULT_LATENT_WIDTH, HAND_TOKENS, OBJECT_TOKENS, TOTAL_TOKENS};
pub use losses::{loss_cond, loss_distance, loss_hand_xyz, loss_obj, loss_uncond, LossDraw};
pub use sampler::{step_back, PipelineSampler, RenoiseMode, Sampler};
pub use schedule::NoiseSchedule;
pub use toy::{train_toy, ToyTask, ToyTrainConfig};
pub use trainer::{
    prepare_object, prepare_paired, train, DiffusionModel, ObjectSample, PairedSample,
    StepLosses, TrainConfig,
};

pub type CodecModel32 = CodecModel<f32>;
pub type NoiseSchedule32 = NoiseSchedule<f32>;
pub type NoiseSchedule64 = NoiseSchedule<f64>;
