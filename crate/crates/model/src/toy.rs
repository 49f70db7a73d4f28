//! Analytic validation task: a correlated 2-D Gaussian pair linearly
//! embedded into the token layout. The denoiser trains on these latents
//! directly (no tokenizers, no codec), and decoded sample statistics can be
//! compared against closed-form marginals and conditionals.

use crate::denoiser::DenoiserConfig;
use crate::latent::{LatentCode, HAND_TOKENS, OBJECT_TOKENS};
use crate::losses::{loss_cond, loss_uncond, LossDraw};
use crate::schedule::NoiseSchedule;
use crate::trainer::DiffusionModel;
use crate::error::ModelError;
use graspgen_core::graph::Graph;
use graspgen_core::optim::{adam_step, AdamConfig};
use graspgen_core::rng::{derive_rng, normal};
use graspgen_core::{real, Real, Tensor};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct ToyTask<T> {
    pub width: usize,
    pub mean: [f64; 2],
    pub std: [f64; 2],
    pub rho: f64,
    /// +-1 embedding direction for the hand scalar, `[1, C]`.
    u_hand: Tensor<T>,
    /// +-1 embedding directions per object token, `[4, C]`.
    u_obj: Tensor<T>,
}

impl<T: Real> ToyTask<T> {
    pub fn new(width: usize, mean: [f64; 2], std: [f64; 2], rho: f64, seed: u64) -> Self {
        let mut rng = derive_rng(seed, &[0x70b]);
        let sign = |rng: &mut ChaCha8Rng| {
            let v: f64 = normal(rng);
            if v >= 0.0 {
                T::one()
            } else {
                -T::one()
            }
        };
        let u_hand =
            Tensor::from_vec(HAND_TOKENS, width, (0..width).map(|_| sign(&mut rng)).collect());
        let u_obj = Tensor::from_vec(
            OBJECT_TOKENS,
            width,
            (0..OBJECT_TOKENS * width).map(|_| sign(&mut rng)).collect(),
        );
        Self { width, mean, std, rho, u_hand, u_obj }
    }

    /// Draws (hand, object) from the correlated Gaussian.
    pub fn sample_pair(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        let e1: f64 = normal(rng);
        let e2: f64 = normal(rng);
        let x_obj = self.mean[1] + self.std[1] * e1;
        let x_hand = self.mean[0] + self.std[0] * (self.rho * e1 + (1.0 - self.rho * self.rho).sqrt() * e2);
        (x_hand, x_obj)
    }

    pub fn embed(&self, x_hand: f64, x_obj: f64) -> LatentCode<T> {
        LatentCode::new(self.u_hand.scale(real(x_hand)), self.u_obj.scale(real(x_obj)))
    }

    pub fn decode_hand(&self, hand_token: &Tensor<T>) -> f64 {
        dot(hand_token.data(), self.u_hand.data()) / self.width as f64
    }

    pub fn decode_obj(&self, object_tokens: &Tensor<T>) -> f64 {
        dot(object_tokens.data(), self.u_obj.data()) / (self.width * OBJECT_TOKENS) as f64
    }

    /// E[hand | object = o] for the underlying Gaussian.
    pub fn conditional_mean(&self, o: f64) -> f64 {
        self.mean[0] + self.rho * self.std[0] / self.std[1] * (o - self.mean[1])
    }

    pub fn covariance(&self) -> [[f64; 2]; 2] {
        let c = self.rho * self.std[0] * self.std[1];
        [[self.std[0] * self.std[0], c], [c, self.std[1] * self.std[1]]]
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> f64 {
    let mut s = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        s += x.to_f64().unwrap() * y.to_f64().unwrap();
    }
    s
}

#[derive(Clone, Copy, Debug)]
pub struct ToyTrainConfig {
    pub steps: usize,
    pub batch: usize,
    pub lr: f64,
    pub seed: u64,
    pub denoiser: DenoiserConfig,
}

impl Default for ToyTrainConfig {
    fn default() -> Self {
        Self {
            steps: 6000,
            batch: 16,
            lr: 3e-4,
            seed: 11,
            denoiser: DenoiserConfig {
                latent_width: 64,
                n_heads: 4,
                n_layers: 2,
                d_ff: 128,
                tokenizer_hidden: 128,
                time_sin_dim: 32,
            },
        }
    }
}

/// Trains a denoiser on toy latents with the joint and conditional
/// objectives summed per draw.
pub fn train_toy<T: Real>(
    task: &ToyTask<T>,
    schedule: &NoiseSchedule<T>,
    cfg: &ToyTrainConfig,
    mut on_step: impl FnMut(usize, f64),
) -> Result<DiffusionModel<T>, ModelError> {
    assert_eq!(task.width, cfg.denoiser.latent_width);
    let mut model = DiffusionModel::<T>::init(cfg.denoiser, cfg.seed);
    let adam = AdamConfig { lr: cfg.lr, ..AdamConfig::default() };
    for step in 0..cfg.steps {
        model.state.zero_grads();
        let mut total = 0.0;
        for slot in 0..cfg.batch {
            let mut rng = derive_rng(cfg.seed, &[0x70b2, step as u64, slot as u64]);
            let (x_hand, x_obj) = task.sample_pair(&mut rng);
            let code = task.embed(x_hand, x_obj);
            let draw_u = LossDraw::sample(task.width, schedule.t_steps(), &mut rng);
            let draw_c = LossDraw::sample(task.width, schedule.t_steps(), &mut rng);
            let mut g = Graph::new();
            let z0_hand = g.leaf(code.hand.clone());
            let z0_obj = g.leaf(code.object.clone());
            let (lu, _) =
                loss_uncond(&mut g, &model.denoiser, &model.state, schedule, z0_hand, z0_obj, &draw_u);
            let (lc, _) = loss_cond(
                &mut g,
                &model.denoiser,
                &model.state,
                schedule,
                z0_hand,
                z0_obj,
                &draw_c,
                true,
            );
            let sum = g.add(lu, lc);
            let scaled = g.scale(sum, real::<T>(1.0 / cfg.batch as f64));
            g.backward(scaled);
            total += g.value(scaled).item().to_f64().unwrap();
            let grads = g.param_grads();
            model.state.accumulate_grads(&grads);
        }
        if !total.is_finite() {
            return Err(ModelError::Diverged { step, what: format!("toy loss {total}") });
        }
        adam_step(&mut model.state, &adam).map_err(ModelError::Core)?;
        on_step(step, total);
    }
    Ok(model)
}
