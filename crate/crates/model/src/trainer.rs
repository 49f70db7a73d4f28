//! Combined training step and loop: paired samples drive the joint,
//! conditional and geometric objectives; object-only samples drive the
//! object objective. One optimizer step per combined draw. The frozen codec
//! participates only through cached tokens and pass-through decoding, so
//! its parameters stay bit-identical.

use crate::codec::CodecModel;
use crate::denoiser::{Denoiser, DenoiserConfig};
use crate::error::ModelError;
use crate::latent::OBJECT_TOKENS;
use crate::losses::{loss_cond, loss_distance, loss_hand_xyz, loss_obj, loss_uncond, LossDraw};
use crate::sampler::RenoiseMode;
use crate::schedule::NoiseSchedule;
use graspgen_core::graph::Graph;
use graspgen_core::optim::{adam_step, AdamConfig};
use graspgen_core::rng::derive_rng;
use graspgen_core::{checkpoint, real, CoreError, ModelState, Real, Tensor};
use graspgen_geometry::field::{distance_field, FIELD_NEIGHBORS};
use graspgen_geometry::PointCloud;
use graspgen_hand::{joints_and_jacobian, HandTemplate};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

const TAG_PAIRED: u64 = 0x9a1;
const TAG_OBJECT: u64 = 0x9a2;
const TAG_EPOCH: u64 = 0x9a3;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TrainConfig {
    pub steps: usize,
    pub batch_paired: usize,
    pub batch_obj: usize,
    pub lr: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub t_steps: usize,
    pub beta_start: f64,
    pub beta_end: f64,
    pub denoiser: DenoiserConfig,
    /// Score the conditional objective on the hand token only.
    pub cond_hand_only: bool,
    /// Attach the geometric objectives to the conditional branch only
    /// (false adds them to the joint branch as well).
    pub aux_on_cond_only: bool,
    pub w_uncond: f64,
    pub w_cond: f64,
    pub w_distance: f64,
    pub w_hand_xyz: f64,
    pub w_obj: f64,
    pub seed: u64,
    pub checkpoint_every: usize,
    pub renoise: RenoiseMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            steps: 10_000,
            batch_paired: 8,
            batch_obj: 8,
            lr: 1e-4,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            t_steps: crate::schedule::DEFAULT_T,
            beta_start: crate::schedule::DEFAULT_BETA_START,
            beta_end: crate::schedule::DEFAULT_BETA_END,
            denoiser: DenoiserConfig::default(),
            cond_hand_only: true,
            aux_on_cond_only: true,
            w_uncond: 1.0,
            w_cond: 1.0,
            w_distance: 1.0,
            w_hand_xyz: 1.0,
            w_obj: 1.0,
            seed: 0,
            checkpoint_every: 1000,
            renoise: RenoiseMode::DdpmPosterior,
        }
    }
}

impl TrainConfig {
    pub fn adam(&self) -> AdamConfig {
        AdamConfig { lr: self.lr, beta1: self.adam_beta1, beta2: self.adam_beta2, eps: self.adam_eps }
    }

    pub fn schedule<T: Real>(&self) -> Result<NoiseSchedule<T>, ModelError> {
        NoiseSchedule::linear(self.t_steps, self.beta_start, self.beta_end)
    }
}

/// Denoiser plus its parameters; the unit that checkpoints.
pub struct DiffusionModel<T: Real> {
    pub denoiser: Denoiser,
    pub state: ModelState<T>,
}

impl<T: Real> DiffusionModel<T> {
    pub fn init(config: DenoiserConfig, seed: u64) -> Self {
        let mut state = ModelState::new(seed);
        let denoiser = Denoiser::init(&mut state, config, seed);
        Self { denoiser, state }
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        checkpoint::save(&self.state, path).map_err(ModelError::Core)?;
        let json = serde_json::to_string_pretty(&self.denoiser.config).expect("denoiser config json");
        std::fs::write(sidecar(path), json).map_err(CoreError::Io).map_err(ModelError::Core)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let state = checkpoint::load::<T>(path).map_err(ModelError::Core)?;
        let raw = std::fs::read_to_string(sidecar(path))
            .map_err(CoreError::Io)
            .map_err(ModelError::Core)?;
        let config: DenoiserConfig = serde_json::from_str(&raw)
            .map_err(|e| ModelError::Core(CoreError::Checkpoint(format!("denoiser sidecar: {e}"))))?;
        let mut fresh = Self::init(config, state.rng_seed);
        if fresh.state.len() != state.len() {
            return Err(ModelError::Core(CoreError::Checkpoint(
                "denoiser state does not match its config".into(),
            )));
        }
        fresh.state = state;
        Ok(fresh)
    }
}

fn sidecar(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".json");
    std::path::PathBuf::from(os)
}

/// One paired training sample with everything precomputed that the frozen
/// codec or template determine: object tokens, ground-truth joints, and the
/// ground-truth offset field.
#[derive(Clone, Debug)]
pub struct PairedSample<T> {
    pub y_hand: Tensor<T>,
    pub object_tokens: Tensor<T>,
    pub field_gt: Tensor<T>,
    pub joints_gt: Tensor<T>,
}

#[derive(Clone, Debug)]
pub struct ObjectSample<T> {
    pub object_tokens: Tensor<T>,
}

pub fn prepare_paired<T: Real>(
    y_hand: &Tensor<T>,
    cloud: &PointCloud<T>,
    codec: &CodecModel<T>,
    tpl: &HandTemplate,
) -> Result<PairedSample<T>, ModelError> {
    let object_tokens = codec.encode_cloud(cloud)?;
    let (joints_gt, _) = joints_and_jacobian(&tpl.skeleton, y_hand, false);
    let joint_list: Vec<[T; 3]> =
        (0..joints_gt.rows()).map(|i| [joints_gt.at(i, 0), joints_gt.at(i, 1), joints_gt.at(i, 2)]).collect();
    let (field_gt, _) = distance_field(&joint_list, cloud, FIELD_NEIGHBORS)?;
    Ok(PairedSample { y_hand: y_hand.clone(), object_tokens, field_gt, joints_gt })
}

pub fn prepare_object<T: Real>(
    cloud: &PointCloud<T>,
    codec: &CodecModel<T>,
) -> Result<ObjectSample<T>, ModelError> {
    Ok(ObjectSample { object_tokens: codec.encode_cloud(cloud)? })
}

/// Per-step loss report (batch means; geometric terms are sums per sample).
#[derive(Clone, Copy, Debug, Default)]
pub struct StepLosses {
    pub uncond: f64,
    pub cond: f64,
    pub distance: f64,
    pub hand_xyz: f64,
    pub obj: f64,
    pub total: f64,
}

/// Without-replacement epoch batching, reconstructible at any step.
struct Batcher {
    n: usize,
    seed: u64,
    tag: u64,
    cached_epoch: Option<(u64, Vec<usize>)>,
}

impl Batcher {
    fn new(n: usize, seed: u64, tag: u64) -> Self {
        Self { n, seed, tag, cached_epoch: None }
    }

    fn order_for_epoch(&mut self, epoch: u64) -> &[usize] {
        let stale = match &self.cached_epoch {
            Some((e, _)) => *e != epoch,
            None => true,
        };
        if stale {
            let mut order: Vec<usize> = (0..self.n).collect();
            let mut rng = derive_rng(self.seed, &[TAG_EPOCH, self.tag, epoch]);
            order.shuffle(&mut rng);
            self.cached_epoch = Some((epoch, order));
        }
        &self.cached_epoch.as_ref().unwrap().1
    }

    /// Indices for the given step at the given batch size; a pure function
    /// of (seed, tag, step), so resume replays identically.
    fn batch_for_step(&mut self, step: usize, batch: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(batch);
        for slot in 0..batch {
            let pos = step * batch + slot;
            let epoch = (pos / self.n) as u64;
            let within = pos % self.n;
            out.push(self.order_for_epoch(epoch)[within]);
        }
        out
    }
}

/// Runs `cfg.steps` optimizer steps from the model's current Adam step.
/// `on_step` fires after each step (for loss curves and checkpointing); a
/// non-finite total aborts with the diverging step so callers keep the last
/// good checkpoint.
pub fn train<T: Real>(
    model: &mut DiffusionModel<T>,
    codec: &CodecModel<T>,
    tpl: &HandTemplate,
    paired: &[PairedSample<T>],
    objects: &[ObjectSample<T>],
    cfg: &TrainConfig,
    mut on_step: impl FnMut(usize, &StepLosses, &mut DiffusionModel<T>) -> Result<(), ModelError>,
) -> Result<(), ModelError> {
    assert!(codec.frozen, "codec must be frozen before diffusion training");
    let schedule = cfg.schedule::<T>()?;
    let width = cfg.denoiser.latent_width;
    assert_eq!(width, codec.config.point_feat, "latent width must match codec token width");
    let use_paired = cfg.batch_paired > 0 && !paired.is_empty();
    let use_obj = cfg.batch_obj > 0 && !objects.is_empty();
    assert!(use_paired || use_obj, "nothing to train on");
    let mut paired_batcher = Batcher::new(paired.len().max(1), cfg.seed, 1);
    let mut obj_batcher = Batcher::new(objects.len().max(1), cfg.seed, 2);
    let adam = cfg.adam();
    let start = model.state.adam_step as usize;

    for step in start..cfg.steps {
        model.state.zero_grads();
        let mut losses = StepLosses::default();

        if use_paired {
            let idx = paired_batcher.batch_for_step(step, cfg.batch_paired);
            let results: Vec<_> = idx
                .par_iter()
                .enumerate()
                .map(|(slot, &i)| {
                    paired_sample_pass(
                        model, codec, tpl, &schedule, cfg, &paired[i], step, slot as u64,
                    )
                })
                .collect();
            let inv = 1.0 / cfg.batch_paired as f64;
            for r in results {
                let (l, grads) = r?;
                losses.uncond += l.uncond * inv;
                losses.cond += l.cond * inv;
                losses.distance += l.distance * inv;
                losses.hand_xyz += l.hand_xyz * inv;
                model.state.accumulate_grads(&grads);
            }
        }
        if use_obj {
            let idx = obj_batcher.batch_for_step(step, cfg.batch_obj);
            let results: Vec<_> = idx
                .par_iter()
                .enumerate()
                .map(|(slot, &i)| {
                    object_sample_pass(model, &schedule, cfg, &objects[i], step, slot as u64)
                })
                .collect();
            let inv = 1.0 / cfg.batch_obj as f64;
            for r in results {
                let (l_obj, grads) = r?;
                losses.obj += l_obj * inv;
                model.state.accumulate_grads(&grads);
            }
        }
        losses.total = cfg.w_uncond * losses.uncond
            + cfg.w_cond * losses.cond
            + cfg.w_distance * losses.distance
            + cfg.w_hand_xyz * losses.hand_xyz
            + cfg.w_obj * losses.obj;
        if !losses.total.is_finite() {
            return Err(ModelError::Diverged { step, what: format!("total loss {}", losses.total) });
        }
        adam_step(&mut model.state, &adam).map_err(ModelError::Core)?;
        on_step(step, &losses, model)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn paired_sample_pass<T: Real>(
    model: &DiffusionModel<T>,
    codec: &CodecModel<T>,
    tpl: &HandTemplate,
    schedule: &NoiseSchedule<T>,
    cfg: &TrainConfig,
    sample: &PairedSample<T>,
    step: usize,
    slot: u64,
) -> Result<(StepLosses, Vec<(usize, Tensor<T>)>), ModelError> {
    let mut rng = derive_rng(cfg.seed, &[TAG_PAIRED, step as u64, slot]);
    let draw_uncond = LossDraw::sample(cfg.denoiser.latent_width, schedule.t_steps(), &mut rng);
    let draw_cond = LossDraw::sample(cfg.denoiser.latent_width, schedule.t_steps(), &mut rng);

    let mut g = Graph::new();
    let y = g.leaf(sample.y_hand.clone());
    let z0_hand = model.denoiser.encode_hand(&mut g, &model.state, y);
    let z0_obj = g.leaf(sample.object_tokens.clone());
    let field_gt = g.leaf(sample.field_gt.clone());
    let joints_gt = g.leaf(sample.joints_gt.clone());

    let (l_uncond, zhat_uncond) =
        loss_uncond(&mut g, &model.denoiser, &model.state, schedule, z0_hand, z0_obj, &draw_uncond);
    let (l_cond, zhat_cond) = loss_cond(
        &mut g,
        &model.denoiser,
        &model.state,
        schedule,
        z0_hand,
        z0_obj,
        &draw_cond,
        cfg.cond_hand_only,
    );
    let mut l_dist = loss_distance(
        &mut g,
        &model.denoiser,
        &model.state,
        codec,
        tpl,
        zhat_cond,
        field_gt,
    )
    .map_err(ModelError::Geom)?;
    let mut l_xyz = loss_hand_xyz(&mut g, &model.denoiser, &model.state, tpl, zhat_cond, joints_gt);
    if !cfg.aux_on_cond_only {
        let l_dist_u = loss_distance(
            &mut g,
            &model.denoiser,
            &model.state,
            codec,
            tpl,
            zhat_uncond,
            field_gt,
        )
        .map_err(ModelError::Geom)?;
        let l_xyz_u =
            loss_hand_xyz(&mut g, &model.denoiser, &model.state, tpl, zhat_uncond, joints_gt);
        let half = real::<T>(0.5);
        let d = g.add(l_dist, l_dist_u);
        l_dist = g.scale(d, half);
        let x = g.add(l_xyz, l_xyz_u);
        l_xyz = g.scale(x, half);
    }

    let report = StepLosses {
        uncond: g.value(l_uncond).item().to_f64().unwrap(),
        cond: g.value(l_cond).item().to_f64().unwrap(),
        distance: g.value(l_dist).item().to_f64().unwrap(),
        hand_xyz: g.value(l_xyz).item().to_f64().unwrap(),
        obj: 0.0,
        total: 0.0,
    };
    let inv_batch = real::<T>(1.0 / cfg.batch_paired as f64);
    let wu = g.scale(l_uncond, real::<T>(cfg.w_uncond) * inv_batch);
    let wc = g.scale(l_cond, real::<T>(cfg.w_cond) * inv_batch);
    let wd = g.scale(l_dist, real::<T>(cfg.w_distance) * inv_batch);
    let wx = g.scale(l_xyz, real::<T>(cfg.w_hand_xyz) * inv_batch);
    let s1 = g.add(wu, wc);
    let s2 = g.add(wd, wx);
    let total = g.add(s1, s2);
    g.backward(total);
    Ok((report, g.param_grads()))
}

fn object_sample_pass<T: Real>(
    model: &DiffusionModel<T>,
    schedule: &NoiseSchedule<T>,
    cfg: &TrainConfig,
    sample: &ObjectSample<T>,
    step: usize,
    slot: u64,
) -> Result<(f64, Vec<(usize, Tensor<T>)>), ModelError> {
    let mut rng = derive_rng(cfg.seed, &[TAG_OBJECT, step as u64, slot]);
    let draw = LossDraw::sample(cfg.denoiser.latent_width, schedule.t_steps(), &mut rng);
    let mut g = Graph::new();
    let z0_obj = g.leaf(sample.object_tokens.clone());
    debug_assert_eq!(g.value(z0_obj).rows(), OBJECT_TOKENS);
    let l_obj = loss_obj(&mut g, &model.denoiser, &model.state, schedule, z0_obj, &draw);
    let value = g.value(l_obj).item().to_f64().unwrap();
    let w = g.scale(l_obj, real::<T>(cfg.w_obj / cfg.batch_obj as f64));
    g.backward(w);
    Ok((value, g.param_grads()))
}
