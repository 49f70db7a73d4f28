//! Point-cloud autoencoder: per-point MLP features pooled into four tokens
//! by learned attention queries, decoded back to a cloud by an MLP. Trained
//! once with Chamfer loss on object-only data, then frozen for all
//! diffusion training.

use crate::error::ModelError;
use graspgen_core::graph::{Graph, NodeId};
use graspgen_core::nn::{plain_layer_norm, Linear};
use graspgen_core::optim::{adam_step, AdamConfig};
use graspgen_core::rng::{derive_rng, uniform_tensor};
use graspgen_core::{checkpoint, real, CoreError, ModelState, Real, Tensor};
use graspgen_geometry::{chamfer_node, PointCloud, MODEL_CLOUD_POINTS};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct CodecConfig {
    /// Per-point MLP hidden width (attention keys read this layer).
    pub point_hidden: usize,
    /// Per-point feature width; equals the latent token width.
    pub point_feat: usize,
    pub n_tokens: usize,
    pub attn_dim: usize,
    pub decoder_hidden: usize,
    pub n_points: usize,
}

impl Default for CodecConfig {
    fn default() -> Self {
        Self {
            point_hidden: 128,
            point_feat: 512,
            n_tokens: 4,
            attn_dim: 128,
            decoder_hidden: 1024,
            n_points: MODEL_CLOUD_POINTS,
        }
    }
}

impl CodecConfig {
    /// Small configuration for gradient checks and fast tests.
    pub fn tiny() -> Self {
        Self {
            point_hidden: 8,
            point_feat: 16,
            n_tokens: 4,
            attn_dim: 8,
            decoder_hidden: 32,
            n_points: 32,
        }
    }
}

#[derive(Clone, Debug)]
struct CodecLayers {
    enc_fc1: Linear,
    enc_fc2: Linear,
    enc_key: Linear,
    queries: usize,
    dec_fc1: Linear,
    dec_fc2: Linear,
}

/// The autoencoder with its parameters. `frozen` guards the training ops.
#[derive(Clone, Debug)]
pub struct CodecModel<T: Real> {
    pub config: CodecConfig,
    pub state: ModelState<T>,
    pub frozen: bool,
    layers: CodecLayers,
}

impl<T: Real> CodecModel<T> {
    pub fn init(config: CodecConfig, seed: u64) -> Self {
        let mut rng = derive_rng(seed, &[0xc0dec]);
        let mut state = ModelState::new(seed);
        let bound = (1.0 / config.attn_dim as f64).sqrt();
        let layers = CodecLayers {
            enc_fc1: Linear::init(&mut state, &mut rng, "codec.enc.fc1", 3, config.point_hidden),
            enc_fc2: Linear::init(
                &mut state,
                &mut rng,
                "codec.enc.fc2",
                config.point_hidden,
                config.point_feat,
            ),
            enc_key: Linear::init(
                &mut state,
                &mut rng,
                "codec.enc.key",
                config.point_hidden,
                config.attn_dim,
            ),
            queries: state.add_param(
                "codec.enc.queries",
                uniform_tensor(config.n_tokens, config.attn_dim, -bound, bound, &mut rng),
            ),
            dec_fc1: Linear::init(
                &mut state,
                &mut rng,
                "codec.dec.fc1",
                config.n_tokens * config.point_feat,
                config.decoder_hidden,
            ),
            dec_fc2: Linear::init(
                &mut state,
                &mut rng,
                "codec.dec.fc2",
                config.decoder_hidden,
                config.n_points * 3,
            ),
        };
        Self { config, state, frozen: false, layers }
    }

    /// Rebuilds the layer handles over a loaded state.
    pub fn from_state(config: CodecConfig, state: ModelState<T>, frozen: bool) -> Result<Self, ModelError> {
        let mut fresh = Self::init(config, state.rng_seed);
        if fresh.state.len() != state.len() {
            return Err(ModelError::Core(CoreError::Checkpoint(format!(
                "codec state has {} parameters, expected {}",
                state.len(),
                fresh.state.len()
            ))));
        }
        for i in 0..state.len() {
            if fresh.state.param(i).name != state.param(i).name
                || fresh.state.value(i).shape() != state.value(i).shape()
            {
                return Err(ModelError::Core(CoreError::Checkpoint(format!(
                    "codec parameter {} mismatches the config",
                    state.param(i).name
                ))));
            }
        }
        fresh.state = state;
        fresh.frozen = frozen;
        Ok(fresh)
    }

    /// Encoder over a `[N, 3]` point tensor node: tokens `[n_tokens, C]`.
    /// Pooling is attention of learned queries against per-point keys;
    /// a final non-affine norm pins token scale.
    pub fn encode_node<'m>(&'m self, g: &mut Graph<'m, T>, points: NodeId) -> NodeId {
        let pv = g.value(points);
        assert_eq!(
            pv.shape(),
            [self.config.n_points, 3],
            "encoder expects [{}, 3], got {:?}",
            self.config.n_points,
            pv.shape()
        );
        let st = &self.state;
        let frozen = self.frozen;
        let fwd = |g: &mut Graph<'m, T>, l: &graspgen_core::nn::Linear, x| {
            if frozen {
                l.forward_frozen(g, st, x)
            } else {
                l.forward(g, st, x)
            }
        };
        let h1 = fwd(g, &self.layers.enc_fc1, points);
        let h1 = g.relu(h1);
        let feat = fwd(g, &self.layers.enc_fc2, h1);
        let keys = fwd(g, &self.layers.enc_key, h1);
        let queries = if frozen {
            g.shared(st.value(self.layers.queries))
        } else {
            g.param(st, self.layers.queries)
        };
        let scores = g.matmul_nt(queries, keys);
        let scores = g.scale(scores, real::<T>(1.0 / (self.config.attn_dim as f64).sqrt()));
        let att = g.softmax_rows(scores);
        let pooled = g.matmul(att, feat);
        plain_layer_norm(g, pooled)
    }

    /// Decoder over a `[n_tokens, C]` token node: points `[N, 3]`.
    pub fn decode_node<'m>(&'m self, g: &mut Graph<'m, T>, tokens: NodeId) -> NodeId {
        let tv = g.value(tokens);
        assert_eq!(
            tv.shape(),
            [self.config.n_tokens, self.config.point_feat],
            "decoder expects [{}, {}], got {:?}",
            self.config.n_tokens,
            self.config.point_feat,
            tv.shape()
        );
        let st = &self.state;
        let flat = g.reshape(tokens, 1, self.config.n_tokens * self.config.point_feat);
        let h = if self.frozen {
            self.layers.dec_fc1.forward_frozen(g, st, flat)
        } else {
            self.layers.dec_fc1.forward(g, st, flat)
        };
        let h = g.relu(h);
        let out = if self.frozen {
            self.layers.dec_fc2.forward_frozen(g, st, h)
        } else {
            self.layers.dec_fc2.forward(g, st, h)
        };
        g.reshape(out, self.config.n_points, 3)
    }

    /// Deterministic, permutation-invariant encode of a cloud: the cloud is
    /// canonically sorted before entering the network, so any permutation of
    /// the same points produces bit-identical tokens.
    pub fn encode_cloud(&self, cloud: &PointCloud<T>) -> Result<Tensor<T>, ModelError> {
        if cloud.len() != self.config.n_points {
            return Err(ModelError::WrongPointCount {
                expected: self.config.n_points,
                got: cloud.len(),
            });
        }
        let sorted = cloud.canonical_sorted().to_tensor();
        let mut g = Graph::no_grad();
        let pts = g.leaf(sorted);
        let tokens = self.encode_node(&mut g, pts);
        Ok(g.value(tokens).clone())
    }

    pub fn decode_tokens(&self, tokens: &Tensor<T>) -> PointCloud<T> {
        let mut g = Graph::no_grad();
        let t = g.leaf(tokens.clone());
        let out = self.decode_node(&mut g, t);
        PointCloud::from_tensor(g.value(out))
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        checkpoint::save(&self.state, path).map_err(ModelError::Core)?;
        let manifest = CodecManifest { frozen: self.frozen, config: self.config };
        let json = serde_json::to_string_pretty(&manifest).expect("codec manifest json");
        std::fs::write(sidecar_path(path), json).map_err(CoreError::Io).map_err(ModelError::Core)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let state = checkpoint::load::<T>(path).map_err(ModelError::Core)?;
        let raw = std::fs::read_to_string(sidecar_path(path))
            .map_err(CoreError::Io)
            .map_err(ModelError::Core)?;
        let manifest: CodecManifest = serde_json::from_str(&raw)
            .map_err(|e| ModelError::Core(CoreError::Checkpoint(format!("codec sidecar: {e}"))))?;
        Self::from_state(manifest.config, state, manifest.frozen)
    }
}

#[derive(Serialize, Deserialize)]
struct CodecManifest {
    frozen: bool,
    config: CodecConfig,
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".json");
    std::path::PathBuf::from(os)
}

#[derive(Clone, Copy, Debug)]
pub struct CodecTrainConfig {
    pub steps: usize,
    pub batch: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for CodecTrainConfig {
    fn default() -> Self {
        Self { steps: 600, batch: 4, lr: 1e-3, seed: 7 }
    }
}

pub const MIN_TRAIN_CLOUDS: usize = 200;

/// Trains a fresh codec on the clouds with Chamfer loss and freezes it.
/// Divergence (non-finite loss) aborts with the step recorded; the caller
/// keeps the last on-disk checkpoint.
pub fn train_codec<T: Real>(
    clouds: &[PointCloud<T>],
    config: CodecConfig,
    train: CodecTrainConfig,
    mut on_step: impl FnMut(usize, f64),
) -> Result<CodecModel<T>, ModelError> {
    if clouds.len() < MIN_TRAIN_CLOUDS {
        return Err(ModelError::TooFewClouds { got: clouds.len(), need: MIN_TRAIN_CLOUDS });
    }
    let mut model = CodecModel::init(config, train.seed);
    // Canonical-sort once; encoder input order is part of the contract.
    let sorted: Vec<Tensor<T>> =
        clouds.iter().map(|c| c.canonical_sorted().to_tensor()).collect();
    let adam = AdamConfig { lr: train.lr, ..AdamConfig::default() };
    let mut order: Vec<usize> = (0..clouds.len()).collect();
    let mut epoch_rng = derive_rng(train.seed, &[0xba7c, 0]);
    order.shuffle(&mut epoch_rng);
    let mut cursor = 0usize;
    let mut epoch = 0u64;
    for step in 0..train.steps {
        model.state.zero_grads();
        let mut loss_acc = 0.0f64;
        for _ in 0..train.batch {
            if cursor >= order.len() {
                epoch += 1;
                let mut rng = derive_rng(train.seed, &[0xba7c, epoch]);
                order.shuffle(&mut rng);
                cursor = 0;
            }
            let idx = order[cursor];
            cursor += 1;
            let mut g = Graph::new();
            let pts = g.leaf(sorted[idx].clone());
            let tokens = model.encode_node(&mut g, pts);
            let recon = model.decode_node(&mut g, tokens);
            let loss = chamfer_node(&mut g, recon, pts).map_err(ModelError::Geom)?;
            let scaled = g.scale(loss, real::<T>(1.0 / train.batch as f64));
            g.backward(scaled);
            loss_acc += g.value(loss).item().to_f64().unwrap();
            let grads = g.param_grads();
            model.state.accumulate_grads(&grads);
        }
        let loss_mean = loss_acc / train.batch as f64;
        if !loss_mean.is_finite() {
            return Err(ModelError::Diverged { step, what: format!("codec loss {loss_mean}") });
        }
        adam_step(&mut model.state, &adam).map_err(ModelError::Core)?;
        on_step(step, loss_mean);
    }
    model.freeze();
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use graspgen_core::rng::normal_tensor;

    fn tiny_cloud(seed: u64, n: usize) -> PointCloud<f64> {
        let mut rng = derive_rng(seed, &[0x77]);
        PointCloud::from_tensor(&normal_tensor::<f64>(n, 3, &mut rng).scale(0.05))
    }

    #[test]
    fn encode_is_deterministic_and_permutation_invariant_bitwise() {
        let cfg = CodecConfig::tiny();
        let model = CodecModel::<f64>::init(cfg, 3);
        let cloud = tiny_cloud(1, cfg.n_points);
        let t1 = model.encode_cloud(&cloud).unwrap();
        let t2 = model.encode_cloud(&cloud).unwrap();
        assert_eq!(t1, t2);
        let mut permuted = cloud.points.clone();
        permuted.rotate_left(13);
        permuted.swap(0, 7);
        let t3 = model.encode_cloud(&PointCloud::new(permuted)).unwrap();
        assert_eq!(t1, t3);
    }

    #[test]
    fn distinct_shapes_get_distinct_latents() {
        let cfg = CodecConfig::tiny();
        let model = CodecModel::<f64>::init(cfg, 3);
        let a = model.encode_cloud(&tiny_cloud(1, cfg.n_points)).unwrap();
        let b = model.encode_cloud(&tiny_cloud(2, cfg.n_points)).unwrap();
        assert!(a.sub(&b).norm_sq() > 0.0);
    }

    #[test]
    fn wrong_point_count_is_an_error() {
        let cfg = CodecConfig::tiny();
        let model = CodecModel::<f64>::init(cfg, 3);
        assert!(matches!(
            model.encode_cloud(&tiny_cloud(1, 7)),
            Err(ModelError::WrongPointCount { .. })
        ));
    }

    #[test]
    fn zero_latent_decodes_to_finite_points() {
        let cfg = CodecConfig::tiny();
        let model = CodecModel::<f64>::init(cfg, 3);
        let cloud = model.decode_tokens(&Tensor::zeros(cfg.n_tokens, cfg.point_feat));
        assert!(cloud.all_finite());
        assert_eq!(cloud.len(), cfg.n_points);
    }

    #[test]
    fn latent_interpolation_midpoint_is_finite() {
        let cfg = CodecConfig::tiny();
        let model = CodecModel::<f64>::init(cfg, 3);
        let a = model.encode_cloud(&tiny_cloud(1, cfg.n_points)).unwrap();
        let b = model.encode_cloud(&tiny_cloud(2, cfg.n_points)).unwrap();
        let mid = a.zip_map(&b, |x, y| 0.5 * (x + y));
        let cloud = model.decode_tokens(&mid);
        assert!(cloud.all_finite());
        assert!(cloud.bounding_radius() < 1e3);
    }

    #[test]
    fn checkpoint_round_trip_preserves_everything() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("codec.ckpt");
        let mut model = CodecModel::<f32>::init(CodecConfig::tiny(), 9);
        model.freeze();
        model.save(&path).unwrap();
        let loaded = CodecModel::<f32>::load(&path).unwrap();
        assert!(loaded.frozen);
        assert_eq!(loaded.config, model.config);
        for i in 0..model.state.len() {
            assert_eq!(model.state.value(i), loaded.state.value(i));
        }
    }
}
