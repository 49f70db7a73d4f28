//! Training objectives over the latent tokens.
//!
//! All randomness (timesteps, corruption noise, the hand-slot noise for the
//! object-only objective) is drawn up front into a [`LossDraw`], so each
//! loss is a deterministic function of the parameters. That is what the
//! finite-difference checks and the fixed-noise oracles rely on.

use crate::codec::CodecModel;
use crate::denoiser::Denoiser;
use crate::latent::{HAND_TOKENS, OBJECT_TOKENS};
use crate::schedule::NoiseSchedule;
use graspgen_core::graph::{Graph, NodeId};
use graspgen_core::rng::normal_tensor;
use graspgen_core::{ModelState, Real, Tensor};
use graspgen_geometry::field::{distance_field_node, FIELD_NEIGHBORS};
use graspgen_geometry::GeomError;
use graspgen_hand::{fk_joints_node, HandTemplate};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Frozen randomness for one sample's loss evaluation.
#[derive(Clone, Debug)]
pub struct LossDraw<T> {
    pub t_hand: usize,
    pub t_obj: usize,
    pub noise_hand: Tensor<T>,
    pub noise_obj: Tensor<T>,
    /// Standard normal filling the hand slot in the object-only objective.
    pub hand_eps: Tensor<T>,
}

impl<T: Real> LossDraw<T> {
    /// Timesteps uniform over [1, T], independent per modality.
    pub fn sample(width: usize, t_steps: usize, rng: &mut ChaCha8Rng) -> Self {
        Self {
            t_hand: rng.gen_range(1..=t_steps),
            t_obj: rng.gen_range(1..=t_steps),
            noise_hand: normal_tensor(HAND_TOKENS, width, rng),
            noise_obj: normal_tensor(OBJECT_TOKENS, width, rng),
            hand_eps: normal_tensor(HAND_TOKENS, width, rng),
        }
    }
}

/// Closed-form corruption on the tape; `t = 0` passes the node through so
/// conditioning stays bit-exact.
pub fn corrupt_node<T: Real>(
    g: &mut Graph<T>,
    schedule: &NoiseSchedule<T>,
    z0: NodeId,
    t: usize,
    noise: &Tensor<T>,
) -> NodeId {
    if t == 0 {
        return z0;
    }
    let n = g.leaf(noise.clone());
    g.lin_comb(z0, schedule.sqrt_alpha_bar(t), n, schedule.sqrt_one_minus_alpha_bar(t))
}

/// Joint-generation objective: both modalities corrupted to independent
/// timesteps, mean-squared error over all five tokens. Returns the loss and
/// the predicted clean latent.
pub fn loss_uncond<'m, T: Real>(
    g: &mut Graph<'m, T>,
    den: &Denoiser,
    st: &'m ModelState<T>,
    schedule: &NoiseSchedule<T>,
    z0_hand: NodeId,
    z0_obj: NodeId,
    draw: &LossDraw<T>,
) -> (NodeId, NodeId) {
    let zt_h = corrupt_node(g, schedule, z0_hand, draw.t_hand, &draw.noise_hand);
    let zt_o = corrupt_node(g, schedule, z0_obj, draw.t_obj, &draw.noise_obj);
    let z_t = g.concat_rows(&[zt_h, zt_o]);
    let zhat = den.predict_clean(g, st, z_t, draw.t_hand, draw.t_obj);
    let z0 = g.concat_rows(&[z0_hand, z0_obj]);
    (g.mse(zhat, z0), zhat)
}

/// Object-conditioned objective: the object part enters clean (t_obj = 0)
/// and, under the hand-only mask, only the hand token is scored.
pub fn loss_cond<'m, T: Real>(
    g: &mut Graph<'m, T>,
    den: &Denoiser,
    st: &'m ModelState<T>,
    schedule: &NoiseSchedule<T>,
    z0_hand: NodeId,
    z0_obj: NodeId,
    draw: &LossDraw<T>,
    hand_only: bool,
) -> (NodeId, NodeId) {
    let zt_h = corrupt_node(g, schedule, z0_hand, draw.t_hand, &draw.noise_hand);
    let z_t = g.concat_rows(&[zt_h, z0_obj]);
    let zhat = den.predict_clean(g, st, z_t, draw.t_hand, 0);
    let loss = if hand_only {
        let zhat_h = g.slice_rows(zhat, 0, HAND_TOKENS);
        g.mse(zhat_h, z0_hand)
    } else {
        let z0 = g.concat_rows(&[z0_hand, z0_obj]);
        g.mse(zhat, z0)
    };
    (loss, zhat)
}

/// Object-only objective: the hand slot carries a fresh Gaussian, the hand
/// clock sits at T, and only the object tokens are scored, so the hand
/// tokenizer and detokenizer receive exactly zero gradient.
pub fn loss_obj<'m, T: Real>(
    g: &mut Graph<'m, T>,
    den: &Denoiser,
    st: &'m ModelState<T>,
    schedule: &NoiseSchedule<T>,
    z0_obj: NodeId,
    draw: &LossDraw<T>,
) -> NodeId {
    let eps = g.leaf(draw.hand_eps.clone());
    let zt_o = corrupt_node(g, schedule, z0_obj, draw.t_obj, &draw.noise_obj);
    let z_t = g.concat_rows(&[eps, zt_o]);
    let zhat = den.predict_clean(g, st, z_t, schedule.t_steps(), draw.t_obj);
    let zhat_o = g.slice_rows(zhat, HAND_TOKENS, OBJECT_TOKENS);
    g.mse(zhat_o, z0_obj)
}

/// Squared error between the offset field of the recovered grasp and the
/// ground-truth field. Decodes the predicted hand token to joints and the
/// predicted object tokens to points through the frozen codec.
pub fn loss_distance<'m, T: Real>(
    g: &mut Graph<'m, T>,
    den: &Denoiser,
    st: &'m ModelState<T>,
    codec: &'m CodecModel<T>,
    tpl: &HandTemplate,
    zhat: NodeId,
    field_gt: NodeId,
) -> Result<NodeId, GeomError> {
    let zhat_h = g.slice_rows(zhat, 0, HAND_TOKENS);
    let y_hat = den.decode_hand(g, st, zhat_h);
    let joints = fk_joints_node(g, tpl, y_hat);
    let zhat_o = g.slice_rows(zhat, HAND_TOKENS, OBJECT_TOKENS);
    let points_hat = codec.decode_node(g, zhat_o);
    let field_hat = distance_field_node(g, joints, points_hat, FIELD_NEIGHBORS)?;
    Ok(g.sum_sq_diff(field_hat, field_gt))
}

/// Squared error between predicted and ground-truth joint positions.
pub fn loss_hand_xyz<'m, T: Real>(
    g: &mut Graph<'m, T>,
    den: &Denoiser,
    st: &'m ModelState<T>,
    tpl: &HandTemplate,
    zhat: NodeId,
    joints_gt: NodeId,
) -> NodeId {
    let zhat_h = g.slice_rows(zhat, 0, HAND_TOKENS);
    let y_hat = den.decode_hand(g, st, zhat_h);
    let joints = fk_joints_node(g, tpl, y_hat);
    g.sum_sq_diff(joints, joints_gt)
}
