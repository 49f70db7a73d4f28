//! The joint denoiser: hand tokenizer/detokenizer MLPs, two independent
//! timestep embeddings (one per modality), and an encoder-only transformer
//! over five content tokens plus two time tokens. The network predicts the
//! clean latent directly.

use crate::latent::{HAND_TOKENS, OBJECT_TOKENS, TOTAL_TOKENS};
use graspgen_core::graph::{Graph, NodeId};
use graspgen_core::nn::{
    plain_layer_norm, sinusoidal_embedding, Activation, Mlp2, TransformerEncoder,
};
use graspgen_core::rng::{derive_rng, uniform_tensor};
use graspgen_core::{ModelState, Real};
use graspgen_hand::Y_H_DIM;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct DenoiserConfig {
    pub latent_width: usize,
    pub n_heads: usize,
    pub n_layers: usize,
    pub d_ff: usize,
    pub tokenizer_hidden: usize,
    pub time_sin_dim: usize,
}

impl Default for DenoiserConfig {
    fn default() -> Self {
        Self {
            latent_width: 512,
            n_heads: 8,
            n_layers: 4,
            d_ff: 1024,
            tokenizer_hidden: 1024,
            time_sin_dim: 128,
        }
    }
}

impl DenoiserConfig {
    pub fn tiny() -> Self {
        Self {
            latent_width: 32,
            n_heads: 4,
            n_layers: 1,
            d_ff: 64,
            tokenizer_hidden: 64,
            time_sin_dim: 16,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Denoiser {
    pub config: DenoiserConfig,
    hand_enc: Mlp2,
    hand_dec: Mlp2,
    time_hand: Mlp2,
    time_obj: Mlp2,
    pos_embed: usize,
    encoder: TransformerEncoder,
}

impl Denoiser {
    /// Registers all parameters into `state`.
    pub fn init<T: Real>(state: &mut ModelState<T>, config: DenoiserConfig, seed: u64) -> Self {
        let mut rng = derive_rng(seed, &[0xde0]);
        let c = config.latent_width;
        let hand_enc = Mlp2::init(
            state,
            &mut rng,
            "den.hand_enc",
            Y_H_DIM,
            config.tokenizer_hidden,
            c,
            Activation::Gelu,
        );
        let hand_dec = Mlp2::init(
            state,
            &mut rng,
            "den.hand_dec",
            c,
            config.tokenizer_hidden,
            Y_H_DIM,
            Activation::Gelu,
        );
        let time_hand = Mlp2::init(
            state,
            &mut rng,
            "den.time_hand",
            config.time_sin_dim,
            config.tokenizer_hidden,
            c,
            Activation::Gelu,
        );
        let time_obj = Mlp2::init(
            state,
            &mut rng,
            "den.time_obj",
            config.time_sin_dim,
            config.tokenizer_hidden,
            c,
            Activation::Gelu,
        );
        let pos_embed = state.add_param(
            "den.pos_embed",
            uniform_tensor(TOTAL_TOKENS + 2, c, -0.02, 0.02, &mut rng),
        );
        let encoder = TransformerEncoder::init(
            state,
            &mut rng,
            "den.encoder",
            c,
            config.n_heads,
            config.d_ff,
            config.n_layers,
        );
        Self { config, hand_enc, hand_dec, time_hand, time_obj, pos_embed, encoder }
    }

    /// Hand vector `[1, 51]` to a unit-scale hand token `[1, C]`.
    pub fn encode_hand<'m, T: Real>(
        &self,
        g: &mut Graph<'m, T>,
        st: &'m ModelState<T>,
        y: NodeId,
    ) -> NodeId {
        let h = self.hand_enc.forward(g, st, y);
        plain_layer_norm(g, h)
    }

    /// Hand token `[1, C]` back to a hand vector `[1, 51]`.
    pub fn decode_hand<'m, T: Real>(
        &self,
        g: &mut Graph<'m, T>,
        st: &'m ModelState<T>,
        token: NodeId,
    ) -> NodeId {
        self.hand_dec.forward(g, st, token)
    }

    /// Predicts the clean latent from a corrupted one under the two clocks.
    /// Each modality's time embedding is added to its own tokens and both
    /// embeddings also join the sequence as extra tokens.
    pub fn predict_clean<'m, T: Real>(
        &self,
        g: &mut Graph<'m, T>,
        st: &'m ModelState<T>,
        z: NodeId,
        t_hand: usize,
        t_obj: usize,
    ) -> NodeId {
        let c = self.config.latent_width;
        let zv = g.value(z);
        assert_eq!(
            zv.shape(),
            [TOTAL_TOKENS, c],
            "denoiser expects [{TOTAL_TOKENS}, {c}], got {:?}",
            zv.shape()
        );
        let sin_h = g.leaf(sinusoidal_embedding(t_hand, self.config.time_sin_dim));
        let sin_o = g.leaf(sinusoidal_embedding(t_obj, self.config.time_sin_dim));
        let emb_h = self.time_hand.forward(g, st, sin_h);
        let emb_o = self.time_obj.forward(g, st, sin_o);

        let hand = g.slice_rows(z, 0, HAND_TOKENS);
        let hand = g.add(hand, emb_h);
        let obj = g.slice_rows(z, HAND_TOKENS, OBJECT_TOKENS);
        let obj = g.add_row(obj, emb_o);
        let tokens = g.concat_rows(&[hand, obj, emb_h, emb_o]);
        let pos = g.param(st, self.pos_embed);
        let tokens = g.add(tokens, pos);
        let out = self.encoder.forward(g, st, tokens);
        g.slice_rows(out, 0, TOTAL_TOKENS)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use graspgen_core::rng::normal_tensor;
    use graspgen_core::Tensor;

    fn setup() -> (ModelState<f64>, Denoiser) {
        let mut st = ModelState::new(5);
        let den = Denoiser::init(&mut st, DenoiserConfig::tiny(), 5);
        (st, den)
    }

    #[test]
    fn untrained_output_is_finite_with_latent_shape() {
        let (st, den) = setup();
        let mut rng = derive_rng(1, &[2]);
        let z = normal_tensor::<f64>(5, 32, &mut rng);
        let mut g = Graph::no_grad();
        let zn = g.leaf(z);
        let out = den.predict_clean(&mut g, &st, zn, 100, 700);
        assert_eq!(g.value(out).shape(), [5, 32]);
        assert!(g.value(out).is_finite());
    }

    #[test]
    fn object_clock_changes_the_output() {
        let (st, den) = setup();
        let mut rng = derive_rng(1, &[3]);
        let z = normal_tensor::<f64>(5, 32, &mut rng);
        let run = |t_obj: usize| {
            let mut g = Graph::no_grad();
            let zn = g.leaf(z.clone());
            let out = den.predict_clean(&mut g, &st, zn, 50, t_obj);
            g.value(out).clone()
        };
        assert_ne!(run(10), run(900), "time conditioning must be live");
    }

    #[test]
    fn hand_round_trip_shapes() {
        let (st, den) = setup();
        let mut g = Graph::no_grad();
        let y = g.leaf(Tensor::<f64>::zeros(1, Y_H_DIM));
        let tok = den.encode_hand(&mut g, &st, y);
        assert_eq!(g.value(tok).shape(), [1, 32]);
        let back = den.decode_hand(&mut g, &st, tok);
        assert_eq!(g.value(back).shape(), [1, Y_H_DIM]);
    }
}
