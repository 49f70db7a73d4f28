//! Network building blocks. Each struct holds parameter indices into a
//! [`ModelState`] and builds its forward pass on a [`Graph`].

use crate::graph::{Graph, NodeId};
use crate::rng::uniform_tensor;
use crate::scalar::{real, Real};
use crate::state::ModelState;
use crate::tensor::Tensor;
use rand_chacha::ChaCha8Rng;

pub const LAYER_NORM_EPS: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Gelu,
    None,
}

fn apply_act<T: Real>(g: &mut Graph<T>, x: NodeId, act: Activation) -> NodeId {
    match act {
        Activation::Relu => g.relu(x),
        Activation::Gelu => g.gelu(x),
        Activation::None => x,
    }
}

/// Dense layer `x @ W + b`. Weights init uniform in +-sqrt(1/fan_in).
#[derive(Clone, Debug)]
pub struct Linear {
    pub w: usize,
    pub b: usize,
}

impl Linear {
    pub fn init<T: Real>(
        st: &mut ModelState<T>,
        rng: &mut ChaCha8Rng,
        name: &str,
        d_in: usize,
        d_out: usize,
    ) -> Self {
        let bound = (1.0 / d_in as f64).sqrt();
        let w = st.add_param(&format!("{name}.w"), uniform_tensor(d_in, d_out, -bound, bound, rng));
        let b = st.add_param(&format!("{name}.b"), Tensor::zeros(1, d_out));
        Self { w, b }
    }

    pub fn forward<'m, T: Real>(
        &self,
        g: &mut Graph<'m, T>,
        st: &'m ModelState<T>,
        x: NodeId,
    ) -> NodeId {
        let w = g.param(st, self.w);
        let b = g.param(st, self.b);
        let h = g.matmul(x, w);
        g.add_row(h, b)
    }

    /// Forward pass with the weights entering as constants: no gradient is
    /// ever attributed to them (frozen-module path).
    pub fn forward_frozen<'m, T: Real>(
        &self,
        g: &mut Graph<'m, T>,
        st: &'m ModelState<T>,
        x: NodeId,
    ) -> NodeId {
        let w = g.shared(st.value(self.w));
        let b = g.shared(st.value(self.b));
        let h = g.matmul(x, w);
        g.add_row(h, b)
    }
}

/// Learnable layer norm over the last axis.
#[derive(Clone, Debug)]
pub struct LayerNorm {
    pub gamma: usize,
    pub beta: usize,
}

impl LayerNorm {
    pub fn init<T: Real>(st: &mut ModelState<T>, name: &str, dim: usize) -> Self {
        let gamma = st.add_param(&format!("{name}.gamma"), Tensor::filled(1, dim, T::one()));
        let beta = st.add_param(&format!("{name}.beta"), Tensor::zeros(1, dim));
        Self { gamma, beta }
    }

    pub fn forward<'m, T: Real>(
        &self,
        g: &mut Graph<'m, T>,
        st: &'m ModelState<T>,
        x: NodeId,
    ) -> NodeId {
        let gamma = g.param(st, self.gamma);
        let beta = g.param(st, self.beta);
        g.layer_norm(x, Some(gamma), Some(beta), real(LAYER_NORM_EPS))
    }
}

/// Norm without learnable terms; used to pin latent token scale.
pub fn plain_layer_norm<T: Real>(g: &mut Graph<T>, x: NodeId) -> NodeId {
    g.layer_norm(x, None, None, real(LAYER_NORM_EPS))
}

/// Two dense layers with an activation in between.
#[derive(Clone, Debug)]
pub struct Mlp2 {
    pub fc1: Linear,
    pub fc2: Linear,
    pub act: Activation,
}

impl Mlp2 {
    pub fn init<T: Real>(
        st: &mut ModelState<T>,
        rng: &mut ChaCha8Rng,
        name: &str,
        d_in: usize,
        d_hidden: usize,
        d_out: usize,
        act: Activation,
    ) -> Self {
        Self {
            fc1: Linear::init(st, rng, &format!("{name}.fc1"), d_in, d_hidden),
            fc2: Linear::init(st, rng, &format!("{name}.fc2"), d_hidden, d_out),
            act,
        }
    }

    pub fn forward<'m, T: Real>(
        &self,
        g: &mut Graph<'m, T>,
        st: &'m ModelState<T>,
        x: NodeId,
    ) -> NodeId {
        let h = self.fc1.forward(g, st, x);
        let h = apply_act(g, h, self.act);
        self.fc2.forward(g, st, h)
    }
}

/// Full (unmasked) multi-head self-attention over a `[tokens, width]` block.
#[derive(Clone, Debug)]
pub struct SelfAttention {
    pub wq: Linear,
    pub wk: Linear,
    pub wv: Linear,
    pub wo: Linear,
    pub n_heads: usize,
    pub width: usize,
}

impl SelfAttention {
    pub fn init<T: Real>(
        st: &mut ModelState<T>,
        rng: &mut ChaCha8Rng,
        name: &str,
        width: usize,
        n_heads: usize,
    ) -> Self {
        assert_eq!(width % n_heads, 0, "attention width {width} not divisible by {n_heads} heads");
        Self {
            wq: Linear::init(st, rng, &format!("{name}.wq"), width, width),
            wk: Linear::init(st, rng, &format!("{name}.wk"), width, width),
            wv: Linear::init(st, rng, &format!("{name}.wv"), width, width),
            wo: Linear::init(st, rng, &format!("{name}.wo"), width, width),
            n_heads,
            width,
        }
    }

    pub fn forward<'m, T: Real>(
        &self,
        g: &mut Graph<'m, T>,
        st: &'m ModelState<T>,
        x: NodeId,
    ) -> NodeId {
        let dh = self.width / self.n_heads;
        let q = self.wq.forward(g, st, x);
        let k = self.wk.forward(g, st, x);
        let v = self.wv.forward(g, st, x);
        let scale = real::<T>(1.0 / (dh as f64).sqrt());
        let mut heads = Vec::with_capacity(self.n_heads);
        for h in 0..self.n_heads {
            let qh = g.slice_cols(q, h * dh, dh);
            let kh = g.slice_cols(k, h * dh, dh);
            let vh = g.slice_cols(v, h * dh, dh);
            let scores = g.matmul_nt(qh, kh);
            let scores = g.scale(scores, scale);
            let att = g.softmax_rows(scores);
            heads.push(g.matmul(att, vh));
        }
        let cat = g.concat_cols(&heads);
        self.wo.forward(g, st, cat)
    }
}

/// Pre-norm transformer encoder block.
#[derive(Clone, Debug)]
pub struct TransformerBlock {
    pub ln1: LayerNorm,
    pub attn: SelfAttention,
    pub ln2: LayerNorm,
    pub ff: Mlp2,
}

impl TransformerBlock {
    pub fn init<T: Real>(
        st: &mut ModelState<T>,
        rng: &mut ChaCha8Rng,
        name: &str,
        width: usize,
        n_heads: usize,
        d_ff: usize,
    ) -> Self {
        Self {
            ln1: LayerNorm::init(st, &format!("{name}.ln1"), width),
            attn: SelfAttention::init(st, rng, &format!("{name}.attn"), width, n_heads),
            ln2: LayerNorm::init(st, &format!("{name}.ln2"), width),
            ff: Mlp2::init(st, rng, &format!("{name}.ff"), width, d_ff, width, Activation::Gelu),
        }
    }

    pub fn forward<'m, T: Real>(
        &self,
        g: &mut Graph<'m, T>,
        st: &'m ModelState<T>,
        x: NodeId,
    ) -> NodeId {
        let n1 = self.ln1.forward(g, st, x);
        let a = self.attn.forward(g, st, n1);
        let x = g.add(x, a);
        let n2 = self.ln2.forward(g, st, x);
        let f = self.ff.forward(g, st, n2);
        g.add(x, f)
    }
}

/// Encoder-only transformer stack with a final norm.
#[derive(Clone, Debug)]
pub struct TransformerEncoder {
    pub blocks: Vec<TransformerBlock>,
    pub final_ln: LayerNorm,
}

impl TransformerEncoder {
    pub fn init<T: Real>(
        st: &mut ModelState<T>,
        rng: &mut ChaCha8Rng,
        name: &str,
        width: usize,
        n_heads: usize,
        d_ff: usize,
        n_layers: usize,
    ) -> Self {
        let blocks = (0..n_layers)
            .map(|i| TransformerBlock::init(st, rng, &format!("{name}.block{i}"), width, n_heads, d_ff))
            .collect();
        Self { blocks, final_ln: LayerNorm::init(st, &format!("{name}.final_ln"), width) }
    }

    pub fn forward<'m, T: Real>(
        &self,
        g: &mut Graph<'m, T>,
        st: &'m ModelState<T>,
        mut x: NodeId,
    ) -> NodeId {
        for b in &self.blocks {
            x = b.forward(g, st, x);
        }
        self.final_ln.forward(g, st, x)
    }
}

/// Sinusoidal embedding of an integer timestep, `1 x dim`. Constant with
/// respect to every trainable input, so it enters the graph as a leaf.
pub fn sinusoidal_embedding<T: Real>(t: usize, dim: usize) -> Tensor<T> {
    assert!(dim % 2 == 0, "sinusoidal embedding dim {dim} must be even");
    let half = dim / 2;
    let mut data = Vec::with_capacity(dim);
    let max_period = 10_000.0f64;
    for i in 0..half {
        let freq = (-(i as f64) * max_period.ln() / half as f64).exp();
        data.push(real::<T>((t as f64 * freq).sin()));
    }
    for i in 0..half {
        let freq = (-(i as f64) * max_period.ln() / half as f64).exp();
        data.push(real::<T>((t as f64 * freq).cos()));
    }
    Tensor::row_vec(data)
}
