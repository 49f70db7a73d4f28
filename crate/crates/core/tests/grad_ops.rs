//! Central-difference checks for every registered graph op, in f64.
//!
//! Each case wires the op into a scalar objective whose inputs are model
//! parameters, computes analytic gradients with one backward pass and
//! compares against central differences at every parameter entry.

use graspgen_core::gradcheck::{grad_check, Eval};
use graspgen_core::graph::Graph;
use graspgen_core::nn::{
    sinusoidal_embedding, Activation, Mlp2, SelfAttention, TransformerBlock,
};
use graspgen_core::rng::{derive_rng, normal_tensor};
use graspgen_core::state::ModelState;
use graspgen_core::tensor::Tensor;

const TOL: f64 = 1e-4;
const EPS: f64 = 1e-5;

fn state_with(shapes: &[(usize, usize)], seed: u64) -> ModelState<f64> {
    let mut rng = derive_rng(seed, &[77]);
    let mut st = ModelState::new(seed);
    for (i, &(r, c)) in shapes.iter().enumerate() {
        st.add_param(&format!("p{i}"), normal_tensor(r, c, &mut rng));
    }
    st
}

fn check<F>(mut st: ModelState<f64>, f: F) -> f64
where
    F: FnMut(&ModelState<f64>) -> Eval,
{
    grad_check(&mut st, EPS, 64, 9, f).expect("grad_check")
}

fn run_scalar<'m>(g: &mut Graph<'m, f64>, out: usize) -> Eval {
    g.backward(out);
    Eval { value: g.value(out).item(), grads: g.param_grads() }
}

#[test]
fn matmul_all_transpose_variants() {
    for &(ta, tb) in &[(false, false), (false, true), (true, false), (true, true)] {
        // Effective product is always [3,5] @ [5,4]; operands stored
        // transposed according to the flags.
        let (sa, sb) = match (ta, tb) {
            (false, false) => ((3, 5), (5, 4)),
            (false, true) => ((3, 5), (4, 5)),
            (true, false) => ((5, 3), (5, 4)),
            (true, true) => ((5, 3), (4, 5)),
        };
        let st = state_with(&[sa, sb], 1);
        let err = check(st, |s| {
            let mut g = Graph::new();
            let a = g.param(s, 0);
            let b = g.param(s, 1);
            let c = g.matmul_t(a, b, ta, tb);
            let m = g.mean_all(c);
            run_scalar(&mut g, m)
        });
        assert!(err < TOL, "matmul ta={ta} tb={tb}: rel err {err}");
    }
}

#[test]
fn elementwise_add_sub_mul_scale() {
    let st = state_with(&[(2, 3), (2, 3)], 2);
    let err = check(st, |s| {
        let mut g = Graph::new();
        let a = g.param(s, 0);
        let b = g.param(s, 1);
        let x = g.add(a, b);
        let y = g.sub(x, b);
        let z = g.mul(y, b);
        let w = g.scale(z, -1.7);
        let m = g.mean_all(w);
        run_scalar(&mut g, m)
    });
    assert!(err < TOL, "rel err {err}");
}

#[test]
fn add_row_broadcast() {
    let st = state_with(&[(4, 3), (1, 3)], 3);
    let err = check(st, |s| {
        let mut g = Graph::new();
        let a = g.param(s, 0);
        let r = g.param(s, 1);
        let x = g.add_row(a, r);
        let m = g.mean_all(x);
        run_scalar(&mut g, m)
    });
    assert!(err < TOL, "rel err {err}");
}

#[test]
fn relu_away_from_kink() {
    // Shift inputs away from zero so the finite difference never straddles
    // the kink.
    let mut st = state_with(&[(3, 4)], 4);
    for v in st.value_mut(0).data_mut() {
        if v.abs() < 0.05 {
            *v += 0.2;
        }
    }
    let err = check(st, |s| {
        let mut g = Graph::new();
        let a = g.param(s, 0);
        let x = g.relu(a);
        let m = g.mean_all(x);
        run_scalar(&mut g, m)
    });
    assert!(err < TOL, "rel err {err}");
}

#[test]
fn gelu_everywhere() {
    let st = state_with(&[(3, 4)], 5);
    let err = check(st, |s| {
        let mut g = Graph::new();
        let a = g.param(s, 0);
        let x = g.gelu(a);
        let m = g.mean_all(x);
        run_scalar(&mut g, m)
    });
    assert!(err < TOL, "rel err {err}");
}

#[test]
fn layer_norm_with_affine() {
    let st = state_with(&[(3, 6), (1, 6), (1, 6)], 6);
    let err = check(st, |s| {
        let mut g = Graph::new();
        let x = g.param(s, 0);
        let gamma = g.param(s, 1);
        let beta = g.param(s, 2);
        let y = g.layer_norm(x, Some(gamma), Some(beta), 1e-5);
        // Break the symmetry that makes d(mean)/dx vanish for layer norm.
        let w = g.leaf(weights(3, 6));
        let z = g.mul(y, w);
        let m = g.mean_all(z);
        run_scalar(&mut g, m)
    });
    assert!(err < TOL, "rel err {err}");
}

#[test]
fn softmax_rows_grad() {
    let st = state_with(&[(3, 5)], 7);
    let err = check(st, |s| {
        let mut g = Graph::new();
        let x = g.param(s, 0);
        let y = g.softmax_rows(x);
        let w = g.leaf(weights(3, 5));
        let z = g.mul(y, w);
        let m = g.mean_all(z);
        run_scalar(&mut g, m)
    });
    assert!(err < TOL, "rel err {err}");
}

#[test]
fn maxpool_rows_away_from_ties() {
    let mut st = state_with(&[(6, 4)], 8);
    // Spread values so no column has a near-tie.
    for (i, v) in st.value_mut(0).data_mut().iter_mut().enumerate() {
        *v += (i % 6) as f64 * 0.37;
    }
    let err = check(st, |s| {
        let mut g = Graph::new();
        let x = g.param(s, 0);
        let y = g.maxpool_rows(x);
        let m = g.mean_all(y);
        run_scalar(&mut g, m)
    });
    assert!(err < TOL, "rel err {err}");
}

#[test]
fn mse_and_sum_sq_diff() {
    let st = state_with(&[(2, 5), (2, 5)], 9);
    let err = check(st, |s| {
        let mut g = Graph::new();
        let a = g.param(s, 0);
        let b = g.param(s, 1);
        let l1 = g.mse(a, b);
        let l2 = g.sum_sq_diff(a, b);
        let tot = g.add(l1, l2);
        run_scalar(&mut g, tot)
    });
    assert!(err < TOL, "rel err {err}");
}

#[test]
fn concat_and_slice_rows_cols_reshape() {
    let st = state_with(&[(2, 4), (3, 4)], 10);
    let err = check(st, |s| {
        let mut g = Graph::new();
        let a = g.param(s, 0);
        let b = g.param(s, 1);
        let cat = g.concat_rows(&[a, b]);
        let sl = g.slice_rows(cat, 1, 3);
        let c1 = g.slice_cols(sl, 0, 2);
        let c2 = g.slice_cols(sl, 2, 2);
        let cc = g.concat_cols(&[c2, c1]);
        let rs = g.reshape(cc, 2, 6);
        let w = g.leaf(weights(2, 6));
        let z = g.mul(rs, w);
        let m = g.mean_all(z);
        run_scalar(&mut g, m)
    });
    assert!(err < TOL, "rel err {err}");
}

#[test]
fn lin_comb_matches_difference_quotient() {
    let st = state_with(&[(2, 3), (2, 3)], 11);
    let err = check(st, |s| {
        let mut g = Graph::new();
        let a = g.param(s, 0);
        let b = g.param(s, 1);
        let y = g.lin_comb(a, 0.8, b, -0.3);
        let m = g.mean_all(y);
        run_scalar(&mut g, m)
    });
    assert!(err < TOL, "rel err {err}");
}

#[test]
fn two_layer_mlp_mse_objective() {
    // f = MSE of a 2-layer MLP on random input.
    let mut rng = derive_rng(21, &[0]);
    let mut st = ModelState::new(21);
    let mlp = Mlp2::init(&mut st, &mut rng, "mlp", 6, 16, 4, Activation::Relu);
    let x = normal_tensor::<f64>(3, 6, &mut rng);
    let target = normal_tensor::<f64>(3, 4, &mut rng);
    let err = check(st, |s| {
        let mut g = Graph::new();
        let xin = g.leaf(x.clone());
        let y = mlp.forward(&mut g, s, xin);
        let t = g.leaf(target.clone());
        let loss = g.mse(y, t);
        run_scalar(&mut g, loss)
    });
    assert!(err < TOL, "rel err {err}");
}

#[test]
fn self_attention_block_objective() {
    let mut rng = derive_rng(22, &[0]);
    let mut st = ModelState::new(22);
    let attn = SelfAttention::init(&mut st, &mut rng, "attn", 16, 4);
    let x = normal_tensor::<f64>(5, 16, &mut rng);
    let err = check(st, |s| {
        let mut g = Graph::new();
        let xin = g.leaf(x.clone());
        let y = attn.forward(&mut g, s, xin);
        let w = g.leaf(weights(5, 16));
        let z = g.mul(y, w);
        let m = g.mean_all(z);
        run_scalar(&mut g, m)
    });
    assert!(err < TOL, "rel err {err}");
}

#[test]
fn transformer_encoder_block_objective() {
    // f = weighted mean of one transformer encoder block output.
    let mut rng = derive_rng(23, &[0]);
    let mut st = ModelState::new(23);
    let block = TransformerBlock::init(&mut st, &mut rng, "blk", 32, 4, 64);
    let x = normal_tensor::<f64>(5, 32, &mut rng);
    let err = check(st, |s| {
        let mut g = Graph::new();
        let xin = g.leaf(x.clone());
        let y = block.forward(&mut g, s, xin);
        let w = g.leaf(weights(5, 32));
        let z = g.mul(y, w);
        let m = g.mean_all(z);
        run_scalar(&mut g, m)
    });
    assert!(err < TOL, "rel err {err}");
}

#[test]
fn time_embedding_mlp_pathway() {
    // The sinusoidal embedding itself is a constant; the MLP on top of it is
    // the differentiable part.
    let mut rng = derive_rng(24, &[0]);
    let mut st = ModelState::new(24);
    let mlp = Mlp2::init(&mut st, &mut rng, "time", 8, 16, 8, Activation::Gelu);
    let emb = sinusoidal_embedding::<f64>(417, 8);
    let err = check(st, |s| {
        let mut g = Graph::new();
        let e = g.leaf(emb.clone());
        let y = mlp.forward(&mut g, s, e);
        let m = g.mean_all(y);
        run_scalar(&mut g, m)
    });
    assert!(err < TOL, "rel err {err}");
}

/// Deterministic non-uniform weights so mean-style objectives do not hide
/// gradient errors behind symmetry.
fn weights(r: usize, c: usize) -> Tensor<f64> {
    let data = (0..r * c).map(|i| ((i * 7 + 3) % 11) as f64 * 0.2 - 1.0).collect();
    Tensor::from_vec(r, c, data)
}
