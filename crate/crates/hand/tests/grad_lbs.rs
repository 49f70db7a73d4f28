//! Central-difference checks for the kinematics graph ops: a scalar
//! function of the posed joints (and of the skinned vertices) must match
//! finite differences through the 51-value hand vector.

use graspgen_core::gradcheck::{grad_check, Eval};
use graspgen_core::graph::Graph;
use graspgen_core::state::ModelState;
use graspgen_core::tensor::Tensor;
use graspgen_hand::{fk_joints_node, lbs_vertices_node, HandTemplate, Y_H_DIM};

fn hand_state(seed: f64) -> ModelState<f64> {
    let mut st = ModelState::new(0);
    let data: Vec<f64> = (0..Y_H_DIM)
        .map(|i| {
            if i < 48 {
                ((i as f64 * 0.77 + seed).sin()) * 0.8
            } else {
                ((i as f64 * 0.31 + seed).cos()) * 0.1
            }
        })
        .collect();
    st.add_param("y_hand", Tensor::row_vec(data));
    st
}

fn ramp(rows: usize, cols: usize) -> Tensor<f64> {
    Tensor::from_vec(rows, cols, (0..rows * cols).map(|i| ((i % 13) as f64) * 0.3 - 1.7).collect())
}

#[test]
fn fk_joints_gradient_matches_central_differences() {
    let tpl = HandTemplate::standard();
    let mut st = hand_state(0.4);
    let err = grad_check(&mut st, 1e-5, 64, 3, |s| {
        let mut g = Graph::new();
        let y = g.param(s, 0);
        let joints = fk_joints_node(&mut g, &tpl, y);
        let w = g.leaf(ramp(16, 3));
        let obj = g.mul(joints, w);
        let m = g.mean_all(obj);
        g.backward(m);
        Eval { value: g.value(m).item(), grads: g.param_grads() }
    })
    .unwrap();
    assert!(err < 1e-4, "fk joints rel err {err}");
}

#[test]
fn lbs_vertices_gradient_matches_central_differences() {
    let tpl = HandTemplate::standard();
    let n_verts = tpl.rest_mesh.vertices.len();
    let mut st = hand_state(1.9);
    let err = grad_check(&mut st, 1e-5, 24, 5, |s| {
        let mut g = Graph::new();
        let y = g.param(s, 0);
        let verts = lbs_vertices_node(&mut g, &tpl, y);
        let w = g.leaf(ramp(n_verts, 3));
        let obj = g.mul(verts, w);
        let m = g.mean_all(obj);
        g.backward(m);
        Eval { value: g.value(m).item(), grads: g.param_grads() }
    })
    .unwrap();
    assert!(err < 1e-4, "lbs vertices rel err {err}");
}

#[test]
fn squared_joint_error_gradient_matches() {
    // The shape the losses actually use: sum of squared joint offsets.
    let tpl = HandTemplate::standard();
    let mut st = hand_state(2.6);
    let target = {
        let mut g = Graph::no_grad();
        let y = g.leaf(Tensor::row_vec(vec![0.05; Y_H_DIM]));
        let j = fk_joints_node(&mut g, &tpl, y);
        g.value(j).clone()
    };
    let err = grad_check(&mut st, 1e-5, 64, 7, |s| {
        let mut g = Graph::new();
        let y = g.param(s, 0);
        let joints = fk_joints_node(&mut g, &tpl, y);
        let t = g.leaf(target.clone());
        let loss = g.sum_sq_diff(joints, t);
        g.backward(loss);
        Eval { value: g.value(loss).item(), grads: g.param_grads() }
    })
    .unwrap();
    assert!(err < 1e-4, "joint loss rel err {err}");
}
