//! Differentiable graph ops over the kinematics: gradients continue from
//! joint positions (or skinned vertices) back into the 51-value hand vector
//! through an exact dual-number Jacobian.

use crate::fk::joints_and_jacobian;
use crate::lbs::lbs_vertices_and_jacobian;
use crate::skeleton::Y_H_DIM;
use crate::template::HandTemplate;
use graspgen_core::graph::{CustomOp, Graph, NodeId};
use graspgen_core::tensor::matmul;
use graspgen_core::{Real, Tensor};

struct JacobianOp<T> {
    name: &'static str,
    jac: Option<Tensor<T>>,
}

impl<T: Real> CustomOp<T> for JacobianOp<T> {
    fn name(&self) -> &'static str {
        self.name
    }

    fn backward(&self, grad_out: &Tensor<T>, inputs: &[&Tensor<T>]) -> Vec<Tensor<T>> {
        let jac = self.jac.as_ref().expect("jacobian cached on a grad-enabled graph");
        let flat = grad_out.reshaped(1, grad_out.numel());
        let dy = matmul(&flat, jac, false, false);
        let y = inputs[0];
        vec![dy.reshaped(y.rows(), y.cols())]
    }
}

/// Joint positions `[16, 3]` from a hand vector node (`1 x 51`).
pub fn fk_joints_node<T: Real>(g: &mut Graph<T>, tpl: &HandTemplate, y: NodeId) -> NodeId {
    let yv = g.value(y);
    assert_eq!(yv.numel(), Y_H_DIM, "hand vector node must be 1 x 51, got {:?}", yv.shape());
    let (joints, jac) = joints_and_jacobian(&tpl.skeleton, yv, g.grad_enabled());
    g.custom(&[y], joints, Box::new(JacobianOp { name: "fk_joints", jac }))
}

/// Skinned vertex positions `[V, 3]` from a hand vector node.
pub fn lbs_vertices_node<T: Real>(g: &mut Graph<T>, tpl: &HandTemplate, y: NodeId) -> NodeId {
    let yv = g.value(y);
    assert_eq!(yv.numel(), Y_H_DIM, "hand vector node must be 1 x 51, got {:?}", yv.shape());
    let (verts, jac) = lbs_vertices_and_jacobian(tpl, yv, g.grad_enabled());
    g.custom(&[y], verts, Box::new(JacobianOp { name: "lbs_vertices", jac }))
}
