//! Joint-to-surface offset fields and differentiable wrappers for the field
//! and for Chamfer distance.
//!
//! The field row for a joint concatenates the offset vectors (point minus
//! joint) to its k nearest cloud points, ascending by distance. Gradients
//! flow through the vector values; the nearest-index selection is treated as
//! constant.

use crate::cloud::PointCloud;
use crate::error::GeomError;
use crate::knn::knn;
use crate::vec3::dist_sq;
use graspgen_core::graph::{CustomOp, Graph, NodeId};
use graspgen_core::{real, Real, Tensor};

/// Joints per hand and neighbors per joint for the model-facing field.
pub const FIELD_JOINTS: usize = 16;
pub const FIELD_NEIGHBORS: usize = 10;

/// Offset field value and the chosen point indices, `[J, 3k]`.
pub fn distance_field<T: Real>(
    joints: &[[T; 3]],
    cloud: &PointCloud<T>,
    k: usize,
) -> Result<(Tensor<T>, Vec<Vec<usize>>), GeomError> {
    if cloud.len() < k {
        return Err(GeomError::TooFewPoints { n: cloud.len(), need: k });
    }
    let mut values = Tensor::zeros(joints.len(), 3 * k);
    let mut indices = Vec::with_capacity(joints.len());
    for (j, &joint) in joints.iter().enumerate() {
        let ids = knn(joint, cloud, k)?;
        let row = values.row_mut(j);
        for (slot, &pi) in ids.iter().enumerate() {
            let p = cloud.points[pi];
            row[slot * 3] = p[0] - joint[0];
            row[slot * 3 + 1] = p[1] - joint[1];
            row[slot * 3 + 2] = p[2] - joint[2];
        }
        indices.push(ids);
    }
    Ok((values, indices))
}

struct DistanceFieldOp {
    indices: Vec<Vec<usize>>,
    k: usize,
}

impl<T: Real> CustomOp<T> for DistanceFieldOp {
    fn name(&self) -> &'static str {
        "distance_field"
    }

    fn backward(&self, grad_out: &Tensor<T>, inputs: &[&Tensor<T>]) -> Vec<Tensor<T>> {
        let joints = inputs[0];
        let points = inputs[1];
        let mut d_joints = Tensor::zeros(joints.rows(), 3);
        let mut d_points = Tensor::zeros(points.rows(), 3);
        for (j, ids) in self.indices.iter().enumerate() {
            for (slot, &pi) in ids.iter().enumerate().take(self.k) {
                for a in 0..3 {
                    let g = grad_out.at(j, slot * 3 + a);
                    *d_points.at_mut(pi, a) += g;
                    *d_joints.at_mut(j, a) -= g;
                }
            }
        }
        vec![d_joints, d_points]
    }
}

/// Graph node for the offset field: inputs are joints `[J, 3]` and points
/// `[N, 3]`, output `[J, 3k]`.
pub fn distance_field_node<T: Real>(
    g: &mut Graph<T>,
    joints: NodeId,
    points: NodeId,
    k: usize,
) -> Result<NodeId, GeomError> {
    let jt = g.value(joints);
    assert_eq!(jt.cols(), 3, "joints must be J x 3, got {:?}", jt.shape());
    let joint_list: Vec<[T; 3]> = (0..jt.rows()).map(|i| [jt.at(i, 0), jt.at(i, 1), jt.at(i, 2)]).collect();
    let cloud = PointCloud::from_tensor(g.value(points));
    let (value, indices) = distance_field(&joint_list, &cloud, k)?;
    Ok(g.custom(&[joints, points], value, Box::new(DistanceFieldOp { indices, k })))
}

struct ChamferOp {
    a_to_b: Vec<usize>,
    b_to_a: Vec<usize>,
}

impl<T: Real> CustomOp<T> for ChamferOp {
    fn name(&self) -> &'static str {
        "chamfer"
    }

    fn backward(&self, grad_out: &Tensor<T>, inputs: &[&Tensor<T>]) -> Vec<Tensor<T>> {
        let a = inputs[0];
        let b = inputs[1];
        let go = grad_out.item();
        let two = real::<T>(2.0);
        let na = real::<T>(a.rows() as f64);
        let nb = real::<T>(b.rows() as f64);
        let mut da = Tensor::zeros(a.rows(), 3);
        let mut db = Tensor::zeros(b.rows(), 3);
        for (i, &j) in self.a_to_b.iter().enumerate() {
            for c in 0..3 {
                let g = go * two * (a.at(i, c) - b.at(j, c)) / na;
                *da.at_mut(i, c) += g;
                *db.at_mut(j, c) -= g;
            }
        }
        for (j, &i) in self.b_to_a.iter().enumerate() {
            for c in 0..3 {
                let g = go * two * (b.at(j, c) - a.at(i, c)) / nb;
                *db.at_mut(j, c) += g;
                *da.at_mut(i, c) -= g;
            }
        }
        vec![da, db]
    }
}

/// Differentiable symmetric Chamfer distance between `[N, 3]` point tensors.
pub fn chamfer_node<T: Real>(g: &mut Graph<T>, a: NodeId, b: NodeId) -> Result<NodeId, GeomError> {
    let at = g.value(a);
    let bt = g.value(b);
    if at.rows() == 0 || bt.rows() == 0 {
        return Err(GeomError::EmptyCloud);
    }
    let (d_ab, a_to_b) = directed(at, bt);
    let (d_ba, b_to_a) = directed(bt, at);
    let value = Tensor::scalar(d_ab + d_ba);
    Ok(g.custom(&[a, b], value, Box::new(ChamferOp { a_to_b, b_to_a })))
}

fn directed<T: Real>(from: &Tensor<T>, to: &Tensor<T>) -> (T, Vec<usize>) {
    let mut acc = T::zero();
    let mut idx = Vec::with_capacity(from.rows());
    for i in 0..from.rows() {
        let p = [from.at(i, 0), from.at(i, 1), from.at(i, 2)];
        let mut best = T::infinity();
        let mut bj = 0usize;
        for j in 0..to.rows() {
            let q = [to.at(j, 0), to.at(j, 1), to.at(j, 2)];
            let d = dist_sq(p, q);
            if d < best {
                best = d;
                bj = j;
            }
        }
        acc += best;
        idx.push(bj);
    }
    (acc / real(from.rows() as f64), idx)
}
