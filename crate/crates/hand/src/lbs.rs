//! Linear blend skinning: pose the capsule mesh and joints from hand
//! parameters. Generic over [`FkScalar`], so duals give exact Jacobians.

use crate::fk::{forward_kinematics, Dual, FkResult, FkScalar};
use crate::skeleton::{HandParams, N_FINGERS, N_JOINTS, THETA_DIM, Y_H_DIM};
use crate::template::HandTemplate;
use graspgen_core::{real, Real, Tensor};
use graspgen_geometry::TriMesh;

/// Skinned hand mesh: posed vertices with the template topology and
/// per-vertex joint weights.
#[derive(Clone, Debug)]
pub struct HandMesh<T> {
    pub mesh: TriMesh<T>,
    pub skin_weights: Vec<[T; N_JOINTS]>,
}

fn split_params<S: FkScalar, T: Real>(params: &HandParams<T>) -> ([S; THETA_DIM], [S; 3]) {
    let mut theta = [S::constant(0.0); THETA_DIM];
    for (o, v) in theta.iter_mut().zip(&params.theta) {
        *o = S::constant(v.to_f64().unwrap());
    }
    let trans = [
        S::constant(params.trans[0].to_f64().unwrap()),
        S::constant(params.trans[1].to_f64().unwrap()),
        S::constant(params.trans[2].to_f64().unwrap()),
    ];
    (theta, trans)
}

fn skin_vertices<S: FkScalar>(tpl: &HandTemplate, fk: &FkResult<S>) -> Vec<[S; 3]> {
    let mut out = Vec::with_capacity(tpl.rest_mesh.vertices.len());
    for (v, w) in tpl.rest_mesh.vertices.iter().zip(&tpl.weights) {
        let mut posed = [S::constant(0.0); 3];
        for j in 0..N_JOINTS {
            if w[j] == 0.0 {
                continue;
            }
            let wj = S::constant(w[j]);
            let rel = [
                S::constant(v[0] - tpl.rest_joints[j][0]),
                S::constant(v[1] - tpl.rest_joints[j][1]),
                S::constant(v[2] - tpl.rest_joints[j][2]),
            ];
            let r = &fk.rotations[j];
            for a in 0..3 {
                let t = r[a * 3] * rel[0] + r[a * 3 + 1] * rel[1] + r[a * 3 + 2] * rel[2]
                    + fk.joints[j][a];
                posed[a] = posed[a] + wj * t;
            }
        }
        out.push(posed);
    }
    out
}

/// Joint positions and the posed mesh for the given parameters.
pub fn lbs<T: Real>(tpl: &HandTemplate, params: &HandParams<T>) -> ([[T; 3]; N_JOINTS], HandMesh<T>) {
    let (theta, trans) = split_params::<T, T>(params);
    let fk = forward_kinematics(&tpl.skeleton, &theta, &trans);
    let verts = skin_vertices(tpl, &fk);
    let weights = tpl
        .weights
        .iter()
        .map(|w| {
            let mut o = [T::zero(); N_JOINTS];
            for (dst, src) in o.iter_mut().zip(w) {
                *dst = real(*src);
            }
            o
        })
        .collect();
    let mesh = TriMesh::new(verts, tpl.rest_mesh.faces.clone());
    (fk.joints, HandMesh { mesh, skin_weights: weights })
}

/// Joint positions only.
pub fn joints<T: Real>(tpl: &HandTemplate, params: &HandParams<T>) -> [[T; 3]; N_JOINTS] {
    let (theta, trans) = split_params::<T, T>(params);
    forward_kinematics(&tpl.skeleton, &theta, &trans).joints
}

/// Fingertip positions (distal joint frame applied to the rest tip).
pub fn fingertips<T: Real>(tpl: &HandTemplate, params: &HandParams<T>) -> [[T; 3]; N_FINGERS] {
    let (theta, trans) = split_params::<T, T>(params);
    let fk = forward_kinematics(&tpl.skeleton, &theta, &trans);
    let tips_rest = tpl.rest_tips();
    let mut out = [[T::zero(); 3]; N_FINGERS];
    for f in 0..N_FINGERS {
        let j = 3 + 3 * f;
        let rel = [
            real::<T>(tips_rest[f][0] - tpl.rest_joints[j][0]),
            real::<T>(tips_rest[f][1] - tpl.rest_joints[j][1]),
            real::<T>(tips_rest[f][2] - tpl.rest_joints[j][2]),
        ];
        let r = &fk.rotations[j];
        for a in 0..3 {
            out[f][a] = r[a * 3] * rel[0] + r[a * 3 + 1] * rel[1] + r[a * 3 + 2] * rel[2]
                + fk.joints[j][a];
        }
    }
    out
}

/// Posed vertices as a `[V, 3]` tensor plus (optionally) the exact Jacobian
/// `[3V, 51]` via one dual pass per input.
pub fn lbs_vertices_and_jacobian<T: Real>(
    tpl: &HandTemplate,
    y: &Tensor<T>,
    with_jacobian: bool,
) -> (Tensor<T>, Option<Tensor<T>>) {
    assert_eq!(y.numel(), Y_H_DIM, "expected 51 hand values, got {:?}", y.shape());
    let params = HandParams::unflatten(y);
    let (_, hand) = lbs(tpl, &params);
    let nv = hand.mesh.vertices.len();
    let mut verts = Tensor::zeros(nv, 3);
    for (i, v) in hand.mesh.vertices.iter().enumerate() {
        for a in 0..3 {
            *verts.at_mut(i, a) = v[a];
        }
    }
    if !with_jacobian {
        return (verts, None);
    }
    let (theta, trans) = split_params::<T, T>(&params);
    let mut jac = Tensor::zeros(nv * 3, Y_H_DIM);
    for input in 0..Y_H_DIM {
        let mut dtheta = [Dual::<T>::con(T::zero()); THETA_DIM];
        for (k, v) in dtheta.iter_mut().enumerate() {
            *v = if k == input { Dual::var(theta[k]) } else { Dual::con(theta[k]) };
        }
        let mut dtrans = [Dual::<T>::con(T::zero()); 3];
        for k in 0..3 {
            dtrans[k] = if 48 + k == input { Dual::var(trans[k]) } else { Dual::con(trans[k]) };
        }
        let fk = forward_kinematics(&tpl.skeleton, &dtheta, &dtrans);
        let dverts = skin_vertices(tpl, &fk);
        for (i, v) in dverts.iter().enumerate() {
            for a in 0..3 {
                *jac.at_mut(i * 3 + a, input) = v[a].d;
            }
        }
    }
    (verts, Some(jac))
}

#[cfg(test)]
mod tests {
    use super::*;
    use graspgen_geometry::vec3;

    #[test]
    fn rest_pose_mesh_equals_template() {
        let tpl = HandTemplate::standard();
        let (joints, hand) = lbs(&tpl, &HandParams::<f64>::rest());
        for (j, r) in joints.iter().zip(&tpl.rest_joints) {
            assert!(vec3::dist(*j, *r) < 1e-12);
        }
        for (v, r) in hand.mesh.vertices.iter().zip(&tpl.rest_mesh.vertices) {
            assert!(vec3::dist(*v, *r) < 1e-12);
        }
    }

    #[test]
    fn translation_moves_mesh_rigidly() {
        let tpl = HandTemplate::standard();
        let p = HandParams::new([0.0; THETA_DIM], [0.1, 0.0, 0.0]);
        let (joints, hand) = lbs(&tpl, &p);
        for (j, r) in joints.iter().zip(&tpl.rest_joints) {
            assert!((j[0] - (r[0] + 0.1)).abs() < 1e-12);
        }
        for (v, r) in hand.mesh.vertices.iter().zip(&tpl.rest_mesh.vertices) {
            assert!((v[0] - (r[0] + 0.1)).abs() < 1e-12);
            assert!((v[1] - r[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn posed_mesh_keeps_topology_watertight() {
        let tpl = HandTemplate::standard();
        let mut theta = [0.0f64; THETA_DIM];
        for f in 0..N_FINGERS {
            for s in 0..3 {
                theta[(1 + 3 * f + s) * 3 + 1] = 1.1;
            }
        }
        let p = HandParams::new(theta, [0.05, 0.0, 0.02]);
        let (_, hand) = lbs(&tpl, &p);
        assert_eq!(hand.mesh.faces, tpl.rest_mesh.faces);
        assert!(hand.mesh.is_watertight());
    }

    #[test]
    fn flexion_curls_fingertips_toward_the_palm() {
        let tpl = HandTemplate::standard();
        let rest_tips = fingertips(&tpl, &HandParams::<f64>::rest());
        let mut theta = [0.0f64; THETA_DIM];
        for f in 0..N_FINGERS {
            for s in 0..3 {
                theta[(1 + 3 * f + s) * 3 + 1] = 1.2;
            }
        }
        let tips = fingertips(&tpl, &HandParams::new(theta, [0.0; 3]));
        for f in 1..N_FINGERS {
            assert!(
                tips[f][2] < rest_tips[f][2] - 0.02,
                "finger {f} tip z {} vs rest {}",
                tips[f][2],
                rest_tips[f][2]
            );
        }
    }
}
