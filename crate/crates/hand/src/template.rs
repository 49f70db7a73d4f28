//! Procedural capsule-based hand template: one capsule per bone, skin
//! weights from distance to the bone segments with a smooth falloff.

use crate::skeleton::{HandSkeleton, N_FINGERS, N_JOINTS};
use graspgen_geometry::shapes::capsule;
use graspgen_geometry::vec3::{add, cross, dist, dot, norm, normalize, scale, sub};
use graspgen_geometry::TriMesh;
use std::sync::{Arc, OnceLock};

const WEIGHT_SIGMA: f64 = 0.012;
const CAPSULE_SEGMENTS: usize = 8;
const CAPSULE_RINGS: usize = 2;

/// Bone segment in rest space, owned by a joint (column in the skin
/// weights).
#[derive(Clone, Copy, Debug)]
pub struct Bone {
    pub joint: usize,
    pub from: [f64; 3],
    pub to: [f64; 3],
    pub radius: f64,
}

#[derive(Clone, Debug)]
pub struct HandTemplate {
    pub skeleton: HandSkeleton,
    pub rest_joints: [[f64; 3]; N_JOINTS],
    pub rest_mesh: TriMesh<f64>,
    /// Per-vertex weights over the 16 joints; non-negative, sum to one.
    pub weights: Vec<[f64; N_JOINTS]>,
    pub bones: Vec<Bone>,
}

static TEMPLATE: OnceLock<Arc<HandTemplate>> = OnceLock::new();

impl HandTemplate {
    /// Shared standard template (construction is deterministic).
    pub fn standard() -> Arc<HandTemplate> {
        TEMPLATE.get_or_init(|| Arc::new(Self::build(HandSkeleton::standard()))).clone()
    }

    fn build(skeleton: HandSkeleton) -> HandTemplate {
        let rest_joints = skeleton.rest_joints();
        let mut bones = Vec::new();
        // Palm: wrist to each finger base, all owned by the wrist joint.
        for f in 0..N_FINGERS {
            let base = 1 + 3 * f;
            let r = if f == 0 { 0.013 } else { 0.012 };
            bones.push(Bone { joint: 0, from: rest_joints[0], to: rest_joints[base], radius: r });
        }
        // Phalanges: joint to child joint, distal to tip.
        for f in 0..N_FINGERS {
            let radii = if f == 0 { [0.011, 0.010, 0.009] } else { [0.0095, 0.0085, 0.0078] };
            for s in 0..3 {
                let j = 1 + 3 * f + s;
                let from = rest_joints[j];
                let to = if s < 2 {
                    rest_joints[j + 1]
                } else {
                    add(rest_joints[j], skeleton.tip_offset[f])
                };
                bones.push(Bone { joint: j, from, to, radius: radii[s] });
            }
        }

        let mut rest_mesh = TriMesh::<f64>::new(vec![], vec![]);
        for bone in &bones {
            rest_mesh.append(&capsule_between(bone.from, bone.to, bone.radius));
        }

        let weights = rest_mesh
            .vertices
            .iter()
            .map(|&v| {
                let mut w = [0.0f64; N_JOINTS];
                for bone in &bones {
                    let d = point_segment_distance(v, bone.from, bone.to);
                    let g = (-(d / WEIGHT_SIGMA).powi(2)).exp();
                    if g > w[bone.joint] {
                        w[bone.joint] = g;
                    }
                }
                let sum: f64 = w.iter().sum();
                if sum > 0.0 {
                    for x in &mut w {
                        *x /= sum;
                    }
                } else {
                    w[0] = 1.0;
                }
                w
            })
            .collect();
        HandTemplate { skeleton, rest_joints, rest_mesh, weights, bones }
    }

    /// Rest-space fingertip positions (distal joint plus tip extension).
    pub fn rest_tips(&self) -> [[f64; 3]; N_FINGERS] {
        let mut out = [[0.0f64; 3]; N_FINGERS];
        for f in 0..N_FINGERS {
            let distal = 3 + 3 * f;
            out[f] = add(self.rest_joints[distal], self.skeleton.tip_offset[f]);
        }
        out
    }
}

/// Capsule whose cap centers sit at `from` and `to`.
fn capsule_between(from: [f64; 3], to: [f64; 3], radius: f64) -> TriMesh<f64> {
    let axis = sub(to, from);
    let len = norm(axis);
    let canonical = capsule([0.0; 3], radius, len.max(1e-6), CAPSULE_SEGMENTS, CAPSULE_RINGS);
    let mid = scale(add(from, to), 0.5);
    let dir = normalize(axis);
    // Rotation taking +z to dir.
    let z = [0.0, 0.0, 1.0];
    let c = dot(z, dir);
    let vertices = if c > 1.0 - 1e-12 {
        canonical.vertices.iter().map(|&v| add(v, mid)).collect()
    } else if c < -1.0 + 1e-12 {
        canonical
            .vertices
            .iter()
            .map(|&v| add([v[0], -v[1], -v[2]], mid))
            .collect()
    } else {
        let axis_r = normalize(cross(z, dir));
        let angle = c.clamp(-1.0, 1.0).acos();
        let w = scale(axis_r, angle);
        let r = crate::fk::rodrigues(w);
        canonical
            .vertices
            .iter()
            .map(|&v| add(graspgen_geometry::vec3::mat_mul_vec(&r, v), mid))
            .collect()
    };
    TriMesh::new(vertices, canonical.faces)
}

fn point_segment_distance(p: [f64; 3], a: [f64; 3], b: [f64; 3]) -> f64 {
    let ab = sub(b, a);
    let denom = dot(ab, ab);
    let t = if denom > 0.0 { (dot(sub(p, a), ab) / denom).clamp(0.0, 1.0) } else { 0.0 };
    dist(p, add(a, scale(ab, t)))
}
