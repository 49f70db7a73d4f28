//! Kinematic template: 16 joints (wrist plus three per finger), rest
//! offsets, per-component joint limits, and the 51-value parameter vector.

use graspgen_core::{real, Real, Tensor};

pub const N_JOINTS: usize = 16;
pub const N_FINGERS: usize = 5;
pub const THETA_DIM: usize = 48;
pub const Y_H_DIM: usize = 51;

/// Finger order: thumb, index, middle, ring, pinky. Joint layout: joint 0 is
/// the wrist; finger `f` owns joints `1+3f` (base), `2+3f`, `3+3f` (distal).
#[derive(Clone, Debug)]
pub struct HandSkeleton {
    /// Parent joint index; the wrist parents itself.
    pub parent: [usize; N_JOINTS],
    /// Offset from the parent joint in the parent frame, meters (rest pose).
    pub rest_offset: [[f64; 3]; N_JOINTS],
    /// Per joint, per axis-angle component: (min, max) radians.
    pub joint_limits: [[(f64, f64); 3]; N_JOINTS],
    /// Extra tip extension beyond each finger's distal joint, along the
    /// rest bone direction.
    pub tip_offset: [[f64; 3]; N_FINGERS],
}

impl HandSkeleton {
    /// The procedural right hand used throughout: fingers along +x, palm
    /// normal -z (positive flexion about +y curls the fingers palmar),
    /// thumb splayed toward +y. About 0.19 m from wrist to middle fingertip.
    pub fn standard() -> Self {
        let mut parent = [0usize; N_JOINTS];
        let mut rest_offset = [[0.0f64; 3]; N_JOINTS];
        // base offset from wrist, then two phalanx offsets, then tip length
        let fingers: [([f64; 3], [f64; 3], [f64; 3], f64); N_FINGERS] = [
            // thumb: direction (+x, +y, slightly -z)
            ([0.025, 0.030, -0.008], [0.0228, 0.0228, -0.0043], [0.0171, 0.0171, -0.0032], 0.022),
            ([0.088, 0.028, 0.0], [0.042, 0.002, 0.0], [0.026, 0.001, 0.0], 0.021),
            ([0.092, 0.009, 0.0], [0.046, 0.000, 0.0], [0.029, 0.000, 0.0], 0.022),
            ([0.089, -0.010, 0.0], [0.042, -0.001, 0.0], [0.027, 0.000, 0.0], 0.021),
            ([0.082, -0.029, 0.0], [0.032, -0.002, 0.0], [0.021, 0.000, 0.0], 0.018),
        ];
        let mut tip_offset = [[0.0f64; 3]; N_FINGERS];
        for (f, (base, seg1, seg2, tip_len)) in fingers.iter().enumerate() {
            let b = 1 + 3 * f;
            parent[b] = 0;
            parent[b + 1] = b;
            parent[b + 2] = b + 1;
            rest_offset[b] = *base;
            rest_offset[b + 1] = *seg1;
            rest_offset[b + 2] = *seg2;
            // Tip continues along the distal bone direction.
            let n = (seg2[0] * seg2[0] + seg2[1] * seg2[1] + seg2[2] * seg2[2]).sqrt();
            tip_offset[f] = [seg2[0] / n * tip_len, seg2[1] / n * tip_len, seg2[2] / n * tip_len];
        }
        let mut joint_limits = [[(0.0, 0.0); 3]; N_JOINTS];
        joint_limits[0] = [(-std::f64::consts::PI, std::f64::consts::PI); 3];
        for j in 1..N_JOINTS {
            // twist, flexion, abduction
            joint_limits[j] = [(-0.5, 0.5), (-0.2, 1.8), (-0.5, 0.5)];
        }
        Self { parent, rest_offset, joint_limits, tip_offset }
    }

    /// Rest-pose joint positions (cumulative offsets).
    pub fn rest_joints(&self) -> [[f64; 3]; N_JOINTS] {
        let mut out = [[0.0f64; 3]; N_JOINTS];
        for j in 1..N_JOINTS {
            let p = self.parent[j];
            for a in 0..3 {
                out[j][a] = out[p][a] + self.rest_offset[j][a];
            }
        }
        out
    }

    /// Clamps a theta vector to the joint limits. Idempotent.
    pub fn clamp_to_limits<T: Real>(&self, theta: &mut [T; THETA_DIM]) {
        for j in 0..N_JOINTS {
            for a in 0..3 {
                let (lo, hi) = self.joint_limits[j][a];
                let v = &mut theta[j * 3 + a];
                *v = (*v).max(real(lo)).min(real(hi));
            }
        }
    }
}

/// Pose parameters: 48 axis-angle values (16 joints) plus the wrist
/// translation, all in the object-centric frame. Components wrap into
/// [-pi, pi] on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct HandParams<T> {
    pub theta: [T; THETA_DIM],
    pub trans: [T; 3],
}

impl<T: Real> HandParams<T> {
    pub fn new(mut theta: [T; THETA_DIM], trans: [T; 3]) -> Self {
        for v in &mut theta {
            *v = wrap_angle(*v);
        }
        Self { theta, trans }
    }

    pub fn rest() -> Self {
        Self { theta: [T::zero(); THETA_DIM], trans: [T::zero(); 3] }
    }

    /// `theta` then `trans`, length 51.
    pub fn flatten(&self) -> Tensor<T> {
        let mut data = Vec::with_capacity(Y_H_DIM);
        data.extend_from_slice(&self.theta);
        data.extend_from_slice(&self.trans);
        Tensor::row_vec(data)
    }

    /// Inverse of [`Self::flatten`]. Panics on a wrong-length vector.
    pub fn unflatten(y: &Tensor<T>) -> Self {
        assert_eq!(
            y.numel(),
            Y_H_DIM,
            "hand parameter vector must have {Y_H_DIM} values, got shape {:?}",
            y.shape()
        );
        let d = y.data();
        let mut theta = [T::zero(); THETA_DIM];
        theta.copy_from_slice(&d[..THETA_DIM]);
        Self::new(theta, [d[48], d[49], d[50]])
    }

    pub fn cast<U: Real>(&self) -> HandParams<U> {
        let mut theta = [U::zero(); THETA_DIM];
        for (o, v) in theta.iter_mut().zip(&self.theta) {
            *o = real(v.to_f64().unwrap());
        }
        HandParams {
            theta,
            trans: [
                real(self.trans[0].to_f64().unwrap()),
                real(self.trans[1].to_f64().unwrap()),
                real(self.trans[2].to_f64().unwrap()),
            ],
        }
    }
}

/// Wraps an angle into [-pi, pi].
pub fn wrap_angle<T: Real>(v: T) -> T {
    let pi = real::<T>(std::f64::consts::PI);
    let two_pi = pi + pi;
    if v >= -pi && v <= pi {
        return v;
    }
    let mut x = (v + pi) % two_pi;
    if x < T::zero() {
        x += two_pi;
    }
    x - pi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flatten_unflatten_round_trip() {
        let mut theta = [0.0f64; THETA_DIM];
        for (i, v) in theta.iter_mut().enumerate() {
            *v = (i as f64 * 0.13).sin() * 3.0;
        }
        let p = HandParams::new(theta, [0.1, -0.2, 0.3]);
        let q = HandParams::unflatten(&p.flatten());
        assert_eq!(p, q);
        assert_eq!(p.flatten().data()[48..], [0.1, -0.2, 0.3]);
    }

    #[test]
    fn zeros_vector_is_rest_pose() {
        let p = HandParams::<f64>::unflatten(&Tensor::zeros(1, Y_H_DIM));
        assert_eq!(p, HandParams::rest());
    }

    #[test]
    #[should_panic(expected = "51 values")]
    fn wrong_length_vector_panics() {
        HandParams::<f64>::unflatten(&Tensor::zeros(1, 50));
    }

    #[test]
    fn construction_wraps_angles() {
        let mut theta = [0.0f64; THETA_DIM];
        theta[0] = 4.0;
        theta[1] = -7.0;
        let p = HandParams::new(theta, [0.0; 3]);
        assert!(p.theta.iter().all(|t| t.abs() <= std::f64::consts::PI + 1e-12));
        assert!((p.theta[0] - (4.0 - 2.0 * std::f64::consts::PI)).abs() < 1e-12);
    }

    #[test]
    fn limit_clamping_is_idempotent() {
        let sk = HandSkeleton::standard();
        let mut theta = [0.0f64; THETA_DIM];
        for (i, v) in theta.iter_mut().enumerate() {
            *v = (i as f64 * 0.7).sin() * 3.0;
        }
        let mut once = theta;
        sk.clamp_to_limits(&mut once);
        let mut twice = once;
        sk.clamp_to_limits(&mut twice);
        assert_eq!(once, twice);
    }

    #[test]
    fn skeleton_is_a_tree_rooted_at_the_wrist() {
        let sk = HandSkeleton::standard();
        assert_eq!(sk.parent[0], 0);
        for j in 1..N_JOINTS {
            assert!(sk.parent[j] < j, "parents precede children");
        }
        // Middle fingertip around 0.19 m from the wrist.
        let joints = sk.rest_joints();
        let tip = [
            joints[9][0] + sk.tip_offset[2][0],
            joints[9][1] + sk.tip_offset[2][1],
            joints[9][2] + sk.tip_offset[2][2],
        ];
        let len = (tip[0] * tip[0] + tip[1] * tip[1] + tip[2] * tip[2]).sqrt();
        assert!((0.15..0.22).contains(&len), "hand length {len}");
    }
}
