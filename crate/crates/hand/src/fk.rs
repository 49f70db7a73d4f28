//! Forward kinematics, generic over a scalar that may carry a derivative.
//!
//! The same code path evaluates plain values (f32/f64) and dual numbers;
//! Jacobians come from 51 forward passes with a seeded dual, which is exact
//! (no finite-difference truncation) and independent of the reverse-mode
//! tape it feeds.

use crate::skeleton::{HandSkeleton, N_JOINTS, THETA_DIM, Y_H_DIM};
use graspgen_core::{real, Real, Tensor};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar interface needed by the kinematics: arithmetic, the three
/// transcendentals Rodrigues needs, and a primal value for branching.
pub trait FkScalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn constant(v: f64) -> Self;
    fn primal(self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sqrt(self) -> Self;
}

impl<T: Real> FkScalar for T {
    fn constant(v: f64) -> Self {
        real(v)
    }
    fn primal(self) -> f64 {
        self.to_f64().unwrap()
    }
    fn sin(self) -> Self {
        num_traits::Float::sin(self)
    }
    fn cos(self) -> Self {
        num_traits::Float::cos(self)
    }
    fn sqrt(self) -> Self {
        num_traits::Float::sqrt(self)
    }
}

/// Forward-mode dual number over the workspace scalar.
#[derive(Clone, Copy, Debug)]
pub struct Dual<T> {
    pub v: T,
    pub d: T,
}

impl<T: Real> Dual<T> {
    pub fn var(v: T) -> Self {
        Self { v, d: T::one() }
    }
    pub fn con(v: T) -> Self {
        Self { v, d: T::zero() }
    }
}

impl<T: Real> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { v: self.v + o.v, d: self.d + o.d }
    }
}
impl<T: Real> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { v: self.v - o.v, d: self.d - o.d }
    }
}
impl<T: Real> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self { v: self.v * o.v, d: self.d * o.v + self.v * o.d }
    }
}
impl<T: Real> Div for Dual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        Self { v: self.v / o.v, d: (self.d * o.v - self.v * o.d) / (o.v * o.v) }
    }
}
impl<T: Real> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { v: -self.v, d: -self.d }
    }
}

impl<T: Real> FkScalar for Dual<T> {
    fn constant(v: f64) -> Self {
        Self { v: real(v), d: T::zero() }
    }
    fn primal(self) -> f64 {
        self.v.to_f64().unwrap()
    }
    fn sin(self) -> Self {
        Self { v: self.v.sin(), d: self.d * self.v.cos() }
    }
    fn cos(self) -> Self {
        Self { v: self.v.cos(), d: -self.d * self.v.sin() }
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        Self { v: s, d: self.d / (s + s) }
    }
}

/// Rodrigues rotation from an (unnormalized) axis-angle vector, row-major
/// 3x3. Small angles take the series form in theta^2, which keeps duals
/// finite at exactly zero.
pub fn rodrigues<S: FkScalar>(w: [S; 3]) -> [S; 9] {
    let t2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
    let (a, b) = if t2.primal() < 1e-8 {
        // sin(t)/t and (1-cos(t))/t^2 around zero.
        let c6 = S::constant(1.0 / 6.0);
        let c24 = S::constant(1.0 / 24.0);
        (S::constant(1.0) - t2 * c6, S::constant(0.5) - t2 * c24)
    } else {
        let t = t2.sqrt();
        (t.sin() / t, (S::constant(1.0) - t.cos()) / t2)
    };
    let (x, y, z) = (w[0], w[1], w[2]);
    let one = S::constant(1.0);
    // I + a*K + b*K^2 with K = skew(w)
    [
        one - b * (y * y + z * z),
        -(a * z) + b * x * y,
        a * y + b * x * z,
        a * z + b * x * y,
        one - b * (x * x + z * z),
        -(a * x) + b * y * z,
        -(a * y) + b * x * z,
        a * x + b * y * z,
        one - b * (x * x + y * y),
    ]
}

/// Axis-angle (unnormalized, angle = norm) from a row-major rotation matrix.
pub fn log_rotation(r: &[f64; 9]) -> [f64; 3] {
    let trace = r[0] + r[4] + r[8];
    let cos_t = ((trace - 1.0) * 0.5).clamp(-1.0, 1.0);
    let t = cos_t.acos();
    if t < 1e-9 {
        return [0.0; 3];
    }
    if (std::f64::consts::PI - t) < 1e-4 {
        // Near pi: extract the axis from the symmetric part.
        let xx = ((r[0] + 1.0) * 0.5).max(0.0).sqrt();
        let yy = ((r[4] + 1.0) * 0.5).max(0.0).sqrt();
        let zz = ((r[8] + 1.0) * 0.5).max(0.0).sqrt();
        let x = xx.copysign(r[7] - r[5]);
        let y = yy.copysign(r[2] - r[6]);
        let z = zz.copysign(r[3] - r[1]);
        let n = (x * x + y * y + z * z).sqrt().max(1e-12);
        return [x / n * t, y / n * t, z / n * t];
    }
    let s = 0.5 / t.sin();
    [(r[7] - r[5]) * s * t, (r[2] - r[6]) * s * t, (r[3] - r[1]) * s * t]
}

#[derive(Clone, Debug)]
pub struct FkResult<S> {
    /// Global joint positions.
    pub joints: [[S; 3]; N_JOINTS],
    /// Global joint rotations, row-major.
    pub rotations: [[S; 9]; N_JOINTS],
}

/// Forward kinematics over the tree: each joint rotates about its own
/// origin, children inherit the parent transform, the wrist adds the
/// translation.
pub fn forward_kinematics<S: FkScalar>(
    skel: &HandSkeleton,
    theta: &[S; THETA_DIM],
    trans: &[S; 3],
) -> FkResult<S> {
    let zero = S::constant(0.0);
    let mut joints = [[zero; 3]; N_JOINTS];
    let mut rotations = [[zero; 9]; N_JOINTS];
    for j in 0..N_JOINTS {
        let local = rodrigues([theta[j * 3], theta[j * 3 + 1], theta[j * 3 + 2]]);
        if j == 0 {
            joints[0] = *trans;
            rotations[0] = local;
        } else {
            let p = skel.parent[j];
            let off = [
                S::constant(skel.rest_offset[j][0]),
                S::constant(skel.rest_offset[j][1]),
                S::constant(skel.rest_offset[j][2]),
            ];
            let rp = &rotations[p];
            for a in 0..3 {
                joints[j][a] = joints[p][a]
                    + rp[a * 3] * off[0]
                    + rp[a * 3 + 1] * off[1]
                    + rp[a * 3 + 2] * off[2];
            }
            rotations[j] = mat3_mul(rp, &local);
        }
    }
    FkResult { joints, rotations }
}

fn mat3_mul<S: FkScalar>(a: &[S; 9], b: &[S; 9]) -> [S; 9] {
    let mut out = [S::constant(0.0); 9];
    for i in 0..3 {
        for j in 0..3 {
            out[i * 3 + j] =
                a[i * 3] * b[j] + a[i * 3 + 1] * b[3 + j] + a[i * 3 + 2] * b[6 + j];
        }
    }
    out
}

/// Joint positions for a 51-vector, plus (optionally) the exact Jacobian
/// d(joints)/d(y), shape `[48, 51]`, from one dual pass per input.
pub fn joints_and_jacobian<T: Real>(
    skel: &HandSkeleton,
    y: &Tensor<T>,
    with_jacobian: bool,
) -> (Tensor<T>, Option<Tensor<T>>) {
    assert_eq!(y.numel(), Y_H_DIM, "expected 51 hand values, got {:?}", y.shape());
    let d = y.data();
    let mut theta = [T::zero(); THETA_DIM];
    theta.copy_from_slice(&d[..THETA_DIM]);
    let trans = [d[48], d[49], d[50]];

    let plain = forward_kinematics(skel, &theta, &trans);
    let mut joints = Tensor::zeros(N_JOINTS, 3);
    for j in 0..N_JOINTS {
        for a in 0..3 {
            *joints.at_mut(j, a) = plain.joints[j][a];
        }
    }
    if !with_jacobian {
        return (joints, None);
    }
    let mut jac = Tensor::zeros(N_JOINTS * 3, Y_H_DIM);
    for input in 0..Y_H_DIM {
        let mut dtheta = [Dual::<T>::con(T::zero()); THETA_DIM];
        for (k, v) in dtheta.iter_mut().enumerate() {
            *v = if k == input { Dual::var(theta[k]) } else { Dual::con(theta[k]) };
        }
        let mut dtrans = [Dual::<T>::con(T::zero()); 3];
        for k in 0..3 {
            dtrans[k] = if 48 + k == input { Dual::var(trans[k]) } else { Dual::con(trans[k]) };
        }
        let res = forward_kinematics(skel, &dtheta, &dtrans);
        for j in 0..N_JOINTS {
            for a in 0..3 {
                *jac.at_mut(j * 3 + a, input) = res.joints[j][a].d;
            }
        }
    }
    (joints, Some(jac))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skeleton::HandParams;

    #[test]
    fn rest_pose_matches_rest_joints() {
        let sk = HandSkeleton::standard();
        let p = HandParams::<f64>::rest();
        let fk = forward_kinematics(&sk, &p.theta, &p.trans);
        let rest = sk.rest_joints();
        for j in 0..N_JOINTS {
            for a in 0..3 {
                assert!((fk.joints[j][a] - rest[j][a]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn pure_translation_shifts_every_joint() {
        let sk = HandSkeleton::standard();
        let t = [0.1f64, 0.0, 0.0];
        let p = HandParams::new([0.0; THETA_DIM], t);
        let fk = forward_kinematics(&sk, &p.theta, &p.trans);
        let rest = sk.rest_joints();
        for j in 0..N_JOINTS {
            assert!((fk.joints[j][0] - (rest[j][0] + 0.1)).abs() < 1e-14);
            assert!((fk.joints[j][1] - rest[j][1]).abs() < 1e-14);
            assert!((fk.joints[j][2] - rest[j][2]).abs() < 1e-14);
        }
    }

    #[test]
    fn wrist_rotation_is_a_rigid_transform_of_rest_joints() {
        // Independent oracle: apply the rotation matrix to rest joints.
        let sk = HandSkeleton::standard();
        let mut theta = [0.0f64; THETA_DIM];
        let w = [0.3, -0.5, 0.9];
        theta[..3].copy_from_slice(&w);
        let trans = [0.02, -0.03, 0.05];
        let fk = forward_kinematics(&sk, &theta, &trans);
        let r = rodrigues(w);
        let rest = sk.rest_joints();
        for j in 0..N_JOINTS {
            for a in 0..3 {
                let expect = trans[a]
                    + r[a * 3] * rest[j][0]
                    + r[a * 3 + 1] * rest[j][1]
                    + r[a * 3 + 2] * rest[j][2];
                assert!(
                    (fk.joints[j][a] - expect).abs() < 1e-12,
                    "joint {j} axis {a}: {} vs {expect}",
                    fk.joints[j][a]
                );
            }
        }
    }

    #[test]
    fn rodrigues_log_round_trip() {
        for w in [[0.0, 0.0, 0.0], [0.3, -0.2, 0.1], [1.5, 0.4, -2.0], [0.0, 3.1, 0.0]] {
            let r: [f64; 9] = rodrigues(w);
            let back = log_rotation(&r);
            let r2 = rodrigues(back);
            for i in 0..9 {
                assert!((r[i] - r2[i]).abs() < 1e-9, "{w:?}: {r:?} vs {r2:?}");
            }
        }
    }

    #[test]
    fn dual_jacobian_matches_central_differences() {
        let sk = HandSkeleton::standard();
        let mut y = Tensor::<f64>::zeros(1, Y_H_DIM);
        for (i, v) in y.data_mut().iter_mut().enumerate() {
            *v = (i as f64 * 0.61).sin() * 0.7;
        }
        let (_, jac) = joints_and_jacobian(&sk, &y, true);
        let jac = jac.unwrap();
        let eps = 1e-6;
        for input in 0..Y_H_DIM {
            let mut yp = y.clone();
            yp.data_mut()[input] += eps;
            let (jp, _) = joints_and_jacobian(&sk, &yp, false);
            let mut ym = y.clone();
            ym.data_mut()[input] -= eps;
            let (jm, _) = joints_and_jacobian(&sk, &ym, false);
            for out in 0..N_JOINTS * 3 {
                let fd = (jp.data()[out] - jm.data()[out]) / (2.0 * eps);
                let an = jac.at(out, input);
                assert!(
                    (an - fd).abs() / an.abs().max(1.0) < 1e-4,
                    "d joint[{out}] / d y[{input}]: {an} vs {fd}"
                );
            }
        }
    }
}
