//! Small fixed-size vector helpers on `[T; 3]`.

use graspgen_core::Real;

#[inline]
pub fn add<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale<T: Real>(a: [T; 3], s: T) -> [T; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm_sq<T: Real>(a: [T; 3]) -> T {
    dot(a, a)
}

#[inline]
pub fn norm<T: Real>(a: [T; 3]) -> T {
    norm_sq(a).sqrt()
}

#[inline]
pub fn dist_sq<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    norm_sq(sub(a, b))
}

#[inline]
pub fn dist<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    dist_sq(a, b).sqrt()
}

/// Returns a unit vector; zero input yields `[0, 0, 1]`.
#[inline]
pub fn normalize<T: Real>(a: [T; 3]) -> [T; 3] {
    let n = norm(a);
    if n > T::zero() {
        scale(a, T::one() / n)
    } else {
        [T::zero(), T::zero(), T::one()]
    }
}

/// Any unit vector orthogonal to `a` (assumed non-zero).
pub fn any_orthonormal<T: Real>(a: [T; 3]) -> [T; 3] {
    let a = normalize(a);
    let pick = if a[0].abs() < graspgen_core::real(0.9) {
        [T::one(), T::zero(), T::zero()]
    } else {
        [T::zero(), T::one(), T::zero()]
    };
    normalize(cross(a, pick))
}

/// Applies a row-major 3x3 matrix.
#[inline]
pub fn mat_mul_vec<T: Real>(m: &[T; 9], v: [T; 3]) -> [T; 3] {
    [
        m[0] * v[0] + m[1] * v[1] + m[2] * v[2],
        m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
        m[6] * v[0] + m[7] * v[1] + m[8] * v[2],
    ]
}

/// Row-major 3x3 product `a * b`.
pub fn mat_mul<T: Real>(a: &[T; 9], b: &[T; 9]) -> [T; 9] {
    let mut out = [T::zero(); 9];
    for i in 0..3 {
        for j in 0..3 {
            let mut s = T::zero();
            for k in 0..3 {
                s += a[i * 3 + k] * b[k * 3 + j];
            }
            out[i * 3 + j] = s;
        }
    }
    out
}

pub fn mat_identity<T: Real>() -> [T; 9] {
    let mut m = [T::zero(); 9];
    m[0] = T::one();
    m[4] = T::one();
    m[8] = T::one();
    m
}
