//! Dense row-major rank-2 tensors.
//!
//! Everything in this workspace is a matrix: vectors are `1 x n` rows,
//! scalars are `1 x 1`. Shape mismatches are programmer errors and panic with
//! both shapes in the message.

use crate::scalar::Real;
use rayon::prelude::*;

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T> {
    shape: [usize; 2],
    data: Vec<T>,
}

impl<T: Real> Tensor<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { shape: [rows, cols], data: vec![T::zero(); rows * cols] }
    }

    pub fn filled(rows: usize, cols: usize, v: T) -> Self {
        Self { shape: [rows, cols], data: vec![v; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(
            rows * cols,
            data.len(),
            "tensor shape [{rows}, {cols}] does not match data length {}",
            data.len()
        );
        Self { shape: [rows, cols], data }
    }

    pub fn scalar(v: T) -> Self {
        Self { shape: [1, 1], data: vec![v] }
    }

    pub fn row_vec(data: Vec<T>) -> Self {
        Self { shape: [1, data.len()], data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.shape[0]
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.shape[1]
    }

    #[inline]
    pub fn shape(&self) -> [usize; 2] {
        self.shape
    }

    #[inline]
    pub fn numel(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> T {
        self.data[r * self.shape[1] + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut T {
        &mut self.data[r * self.shape[1] + c]
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[T] {
        let c = self.shape[1];
        &self.data[r * c..(r + 1) * c]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [T] {
        let c = self.shape[1];
        &mut self.data[r * c..(r + 1) * c]
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn item(&self) -> T {
        assert_eq!(self.shape, [1, 1], "item() on non-scalar tensor {:?}", self.shape);
        self.data[0]
    }

    /// Reinterprets the buffer under a new shape with the same element count.
    pub fn reshaped(&self, rows: usize, cols: usize) -> Self {
        assert_eq!(
            rows * cols,
            self.data.len(),
            "reshape [{:?}] -> [{rows}, {cols}] changes element count",
            self.shape
        );
        Self { shape: [rows, cols], data: self.data.clone() }
    }

    pub fn transposed(&self) -> Self {
        let [r, c] = self.shape;
        let mut out = Self::zeros(c, r);
        for i in 0..r {
            for j in 0..c {
                out.data[j * r + i] = self.data[i * c + j];
            }
        }
        out
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { shape: self.shape, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        self.assert_same_shape(other, "zip_map");
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Self { shape: self.shape, data }
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|v| v * s)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    /// `self += other * s`, in place.
    pub fn add_scaled(&mut self, other: &Self, s: T) {
        self.assert_same_shape(other, "add_scaled");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn fill(&mut self, v: T) {
        self.data.fill(v);
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn sum(&self) -> T {
        let mut s = T::zero();
        for &v in &self.data {
            s += v;
        }
        s
    }

    /// Squared Frobenius norm.
    pub fn norm_sq(&self) -> T {
        let mut s = T::zero();
        for &v in &self.data {
            s += v * v;
        }
        s
    }

    pub fn cast<U: Real>(&self) -> Tensor<U> {
        Tensor {
            shape: self.shape,
            data: self
                .data
                .iter()
                .map(|v| U::from_f64(v.to_f64().expect("scalar cast")).expect("scalar cast"))
                .collect(),
        }
    }

    #[inline]
    fn assert_same_shape(&self, other: &Self, what: &str) {
        assert_eq!(
            self.shape, other.shape,
            "{what}: shape {:?} does not match shape {:?}",
            self.shape, other.shape
        );
    }
}

/// `C = op(A) @ op(B)` where each operand is optionally transposed.
///
/// Plain (untransposed) products use a cache-friendly i-k-j loop and go
/// row-parallel above a flop threshold; the parallel split is by disjoint
/// output rows, so results are bit-identical to the serial path.
pub fn matmul<T: Real>(a: &Tensor<T>, b: &Tensor<T>, ta: bool, tb: bool) -> Tensor<T> {
    let a_t;
    let b_t;
    let a = if ta {
        a_t = a.transposed();
        &a_t
    } else {
        a
    };
    let b = if tb {
        b_t = b.transposed();
        &b_t
    } else {
        b
    };
    let (m, k) = (a.rows(), a.cols());
    let (k2, n) = (b.rows(), b.cols());
    assert_eq!(
        k, k2,
        "matmul: inner dims of {:?} and {:?} do not match",
        a.shape(),
        b.shape()
    );
    let mut out = Tensor::zeros(m, n);
    let body = |i: usize, out_row: &mut [T]| {
        let a_row = a.row(i);
        for kk in 0..k {
            let aik = a_row[kk];
            if aik == T::zero() {
                continue;
            }
            let b_row = b.row(kk);
            for j in 0..n {
                out_row[j] += aik * b_row[j];
            }
        }
    };
    let flops = m * k * n;
    if flops >= 1 << 22 && m >= 32 {
        out.data.par_chunks_mut(n).enumerate().for_each(|(i, row)| body(i, row));
    } else {
        for (i, row) in out.data.chunks_mut(n).enumerate() {
            body(i, row);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_identity_passthrough() {
        let eye = Tensor::from_vec(3, 3, vec![1.0f64, 0., 0., 0., 1., 0., 0., 0., 1.]);
        let a = Tensor::from_vec(3, 4, (0..12).map(|v| v as f64 * 0.5 - 2.0).collect());
        assert_eq!(matmul(&eye, &a, false, false), a);
    }

    #[test]
    fn matmul_transpose_variants_agree() {
        let a = Tensor::from_vec(2, 3, vec![1.0f64, 2., 3., 4., 5., 6.]);
        let b = Tensor::from_vec(3, 2, vec![7.0f64, 8., 9., 10., 11., 12.]);
        let c = matmul(&a, &b, false, false);
        let c_ta = matmul(&a.transposed(), &b, true, false);
        let c_tb = matmul(&a, &b.transposed(), false, true);
        assert_eq!(c, c_ta);
        assert_eq!(c, c_tb);
    }

    #[test]
    #[should_panic(expected = "inner dims")]
    fn matmul_shape_mismatch_names_shapes() {
        let a = Tensor::<f32>::zeros(2, 3);
        let b = Tensor::<f32>::zeros(4, 2);
        matmul(&a, &b, false, false);
    }

    #[test]
    fn parallel_matmul_matches_serial() {
        // Big enough to trip the parallel path.
        let m = 64;
        let k = 512;
        let n = 160;
        let a = Tensor::from_vec(m, k, (0..m * k).map(|v| ((v * 2654435761) % 997) as f32 * 1e-3).collect());
        let b = Tensor::from_vec(k, n, (0..k * n).map(|v| ((v * 40503) % 991) as f32 * 1e-3).collect());
        let par = matmul(&a, &b, false, false);
        // Serial reference.
        let mut refc = Tensor::zeros(m, n);
        for i in 0..m {
            for kk in 0..k {
                let aik = a.at(i, kk);
                for j in 0..n {
                    *refc.at_mut(i, j) += aik * b.at(kk, j);
                }
            }
        }
        assert_eq!(par, refc);
    }
}
