//! Tape-based reverse-mode automatic differentiation over [`Tensor`]s.
//!
//! A [`Graph`] records each forward op eagerly; [`Graph::backward`] walks the
//! tape in reverse and accumulates gradients. Parameter tensors are borrowed
//! from a [`ModelState`], so a forward pass never copies weights; after
//! backward, [`Graph::param_grads`] hands per-parameter gradients back to the
//! caller for accumulation into the state.
//!
//! Node values are immutable once created and ops only reference earlier
//! nodes, so creation order is a valid topological order.

use crate::scalar::{real, Real};
use crate::state::ModelState;
use crate::tensor::{matmul, Tensor};

pub type NodeId = usize;

/// Externally defined op with its own backward rule. Implementations cache
/// whatever forward byproducts (selection indices, Jacobians) they need.
pub trait CustomOp<T: Real>: Send + Sync {
    fn name(&self) -> &'static str;
    /// Returns one gradient tensor per input, aligned with the input list.
    fn backward(&self, grad_out: &Tensor<T>, inputs: &[&Tensor<T>]) -> Vec<Tensor<T>>;
}

enum Value<'m, T> {
    Owned(Tensor<T>),
    Borrowed(&'m Tensor<T>),
}

enum Op<T: Real> {
    Leaf,
    Param(usize),
    MatMul { a: NodeId, b: NodeId, ta: bool, tb: bool },
    Add { a: NodeId, b: NodeId },
    Sub { a: NodeId, b: NodeId },
    Mul { a: NodeId, b: NodeId },
    AddRow { a: NodeId, row: NodeId },
    Scale { a: NodeId, c: T },
    Relu { a: NodeId },
    Gelu { a: NodeId },
    LayerNorm { x: NodeId, gamma: Option<NodeId>, beta: Option<NodeId>, eps: T },
    SoftmaxRows { a: NodeId },
    MaxPoolRows { a: NodeId, argmax: Vec<usize> },
    Mean { a: NodeId },
    Mse { a: NodeId, b: NodeId },
    SumSqDiff { a: NodeId, b: NodeId },
    ConcatRows { parts: Vec<NodeId> },
    SliceRows { a: NodeId, start: usize },
    ConcatCols { parts: Vec<NodeId> },
    SliceCols { a: NodeId, start: usize },
    Reshape { a: NodeId },
    Custom { inputs: Vec<NodeId>, op: Box<dyn CustomOp<T>> },
}

struct Node<'m, T: Real> {
    value: Value<'m, T>,
    op: Op<T>,
}

pub struct Graph<'m, T: Real> {
    nodes: Vec<Node<'m, T>>,
    grads: Vec<Option<Tensor<T>>>,
    grad_enabled: bool,
}

impl<'m, T: Real> Default for Graph<'m, T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<'m, T: Real> Graph<'m, T> {
    pub fn new() -> Self {
        Self { nodes: Vec::new(), grads: Vec::new(), grad_enabled: true }
    }

    /// Inference-only graph; backward is unavailable and custom ops may skip
    /// caching backward state.
    pub fn no_grad() -> Self {
        Self { nodes: Vec::new(), grads: Vec::new(), grad_enabled: false }
    }

    pub fn grad_enabled(&self) -> bool {
        self.grad_enabled
    }

    pub fn value(&self, id: NodeId) -> &Tensor<T> {
        match &self.nodes[id].value {
            Value::Owned(t) => t,
            Value::Borrowed(t) => t,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor<T>, op: Op<T>) -> NodeId {
        self.nodes.push(Node { value: Value::Owned(value), op });
        self.nodes.len() - 1
    }

    // ---- leaves ----

    pub fn leaf(&mut self, t: Tensor<T>) -> NodeId {
        self.push(t, Op::Leaf)
    }

    /// Constant borrowed from outside the graph (no gradient tracked).
    pub fn shared(&mut self, t: &'m Tensor<T>) -> NodeId {
        self.nodes.push(Node { value: Value::Borrowed(t), op: Op::Leaf });
        self.nodes.len() - 1
    }

    /// Trainable parameter node; gradients reported by [`Self::param_grads`].
    pub fn param(&mut self, state: &'m ModelState<T>, idx: usize) -> NodeId {
        self.nodes.push(Node { value: Value::Borrowed(state.value(idx)), op: Op::Param(idx) });
        self.nodes.len() - 1
    }

    // ---- ops ----

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.matmul_t(a, b, false, false)
    }

    /// `a @ b^T`
    pub fn matmul_nt(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.matmul_t(a, b, false, true)
    }

    /// `a^T @ b`
    pub fn matmul_tn(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.matmul_t(a, b, true, false)
    }

    pub fn matmul_t(&mut self, a: NodeId, b: NodeId, ta: bool, tb: bool) -> NodeId {
        let v = matmul(self.value(a), self.value(b), ta, tb);
        self.push(v, Op::MatMul { a, b, ta, tb })
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let v = self.value(a).add(self.value(b));
        self.push(v, Op::Add { a, b })
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let v = self.value(a).sub(self.value(b));
        self.push(v, Op::Sub { a, b })
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let v = self.value(a).zip_map(self.value(b), |x, y| x * y);
        self.push(v, Op::Mul { a, b })
    }

    /// Broadcast add of a `1 x n` row onto every row of an `m x n` matrix.
    pub fn add_row(&mut self, a: NodeId, row: NodeId) -> NodeId {
        let (av, rv) = (self.value(a), self.value(row));
        assert_eq!(rv.rows(), 1, "add_row: row operand has shape {:?}", rv.shape());
        assert_eq!(
            av.cols(),
            rv.cols(),
            "add_row: shape {:?} does not match row shape {:?}",
            av.shape(),
            rv.shape()
        );
        let mut v = av.clone();
        for i in 0..v.rows() {
            let r = v.row_mut(i);
            for (x, &y) in r.iter_mut().zip(rv.row(0)) {
                *x += y;
            }
        }
        self.push(v, Op::AddRow { a, row })
    }

    pub fn scale(&mut self, a: NodeId, c: T) -> NodeId {
        let v = self.value(a).scale(c);
        self.push(v, Op::Scale { a, c })
    }

    /// `a*ca + b*cb`, elementwise.
    pub fn lin_comb(&mut self, a: NodeId, ca: T, b: NodeId, cb: T) -> NodeId {
        let sa = self.scale(a, ca);
        let sb = self.scale(b, cb);
        self.add(sa, sb)
    }

    pub fn relu(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a).map(|x| if x > T::zero() { x } else { T::zero() });
        self.push(v, Op::Relu { a })
    }

    pub fn gelu(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a).map(gelu_fwd);
        self.push(v, Op::Gelu { a })
    }

    /// Layer normalization over the last axis, optional affine terms
    /// (`1 x n` each). A zero-variance row maps to zeros before the affine.
    pub fn layer_norm(
        &mut self,
        x: NodeId,
        gamma: Option<NodeId>,
        beta: Option<NodeId>,
        eps: T,
    ) -> NodeId {
        let xv = self.value(x);
        let (m, n) = (xv.rows(), xv.cols());
        if let Some(gm) = gamma {
            assert_eq!(
                self.value(gm).shape(),
                [1, n],
                "layer_norm: gamma shape {:?} does not match input {:?}",
                self.value(gm).shape(),
                xv.shape()
            );
        }
        let mut v = Tensor::zeros(m, n);
        for i in 0..m {
            let (mu, sig) = row_moments(xv.row(i), eps);
            for j in 0..n {
                let mut y = (xv.at(i, j) - mu) / sig;
                if let Some(gm) = gamma {
                    y = y * self.value(gm).at(0, j);
                }
                if let Some(bt) = beta {
                    y = y + self.value(bt).at(0, j);
                }
                *v.at_mut(i, j) = y;
            }
        }
        self.push(v, Op::LayerNorm { x, gamma, beta, eps })
    }

    /// Numerically stable softmax over each row.
    pub fn softmax_rows(&mut self, a: NodeId) -> NodeId {
        let av = self.value(a);
        let (m, n) = (av.rows(), av.cols());
        let mut v = Tensor::zeros(m, n);
        for i in 0..m {
            let row = av.row(i);
            let mut mx = row[0];
            for &x in row {
                if x > mx {
                    mx = x;
                }
            }
            let mut z = T::zero();
            for j in 0..n {
                let e = (row[j] - mx).exp();
                *v.at_mut(i, j) = e;
                z += e;
            }
            for j in 0..n {
                *v.at_mut(i, j) = v.at(i, j) / z;
            }
        }
        self.push(v, Op::SoftmaxRows { a })
    }

    /// Max over the row axis: `[n, d] -> [1, d]`. Ties resolve to the lowest
    /// row index.
    pub fn maxpool_rows(&mut self, a: NodeId) -> NodeId {
        let av = self.value(a);
        let (m, n) = (av.rows(), av.cols());
        assert!(m > 0, "maxpool_rows: empty input {:?}", av.shape());
        let mut v = Tensor::zeros(1, n);
        let mut argmax = vec![0usize; n];
        for j in 0..n {
            let mut best = av.at(0, j);
            let mut bi = 0;
            for i in 1..m {
                let x = av.at(i, j);
                if x > best {
                    best = x;
                    bi = i;
                }
            }
            *v.at_mut(0, j) = best;
            argmax[j] = bi;
        }
        self.push(v, Op::MaxPoolRows { a, argmax })
    }

    pub fn mean_all(&mut self, a: NodeId) -> NodeId {
        let av = self.value(a);
        let v = av.sum() / real::<T>(av.numel() as f64);
        self.push(Tensor::scalar(v), Op::Mean { a })
    }

    /// Mean squared error over all elements.
    pub fn mse(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (av, bv) = (self.value(a), self.value(b));
        assert_eq!(
            av.shape(),
            bv.shape(),
            "mse: shape {:?} does not match shape {:?}",
            av.shape(),
            bv.shape()
        );
        let n = real::<T>(av.numel() as f64);
        let mut s = T::zero();
        for (&x, &y) in av.data().iter().zip(bv.data()) {
            let d = x - y;
            s += d * d;
        }
        self.push(Tensor::scalar(s / n), Op::Mse { a, b })
    }

    /// Sum of squared differences (squared L2 distance) over all elements.
    pub fn sum_sq_diff(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (av, bv) = (self.value(a), self.value(b));
        assert_eq!(
            av.shape(),
            bv.shape(),
            "sum_sq_diff: shape {:?} does not match shape {:?}",
            av.shape(),
            bv.shape()
        );
        let mut s = T::zero();
        for (&x, &y) in av.data().iter().zip(bv.data()) {
            let d = x - y;
            s += d * d;
        }
        self.push(Tensor::scalar(s), Op::SumSqDiff { a, b })
    }

    pub fn concat_rows(&mut self, parts: &[NodeId]) -> NodeId {
        assert!(!parts.is_empty(), "concat_rows: no parts");
        let cols = self.value(parts[0]).cols();
        let rows: usize = parts.iter().map(|&p| self.value(p).rows()).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for &p in parts {
            let pv = self.value(p);
            assert_eq!(
                pv.cols(),
                cols,
                "concat_rows: part shape {:?} does not match width {cols}",
                pv.shape()
            );
            data.extend_from_slice(pv.data());
        }
        self.push(Tensor::from_vec(rows, cols, data), Op::ConcatRows { parts: parts.to_vec() })
    }

    pub fn slice_rows(&mut self, a: NodeId, start: usize, len: usize) -> NodeId {
        let av = self.value(a);
        assert!(
            start + len <= av.rows(),
            "slice_rows: rows {start}..{} out of shape {:?}",
            start + len,
            av.shape()
        );
        let cols = av.cols();
        let data = av.data()[start * cols..(start + len) * cols].to_vec();
        self.push(Tensor::from_vec(len, cols, data), Op::SliceRows { a, start })
    }

    pub fn concat_cols(&mut self, parts: &[NodeId]) -> NodeId {
        assert!(!parts.is_empty(), "concat_cols: no parts");
        let rows = self.value(parts[0]).rows();
        let cols: usize = parts.iter().map(|&p| self.value(p).cols()).sum();
        let mut v = Tensor::zeros(rows, cols);
        let mut ofs = 0;
        for &p in parts {
            let pv = self.value(p);
            assert_eq!(
                pv.rows(),
                rows,
                "concat_cols: part shape {:?} does not match height {rows}",
                pv.shape()
            );
            for i in 0..rows {
                v.row_mut(i)[ofs..ofs + pv.cols()].copy_from_slice(pv.row(i));
            }
            ofs += pv.cols();
        }
        self.push(v, Op::ConcatCols { parts: parts.to_vec() })
    }

    pub fn slice_cols(&mut self, a: NodeId, start: usize, len: usize) -> NodeId {
        let av = self.value(a);
        assert!(
            start + len <= av.cols(),
            "slice_cols: cols {start}..{} out of shape {:?}",
            start + len,
            av.shape()
        );
        let mut v = Tensor::zeros(av.rows(), len);
        for i in 0..av.rows() {
            v.row_mut(i).copy_from_slice(&av.row(i)[start..start + len]);
        }
        self.push(v, Op::SliceCols { a, start })
    }

    pub fn reshape(&mut self, a: NodeId, rows: usize, cols: usize) -> NodeId {
        let v = self.value(a).reshaped(rows, cols);
        self.push(v, Op::Reshape { a })
    }

    /// Records an externally computed op with its own backward rule.
    pub fn custom(&mut self, inputs: &[NodeId], value: Tensor<T>, op: Box<dyn CustomOp<T>>) -> NodeId {
        self.push(value, Op::Custom { inputs: inputs.to_vec(), op })
    }

    // ---- backward ----

    /// Reverse pass from a scalar output. Gradients of all reachable nodes
    /// are accumulated; fetch parameter gradients with [`Self::param_grads`].
    pub fn backward(&mut self, out: NodeId) {
        assert!(self.grad_enabled, "backward on a no-grad graph");
        let outv = self.value(out);
        assert_eq!(outv.shape(), [1, 1], "backward root must be scalar, got {:?}", outv.shape());
        self.grads.clear();
        self.grads.resize(self.nodes.len(), None);
        self.grads[out] = Some(Tensor::scalar(T::one()));

        for id in (0..self.nodes.len()).rev() {
            let Some(g) = self.grads[id].take() else { continue };
            self.propagate(id, &g);
            self.grads[id] = Some(g);
        }
    }

    fn accum(&mut self, id: NodeId, g: Tensor<T>) {
        match &mut self.grads[id] {
            Some(acc) => acc.add_scaled(&g, T::one()),
            slot @ None => *slot = Some(g),
        }
    }

    fn propagate(&mut self, id: NodeId, g: &Tensor<T>) {
        // Values are read before mutation of grads; clone handles where the
        // borrow checker needs it (all small relative to the matmuls).
        enum Queued<T> {
            One(NodeId, Tensor<T>),
            Two(NodeId, Tensor<T>, NodeId, Tensor<T>),
            Many(Vec<(NodeId, Tensor<T>)>),
            None,
        }
        let queued = match &self.nodes[id].op {
            Op::Leaf | Op::Param(_) => Queued::None,
            Op::MatMul { a, b, ta, tb } => {
                let (a, b, ta, tb) = (*a, *b, *ta, *tb);
                let da = matmul(g, self.value(b), false, !tb);
                let db = matmul(self.value(a), g, !ta, false);
                let da = if ta { da.transposed() } else { da };
                let db = if tb { db.transposed() } else { db };
                Queued::Two(a, da, b, db)
            }
            Op::Add { a, b } => Queued::Two(*a, g.clone(), *b, g.clone()),
            Op::Sub { a, b } => Queued::Two(*a, g.clone(), *b, g.scale(-T::one())),
            Op::Mul { a, b } => {
                let (a, b) = (*a, *b);
                let da = g.zip_map(self.value(b), |gv, bv| gv * bv);
                let db = g.zip_map(self.value(a), |gv, av| gv * av);
                Queued::Two(a, da, b, db)
            }
            Op::AddRow { a, row } => {
                let (a, row) = (*a, *row);
                let mut dr = Tensor::zeros(1, g.cols());
                for i in 0..g.rows() {
                    for (acc, &gv) in dr.row_mut(0).iter_mut().zip(g.row(i)) {
                        *acc += gv;
                    }
                }
                Queued::Two(a, g.clone(), row, dr)
            }
            Op::Scale { a, c } => Queued::One(*a, g.scale(*c)),
            Op::Relu { a } => {
                let a = *a;
                let da = g.zip_map(self.value(a), |gv, x| if x > T::zero() { gv } else { T::zero() });
                Queued::One(a, da)
            }
            Op::Gelu { a } => {
                let a = *a;
                let da = g.zip_map(self.value(a), |gv, x| gv * gelu_bwd(x));
                Queued::One(a, da)
            }
            Op::LayerNorm { x, gamma, beta, eps } => {
                let (x, gamma, beta, eps) = (*x, *gamma, *beta, *eps);
                let xv = self.value(x).clone();
                let (m, n) = (xv.rows(), xv.cols());
                let nn = real::<T>(n as f64);
                let mut dx = Tensor::zeros(m, n);
                let mut dgamma = Tensor::zeros(1, n);
                let mut dbeta = Tensor::zeros(1, n);
                for i in 0..m {
                    let (mu, sig) = row_moments(xv.row(i), eps);
                    // h = g * gamma; dx = (h - mean(h) - xhat * mean(h*xhat)) / sig
                    let mut mean_h = T::zero();
                    let mut mean_hx = T::zero();
                    let mut h = vec![T::zero(); n];
                    let mut xh = vec![T::zero(); n];
                    for j in 0..n {
                        let xhat = (xv.at(i, j) - mu) / sig;
                        let gv = g.at(i, j);
                        let gm = match gamma {
                            Some(gm) => self.value(gm).at(0, j),
                            None => T::one(),
                        };
                        h[j] = gv * gm;
                        xh[j] = xhat;
                        mean_h += h[j];
                        mean_hx += h[j] * xhat;
                        *dgamma.at_mut(0, j) += gv * xhat;
                        *dbeta.at_mut(0, j) += gv;
                    }
                    mean_h = mean_h / nn;
                    mean_hx = mean_hx / nn;
                    for j in 0..n {
                        *dx.at_mut(i, j) = (h[j] - mean_h - xh[j] * mean_hx) / sig;
                    }
                }
                let mut outs = vec![(x, dx)];
                if let Some(gm) = gamma {
                    outs.push((gm, dgamma));
                }
                if let Some(bt) = beta {
                    outs.push((bt, dbeta));
                }
                Queued::Many(outs)
            }
            Op::SoftmaxRows { a } => {
                let a = *a;
                let yv = match &self.nodes[id].value {
                    Value::Owned(t) => t.clone(),
                    Value::Borrowed(t) => (*t).clone(),
                };
                let (m, n) = (yv.rows(), yv.cols());
                let mut dx = Tensor::zeros(m, n);
                for i in 0..m {
                    let mut dot = T::zero();
                    for j in 0..n {
                        dot += g.at(i, j) * yv.at(i, j);
                    }
                    for j in 0..n {
                        *dx.at_mut(i, j) = yv.at(i, j) * (g.at(i, j) - dot);
                    }
                }
                Queued::One(a, dx)
            }
            Op::MaxPoolRows { a, argmax } => {
                let a = *a;
                let av = self.value(a);
                let mut dx = Tensor::zeros(av.rows(), av.cols());
                for (j, &i) in argmax.iter().enumerate() {
                    *dx.at_mut(i, j) = g.at(0, j);
                }
                Queued::One(a, dx)
            }
            Op::Mean { a } => {
                let a = *a;
                let av = self.value(a);
                let s = g.item() / real::<T>(av.numel() as f64);
                Queued::One(a, Tensor::filled(av.rows(), av.cols(), s))
            }
            Op::Mse { a, b } => {
                let (a, b) = (*a, *b);
                let n = real::<T>(self.value(a).numel() as f64);
                let c = g.item() * real::<T>(2.0) / n;
                let da = self.value(a).zip_map(self.value(b), |x, y| (x - y) * c);
                let db = da.scale(-T::one());
                Queued::Two(a, da, b, db)
            }
            Op::SumSqDiff { a, b } => {
                let (a, b) = (*a, *b);
                let c = g.item() * real::<T>(2.0);
                let da = self.value(a).zip_map(self.value(b), |x, y| (x - y) * c);
                let db = da.scale(-T::one());
                Queued::Two(a, da, b, db)
            }
            Op::ConcatRows { parts } => {
                let parts = parts.clone();
                let mut outs = Vec::with_capacity(parts.len());
                let mut start = 0;
                for p in parts {
                    let rows = self.value(p).rows();
                    let cols = g.cols();
                    let data = g.data()[start * cols..(start + rows) * cols].to_vec();
                    outs.push((p, Tensor::from_vec(rows, cols, data)));
                    start += rows;
                }
                Queued::Many(outs)
            }
            Op::SliceRows { a, start } => {
                let (a, start) = (*a, *start);
                let av = self.value(a);
                let mut dx = Tensor::zeros(av.rows(), av.cols());
                let cols = av.cols();
                dx.data_mut()[start * cols..start * cols + g.numel()].copy_from_slice(g.data());
                Queued::One(a, dx)
            }
            Op::ConcatCols { parts } => {
                let parts = parts.clone();
                let mut outs = Vec::with_capacity(parts.len());
                let mut ofs = 0;
                for p in parts {
                    let (rows, cols) = (self.value(p).rows(), self.value(p).cols());
                    let mut dp = Tensor::zeros(rows, cols);
                    for i in 0..rows {
                        dp.row_mut(i).copy_from_slice(&g.row(i)[ofs..ofs + cols]);
                    }
                    outs.push((p, dp));
                    ofs += cols;
                }
                Queued::Many(outs)
            }
            Op::SliceCols { a, start } => {
                let (a, start) = (*a, *start);
                let av = self.value(a);
                let mut dx = Tensor::zeros(av.rows(), av.cols());
                for i in 0..g.rows() {
                    dx.row_mut(i)[start..start + g.cols()].copy_from_slice(g.row(i));
                }
                Queued::One(a, dx)
            }
            Op::Reshape { a } => {
                let a = *a;
                let av = self.value(a);
                Queued::One(a, g.reshaped(av.rows(), av.cols()))
            }
            Op::Custom { inputs, op } => {
                let inputs = inputs.clone();
                let vals: Vec<&Tensor<T>> = inputs.iter().map(|&i| self.value(i)).collect();
                let grads = op.backward(g, &vals);
                assert_eq!(
                    grads.len(),
                    inputs.len(),
                    "custom op {} returned {} grads for {} inputs",
                    op.name(),
                    grads.len(),
                    inputs.len()
                );
                Queued::Many(inputs.into_iter().zip(grads).collect())
            }
        };
        match queued {
            Queued::None => {}
            Queued::One(a, da) => self.accum(a, da),
            Queued::Two(a, da, b, db) => {
                self.accum(a, da);
                self.accum(b, db);
            }
            Queued::Many(list) => {
                for (n, d) in list {
                    self.accum(n, d);
                }
            }
        }
    }

    /// Gradient of any node after [`Self::backward`]; `None` if unreachable.
    pub fn grad(&self, id: NodeId) -> Option<&Tensor<T>> {
        self.grads.get(id).and_then(|g| g.as_ref())
    }

    /// Per-parameter gradients accumulated by the last backward pass. A
    /// parameter referenced through several nodes appears once per node;
    /// callers sum by index (ModelState::accumulate_grads does).
    pub fn param_grads(&self) -> Vec<(usize, Tensor<T>)> {
        let mut out = Vec::new();
        for (id, node) in self.nodes.iter().enumerate() {
            if let Op::Param(idx) = node.op {
                if let Some(g) = self.grads.get(id).and_then(|g| g.as_ref()) {
                    out.push((idx, g.clone()));
                }
            }
        }
        out
    }
}

#[inline]
fn row_moments<T: Real>(row: &[T], eps: T) -> (T, T) {
    let n = real::<T>(row.len() as f64);
    let mut mu = T::zero();
    for &x in row {
        mu += x;
    }
    mu = mu / n;
    let mut var = T::zero();
    for &x in row {
        let d = x - mu;
        var += d * d;
    }
    var = var / n;
    (mu, (var + eps).sqrt())
}

#[inline]
fn gelu_fwd<T: Real>(x: T) -> T {
    let c = real::<T>(0.797_884_560_802_865_4); // sqrt(2/pi)
    let k = real::<T>(0.044_715);
    let u = c * (x + k * x * x * x);
    let half = real::<T>(0.5);
    half * x * (T::one() + u.tanh())
}

#[inline]
fn gelu_bwd<T: Real>(x: T) -> T {
    let c = real::<T>(0.797_884_560_802_865_4);
    let k = real::<T>(0.044_715);
    let three = real::<T>(3.0);
    let half = real::<T>(0.5);
    let u = c * (x + k * x * x * x);
    let t = u.tanh();
    let du = c * (T::one() + three * k * x * x);
    half * (T::one() + t) + half * x * (T::one() - t * t) * du
}
