//! Named parameter storage with gradients and Adam moment buffers.

use crate::error::CoreError;
use crate::scalar::Real;
use crate::tensor::Tensor;
use std::collections::BTreeMap;

#[derive(Clone, Debug)]
pub struct Parameter<T> {
    pub name: String,
    pub value: Tensor<T>,
    pub grad: Tensor<T>,
}

/// Ordered parameter collection. Ordering is insertion order and is stable
/// across checkpoint round trips.
#[derive(Clone, Debug)]
pub struct ModelState<T: Real> {
    params: Vec<Parameter<T>>,
    by_name: BTreeMap<String, usize>,
    /// First Adam moment per parameter, same order; empty until first step.
    pub adam_m: Vec<Tensor<T>>,
    /// Second Adam moment per parameter, same order.
    pub adam_v: Vec<Tensor<T>>,
    /// Completed Adam steps (drives bias correction).
    pub adam_step: u64,
    pub rng_seed: u64,
}

impl<T: Real> ModelState<T> {
    pub fn new(rng_seed: u64) -> Self {
        Self {
            params: Vec::new(),
            by_name: BTreeMap::new(),
            adam_m: Vec::new(),
            adam_v: Vec::new(),
            adam_step: 0,
            rng_seed,
        }
    }

    /// Registers a parameter; names must be unique within a state.
    pub fn add_param(&mut self, name: &str, value: Tensor<T>) -> usize {
        assert!(
            !self.by_name.contains_key(name),
            "duplicate parameter name {name:?}"
        );
        let idx = self.params.len();
        let grad = Tensor::zeros(value.rows(), value.cols());
        self.params.push(Parameter { name: name.to_string(), value, grad });
        self.by_name.insert(name.to_string(), idx);
        idx
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn param(&self, idx: usize) -> &Parameter<T> {
        &self.params[idx]
    }

    pub fn params(&self) -> &[Parameter<T>] {
        &self.params
    }

    pub fn value(&self, idx: usize) -> &Tensor<T> {
        &self.params[idx].value
    }

    pub fn value_mut(&mut self, idx: usize) -> &mut Tensor<T> {
        &mut self.params[idx].value
    }

    pub fn grad(&self, idx: usize) -> &Tensor<T> {
        &self.params[idx].grad
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn zero_grads(&mut self) {
        for p in &mut self.params {
            p.grad.fill(T::zero());
        }
    }

    /// Adds per-parameter gradient contributions (from one backward pass).
    pub fn accumulate_grads(&mut self, grads: &[(usize, Tensor<T>)]) {
        for (idx, g) in grads {
            self.params[*idx].grad.add_scaled(g, T::one());
        }
    }

    /// Total number of scalar parameters.
    pub fn numel(&self) -> usize {
        self.params.iter().map(|p| p.value.numel()).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.params.iter().all(|p| p.value.is_finite())
    }

    pub fn grads_finite(&self) -> Result<(), CoreError> {
        for p in &self.params {
            if !p.grad.is_finite() {
                return Err(CoreError::NonFinite { what: format!("gradient of {:?}", p.name) });
            }
        }
        Ok(())
    }

    pub fn cast<U: Real>(&self) -> ModelState<U> {
        let mut out = ModelState::new(self.rng_seed);
        for p in &self.params {
            out.add_param(&p.name, p.value.cast());
        }
        out.adam_m = self.adam_m.iter().map(|t| t.cast()).collect();
        out.adam_v = self.adam_v.iter().map(|t| t.cast()).collect();
        out.adam_step = self.adam_step;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insertion_order_is_preserved() {
        let mut st = ModelState::<f32>::new(0);
        st.add_param("zz", Tensor::zeros(1, 2));
        st.add_param("aa", Tensor::zeros(2, 2));
        assert_eq!(st.param(0).name, "zz");
        assert_eq!(st.param(1).name, "aa");
        assert_eq!(st.index_of("aa"), Some(1));
    }

    #[test]
    #[should_panic(expected = "duplicate parameter name")]
    fn duplicate_names_rejected() {
        let mut st = ModelState::<f32>::new(0);
        st.add_param("w", Tensor::zeros(1, 1));
        st.add_param("w", Tensor::zeros(1, 1));
    }
}
