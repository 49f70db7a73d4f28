//! Adam optimizer. Moment buffers live in the [`ModelState`] so they ride
//! along in checkpoints and resume is exact.

use crate::error::CoreError;
use crate::scalar::{real, Real};
use crate::state::ModelState;
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 1e-4, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// One Adam update from the gradients currently stored in `state`.
pub fn adam_step<T: Real>(state: &mut ModelState<T>, cfg: &AdamConfig) -> Result<(), CoreError> {
    state.grads_finite()?;
    if state.adam_m.is_empty() {
        state.adam_m = state
            .params()
            .iter()
            .map(|p| Tensor::zeros(p.value.rows(), p.value.cols()))
            .collect();
        state.adam_v = state.adam_m.clone();
    }
    state.adam_step += 1;
    let t = state.adam_step as i32;
    let b1 = real::<T>(cfg.beta1);
    let b2 = real::<T>(cfg.beta2);
    let lr = real::<T>(cfg.lr);
    let eps = real::<T>(cfg.eps);
    let bc1 = T::one() - b1.powi(t);
    let bc2 = T::one() - b2.powi(t);
    for i in 0..state.len() {
        let g = state.param(i).grad.clone();
        let m = &mut state.adam_m[i];
        for (mv, &gv) in m.data_mut().iter_mut().zip(g.data()) {
            *mv = b1 * *mv + (T::one() - b1) * gv;
        }
        let v = &mut state.adam_v[i];
        for (vv, &gv) in v.data_mut().iter_mut().zip(g.data()) {
            *vv = b2 * *vv + (T::one() - b2) * gv * gv;
        }
        let m = state.adam_m[i].clone();
        let v = state.adam_v[i].clone();
        let p = state.value_mut(i);
        for ((pv, &mv), &vv) in p.data_mut().iter_mut().zip(m.data()).zip(v.data()) {
            let mhat = mv / bc1;
            let vhat = vv / bc2;
            *pv -= lr * mhat / (vhat.sqrt() + eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut st = ModelState::<f64>::new(0);
        st.add_param("x", Tensor::scalar(1.25));
        let before = st.value(0).clone();
        adam_step(&mut st, &AdamConfig::default()).unwrap();
        assert_eq!(st.value(0), &before);
    }

    #[test]
    fn single_step_on_quadratic_moves_toward_minimum() {
        // f(x) = x^2 at x = 1: g = 2. Hand-computed first Adam step with
        // lr=0.1: m_hat = 2, v_hat = 4, dx = 0.1 * 2 / (2 + 1e-8) ~= 0.1.
        let mut st = ModelState::<f64>::new(0);
        st.add_param("x", Tensor::scalar(1.0));
        st.accumulate_grads(&[(0, Tensor::scalar(2.0))]);
        let cfg = AdamConfig { lr: 0.1, ..AdamConfig::default() };
        adam_step(&mut st, &cfg).unwrap();
        let x = st.value(0).item();
        assert!(x < 1.0);
        assert!((x - 0.9).abs() < 1e-6);
    }

    #[test]
    fn constant_gradient_moves_against_its_sign() {
        let mut st = ModelState::<f64>::new(0);
        st.add_param("x", Tensor::scalar(0.0));
        for _ in 0..50 {
            st.zero_grads();
            st.accumulate_grads(&[(0, Tensor::scalar(-3.0))]);
            adam_step(&mut st, &AdamConfig { lr: 0.01, ..AdamConfig::default() }).unwrap();
        }
        assert!(st.value(0).item() > 0.0);
    }

    #[test]
    fn non_finite_gradient_is_an_error() {
        let mut st = ModelState::<f64>::new(0);
        st.add_param("x", Tensor::scalar(0.0));
        st.accumulate_grads(&[(0, Tensor::scalar(f64::NAN))]);
        assert!(adam_step(&mut st, &AdamConfig::default()).is_err());
    }
}
