//! Central-difference verification of analytic gradients.
//!
//! Run in f64. The closure evaluates the scalar objective from the current
//! state and (on request) reports analytic parameter gradients from one
//! backward pass. The checker then perturbs sampled parameter entries and
//! compares.

use crate::error::CoreError;
use crate::rng::derive_rng;
use crate::state::ModelState;
use crate::tensor::Tensor;
use rand::Rng;

/// Scalar objective evaluation: value plus analytic per-parameter gradients.
pub struct Eval {
    pub value: f64,
    pub grads: Vec<(usize, Tensor<f64>)>,
}

/// Maximum relative error `|analytic - central_diff| / max(1, |analytic|)`
/// over sampled parameter entries.
///
/// `eps` must lie in `[1e-7, 1e-4]`; at most `max_entries_per_param` entries
/// of each parameter are probed (all of them for small parameters).
pub fn grad_check<F>(
    state: &mut ModelState<f64>,
    eps: f64,
    max_entries_per_param: usize,
    seed: u64,
    mut f: F,
) -> Result<f64, CoreError>
where
    F: FnMut(&ModelState<f64>) -> Eval,
{
    if !(1e-7..=1e-4).contains(&eps) {
        return Err(CoreError::OutOfRange {
            what: "grad_check eps".into(),
            value: eps,
            lo: 1e-7,
            hi: 1e-4,
        });
    }
    let base = f(state);
    if !base.value.is_finite() {
        return Err(CoreError::NonFinite { what: "grad_check objective".into() });
    }
    // Sum duplicate contributions (a parameter used through several nodes).
    let mut analytic: Vec<Tensor<f64>> = state
        .params()
        .iter()
        .map(|p| Tensor::zeros(p.value.rows(), p.value.cols()))
        .collect();
    for (idx, g) in &base.grads {
        analytic[*idx].add_scaled(g, 1.0);
    }

    let mut rng = derive_rng(seed, &[0x6763]);
    let mut max_rel = 0.0f64;
    for p in 0..state.len() {
        let numel = state.value(p).numel();
        let probes: Vec<usize> = if numel <= max_entries_per_param {
            (0..numel).collect()
        } else {
            (0..max_entries_per_param).map(|_| rng.gen_range(0..numel)).collect()
        };
        for e in probes {
            let orig = state.value(p).data()[e];
            state.value_mut(p).data_mut()[e] = orig + eps;
            let fp = f(state).value;
            state.value_mut(p).data_mut()[e] = orig - eps;
            let fm = f(state).value;
            state.value_mut(p).data_mut()[e] = orig;
            if !fp.is_finite() || !fm.is_finite() {
                return Err(CoreError::NonFinite { what: "grad_check objective".into() });
            }
            let fd = (fp - fm) / (2.0 * eps);
            let an = analytic[p].data()[e];
            let rel = (an - fd).abs() / an.abs().max(1.0);
            if rel > max_rel {
                max_rel = rel;
            }
        }
    }
    Ok(max_rel)
}
