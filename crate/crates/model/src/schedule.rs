//! Noise schedule: per-step retention factors and their running products,
//! plus the closed-form forward corruption.

use crate::error::ModelError;
use graspgen_core::{real, Real, Tensor};

pub const DEFAULT_T: usize = 1000;
pub const DEFAULT_BETA_START: f64 = 1e-4;
pub const DEFAULT_BETA_END: f64 = 2e-2;

#[derive(Clone, Debug)]
pub struct NoiseSchedule<T> {
    t_steps: usize,
    /// alpha[t-1] is the retention at step t, t in 1..=T.
    alpha: Vec<T>,
    /// alpha_bar[t] = prod_{s<=t} alpha[s]; alpha_bar[0] = 1.
    alpha_bar: Vec<T>,
}

impl<T: Real> NoiseSchedule<T> {
    /// Linear beta ramp from `beta_start` to `beta_end` over `t_steps`.
    pub fn linear(t_steps: usize, beta_start: f64, beta_end: f64) -> Result<Self, ModelError> {
        if t_steps == 0 {
            return Err(ModelError::BadSchedule("t_steps must be positive".into()));
        }
        if !(0.0 < beta_start && beta_start <= beta_end && beta_end < 1.0) {
            return Err(ModelError::BadSchedule(format!(
                "betas must satisfy 0 < start <= end < 1, got [{beta_start}, {beta_end}]"
            )));
        }
        let mut alpha = Vec::with_capacity(t_steps);
        let mut alpha_bar = Vec::with_capacity(t_steps + 1);
        alpha_bar.push(T::one());
        for t in 0..t_steps {
            let frac = if t_steps == 1 { 0.0 } else { t as f64 / (t_steps - 1) as f64 };
            let beta = beta_start + (beta_end - beta_start) * frac;
            let a = real::<T>(1.0 - beta);
            alpha.push(a);
            alpha_bar.push(*alpha_bar.last().unwrap() * a);
        }
        Ok(Self { t_steps, alpha, alpha_bar })
    }

    pub fn default_schedule() -> Self {
        Self::linear(DEFAULT_T, DEFAULT_BETA_START, DEFAULT_BETA_END).unwrap()
    }

    pub fn t_steps(&self) -> usize {
        self.t_steps
    }

    /// Retention at step `t` (1-based).
    pub fn alpha(&self, t: usize) -> T {
        self.alpha[t - 1]
    }

    pub fn beta(&self, t: usize) -> T {
        T::one() - self.alpha[t - 1]
    }

    /// Cumulative retention up to `t` (0 gives 1).
    pub fn alpha_bar(&self, t: usize) -> T {
        self.alpha_bar[t]
    }

    pub fn sqrt_alpha_bar(&self, t: usize) -> T {
        self.alpha_bar[t].sqrt()
    }

    pub fn sqrt_one_minus_alpha_bar(&self, t: usize) -> T {
        (T::one() - self.alpha_bar[t]).sqrt()
    }

    /// Closed-form forward corruption to step `t`. `t = 0` returns the input
    /// bit-for-bit.
    pub fn diffuse(&self, z0: &Tensor<T>, t: usize, noise: &Tensor<T>) -> Tensor<T> {
        assert!(t <= self.t_steps, "t = {t} out of range 0..={}", self.t_steps);
        if t == 0 {
            return z0.clone();
        }
        let a = self.sqrt_alpha_bar(t);
        let b = self.sqrt_one_minus_alpha_bar(t);
        z0.zip_map(noise, |z, e| a * z + b * e)
    }

    /// Corrupts the two modalities independently: the hand token to
    /// `t_hand`, the object tokens to `t_obj`. A zero timestep passes that
    /// part through bit-for-bit (the conditioning case).
    pub fn diffuse_async(
        &self,
        code: &crate::latent::LatentCode<T>,
        t_hand: usize,
        t_obj: usize,
        noise_hand: &Tensor<T>,
        noise_obj: &Tensor<T>,
    ) -> crate::latent::LatentCode<T> {
        crate::latent::LatentCode::new(
            self.diffuse(&code.hand, t_hand, noise_hand),
            self.diffuse(&code.object, t_obj, noise_obj),
        )
    }

    /// Coefficients of the posterior mean `coef0 * z0_hat + coef_t * z_t`
    /// and its variance, for stepping t -> t-1.
    pub fn posterior(&self, t: usize) -> (T, T, T) {
        assert!((1..=self.t_steps).contains(&t));
        let ab_t = self.alpha_bar(t);
        let ab_prev = self.alpha_bar(t - 1);
        let beta_t = self.beta(t);
        let alpha_t = self.alpha(t);
        let coef0 = ab_prev.sqrt() * beta_t / (T::one() - ab_t);
        let coef_t = alpha_t.sqrt() * (T::one() - ab_prev) / (T::one() - ab_t);
        let var = (T::one() - ab_prev) / (T::one() - ab_t) * beta_t;
        (coef0, coef_t, var)
    }
}

/// Self-check utilities shared by the unit tests, the acceptance suite and
/// the CLI selftest.
pub mod verify {
    use super::NoiseSchedule;
    use graspgen_core::rng::{derive_rng, normal};

    /// Largest deviation of alpha_bar from the explicit running product of
    /// alpha, in f64.
    pub fn alpha_bar_product_deviation() -> f64 {
        let s = NoiseSchedule::<f64>::default_schedule();
        let mut prod = 1.0f64;
        let mut worst = (s.alpha_bar(0) - 1.0).abs();
        for t in 1..=s.t_steps() {
            prod *= s.alpha(t);
            worst = worst.max((s.alpha_bar(t) - prod).abs());
        }
        worst
    }

    /// Worst scale-relative deviation of the iterated Markov chain's mean
    /// and variance from the closed form over `n` draws (antithetic pairs)
    /// at the given timesteps. Deviations are measured against the
    /// distribution scale `max(|mean|, std)`, which keeps the comparison
    /// meaningful when one statistic is near zero.
    pub fn iterated_vs_closed_form_deviation(seed: u64, n: usize, ts: &[usize]) -> f64 {
        let s = NoiseSchedule::<f64>::default_schedule();
        let mut worst = 0.0f64;
        for &t in ts {
            let mut rng = derive_rng(seed, &[t as u64]);
            let z0 = 1.7f64; // fixed start; mean/var are conditional on it
            let mut mean_it = 0.0;
            let mut m2_it = 0.0;
            let mut noise = vec![0.0f64; t];
            for _ in 0..n / 2 {
                for e in noise.iter_mut() {
                    *e = normal(&mut rng);
                }
                for sign in [1.0, -1.0] {
                    let mut z = z0;
                    for step in 1..=t {
                        z = s.alpha(step).sqrt() * z
                            + (1.0 - s.alpha(step)).sqrt() * sign * noise[step - 1];
                    }
                    mean_it += z;
                    m2_it += z * z;
                }
            }
            let nf = (2 * (n / 2)) as f64;
            let mean_it = mean_it / nf;
            let var_it = m2_it / nf - mean_it * mean_it;
            let mean_cf = s.sqrt_alpha_bar(t) * z0;
            let var_cf = 1.0 - s.alpha_bar(t);
            let scale = mean_cf.abs().max(var_cf.sqrt());
            worst = worst.max((mean_it - mean_cf).abs() / scale);
            worst = worst.max((var_it - var_cf).abs() / (scale * scale));
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use graspgen_core::rng::{derive_rng, normal, normal_tensor};

    #[test]
    fn alpha_bar_is_running_product_within_1e12() {
        let s = NoiseSchedule::<f64>::default_schedule();
        let mut prod = 1.0f64;
        assert_eq!(s.alpha_bar(0), 1.0);
        for t in 1..=s.t_steps() {
            prod *= s.alpha(t);
            assert!((s.alpha_bar(t) - prod).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn alpha_bar_strictly_decreases() {
        let s = NoiseSchedule::<f64>::default_schedule();
        for t in 1..=s.t_steps() {
            assert!(s.alpha_bar(t) < s.alpha_bar(t - 1));
        }
    }

    #[test]
    fn diffuse_at_zero_is_identity_bitwise() {
        let mut rng = derive_rng(1, &[1]);
        let z0 = normal_tensor::<f32>(4, 8, &mut rng);
        let noise = normal_tensor::<f32>(4, 8, &mut rng);
        assert_eq!(s_diffuse(&z0, 0, &noise), z0);
    }

    fn s_diffuse(z0: &Tensor<f32>, t: usize, n: &Tensor<f32>) -> Tensor<f32> {
        NoiseSchedule::<f32>::default_schedule().diffuse(z0, t, n)
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn diffuse_rejects_out_of_range_t() {
        let z0 = Tensor::<f64>::zeros(1, 4);
        let n = Tensor::<f64>::zeros(1, 4);
        NoiseSchedule::<f64>::default_schedule().diffuse(&z0, 1001, &n);
    }

    #[test]
    fn terminal_step_decorrelates_from_the_input() {
        // corr(z_T, z0) over many scalar draws should be near zero.
        let s = NoiseSchedule::<f64>::default_schedule();
        let mut rng = derive_rng(2, &[7]);
        let n = 10_000;
        let mut sum_z0 = 0.0;
        let mut sum_zt = 0.0;
        let mut sum_z0z0 = 0.0;
        let mut sum_ztzt = 0.0;
        let mut sum_z0zt = 0.0;
        for _ in 0..n {
            let z0: f64 = normal(&mut rng);
            let e: f64 = normal(&mut rng);
            let zt = s.sqrt_alpha_bar(s.t_steps()) * z0 + s.sqrt_one_minus_alpha_bar(s.t_steps()) * e;
            sum_z0 += z0;
            sum_zt += zt;
            sum_z0z0 += z0 * z0;
            sum_ztzt += zt * zt;
            sum_z0zt += z0 * zt;
        }
        let nf = n as f64;
        let cov = sum_z0zt / nf - (sum_z0 / nf) * (sum_zt / nf);
        let v0 = sum_z0z0 / nf - (sum_z0 / nf).powi(2);
        let vt = sum_ztzt / nf - (sum_zt / nf).powi(2);
        let corr = cov / (v0 * vt).sqrt();
        assert!(corr.abs() < 0.05, "corr {corr}");
    }

    #[test]
    fn closed_form_matches_iterated_markov_chain() {
        // Iterating z_t = sqrt(alpha_t) z_{t-1} + sqrt(1-alpha_t) e matches
        // the closed form in mean and variance over 10^4 draws.
        let worst = verify::iterated_vs_closed_form_deviation(8, 10_000, &[1, 500, 1000]);
        assert!(worst <= 0.02, "worst relative deviation {worst}");
    }

    #[test]
    fn alpha_bar_product_helper_agrees() {
        assert!(verify::alpha_bar_product_deviation() < 1e-12);
    }
}
