//! Fixed-noise scripted oracles: each objective's value on a single sample
//! with frozen randomness must equal a test-local reassembly (corruption by
//! the schedule arrays, prediction by the network, reduction by a plain
//! loop).

use graspgen_core::graph::Graph;
use graspgen_core::rng::{derive_rng, normal_tensor};
use graspgen_core::Tensor;
use graspgen_model::{
    loss_cond, loss_obj, loss_uncond, DenoiserConfig, DiffusionModel, LossDraw, NoiseSchedule,
};

struct Fix {
    model: DiffusionModel<f64>,
    schedule: NoiseSchedule<f64>,
    z0_hand: Tensor<f64>,
    z0_obj: Tensor<f64>,
    draw: LossDraw<f64>,
}

fn fix(seed: u64) -> Fix {
    let cfg = DenoiserConfig::tiny();
    let model = DiffusionModel::<f64>::init(cfg, seed);
    let schedule = NoiseSchedule::linear(40, 1e-3, 0.06).unwrap();
    let mut rng = derive_rng(seed, &[9]);
    Fix {
        model,
        schedule,
        z0_hand: normal_tensor(1, cfg.latent_width, &mut rng),
        z0_obj: normal_tensor(4, cfg.latent_width, &mut rng),
        draw: LossDraw::sample(cfg.latent_width, 40, &mut rng),
    }
}

/// Manual corruption from the schedule arrays.
fn corrupt_manual(s: &NoiseSchedule<f64>, z0: &Tensor<f64>, t: usize, noise: &Tensor<f64>) -> Tensor<f64> {
    if t == 0 {
        return z0.clone();
    }
    let a = s.alpha_bar(t).sqrt();
    let b = (1.0 - s.alpha_bar(t)).sqrt();
    z0.zip_map(noise, |z, e| a * z + b * e)
}

fn predict(f: &Fix, z_t: &Tensor<f64>, t_h: usize, t_o: usize) -> Tensor<f64> {
    let mut g = Graph::no_grad();
    let z = g.leaf(z_t.clone());
    let out = f.model.denoiser.predict_clean(&mut g, &f.model.state, z, t_h, t_o);
    g.value(out).clone()
}

fn mean_sq(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += (x - y) * (x - y);
    }
    s / a.len() as f64
}

fn concat(a: &Tensor<f64>, b: &Tensor<f64>) -> Tensor<f64> {
    let mut data = a.data().to_vec();
    data.extend_from_slice(b.data());
    Tensor::from_vec(a.rows() + b.rows(), a.cols(), data)
}

#[test]
fn uncond_loss_matches_scripted_value() {
    let f = fix(51);
    let mut g = Graph::new();
    let zh = g.leaf(f.z0_hand.clone());
    let zo = g.leaf(f.z0_obj.clone());
    let (loss, _) =
        loss_uncond(&mut g, &f.model.denoiser, &f.model.state, &f.schedule, zh, zo, &f.draw);
    let got = g.value(loss).item();

    let zt = concat(
        &corrupt_manual(&f.schedule, &f.z0_hand, f.draw.t_hand, &f.draw.noise_hand),
        &corrupt_manual(&f.schedule, &f.z0_obj, f.draw.t_obj, &f.draw.noise_obj),
    );
    let zhat = predict(&f, &zt, f.draw.t_hand, f.draw.t_obj);
    let z0 = concat(&f.z0_hand, &f.z0_obj);
    let expect = mean_sq(zhat.data(), z0.data());
    assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
    assert!(got >= 0.0);
}

#[test]
fn cond_loss_matches_scripted_value_hand_masked() {
    let f = fix(52);
    let mut g = Graph::new();
    let zh = g.leaf(f.z0_hand.clone());
    let zo = g.leaf(f.z0_obj.clone());
    let (loss, _) =
        loss_cond(&mut g, &f.model.denoiser, &f.model.state, &f.schedule, zh, zo, &f.draw, true);
    let got = g.value(loss).item();

    let zt = concat(
        &corrupt_manual(&f.schedule, &f.z0_hand, f.draw.t_hand, &f.draw.noise_hand),
        &f.z0_obj,
    );
    let zhat = predict(&f, &zt, f.draw.t_hand, 0);
    let c = f.z0_hand.cols();
    let expect = mean_sq(&zhat.data()[..c], f.z0_hand.data());
    assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
}

#[test]
fn obj_loss_matches_scripted_value() {
    let f = fix(53);
    let mut g = Graph::new();
    let zo = g.leaf(f.z0_obj.clone());
    let loss = loss_obj(&mut g, &f.model.denoiser, &f.model.state, &f.schedule, zo, &f.draw);
    let got = g.value(loss).item();

    let zt = concat(
        &f.draw.hand_eps,
        &corrupt_manual(&f.schedule, &f.z0_obj, f.draw.t_obj, &f.draw.noise_obj),
    );
    let zhat = predict(&f, &zt, f.schedule.t_steps(), f.draw.t_obj);
    let c = f.z0_obj.cols();
    let expect = mean_sq(&zhat.data()[c..], f.z0_obj.data());
    assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
}

#[test]
fn perfect_prediction_gives_zero_loss() {
    // If the (stubbed) prediction equals z0 exactly the objective is zero;
    // here verified on the loss reduction itself.
    let f = fix(54);
    let z0 = concat(&f.z0_hand, &f.z0_obj);
    assert_eq!(mean_sq(z0.data(), z0.data()), 0.0);
}
