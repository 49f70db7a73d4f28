//! Determinism and freeze contracts for the combined trainer: identical
//! seeds give bit-identical trajectories, resume replays exactly, the
//! frozen codec never changes, and conditional sampling clamps the object
//! tokens bit-exactly at every step.

use graspgen_core::rng::{derive_rng, normal_tensor, uniform};
use graspgen_core::Tensor;
use graspgen_geometry::PointCloud;
use graspgen_hand::HandTemplate;
use graspgen_model::{
    prepare_object, prepare_paired, train, CodecConfig, CodecModel, DenoiserConfig,
    DiffusionModel, NoiseSchedule, RenoiseMode, Sampler, TrainConfig,
};

fn tiny_setup() -> (CodecModel<f32>, Vec<graspgen_model::PairedSample<f32>>, Vec<graspgen_model::ObjectSample<f32>>, TrainConfig) {
    let den_cfg = DenoiserConfig::tiny();
    let codec_cfg = CodecConfig {
        point_hidden: 8,
        point_feat: den_cfg.latent_width,
        n_tokens: 4,
        attn_dim: 8,
        decoder_hidden: 24,
        n_points: 32,
    };
    let mut codec = CodecModel::<f32>::init(codec_cfg, 3);
    codec.freeze();
    let tpl = HandTemplate::standard();
    let mut rng = derive_rng(19, &[4]);
    let mut paired = Vec::new();
    let mut objects = Vec::new();
    for _ in 0..6 {
        let mut y = normal_tensor::<f32>(1, 51, &mut rng).scale(0.3);
        for v in y.data_mut()[48..].iter_mut() {
            *v *= 0.3;
        }
        let cloud = PointCloud::from_tensor(&normal_tensor::<f32>(32, 3, &mut rng).scale(0.05));
        paired.push(prepare_paired(&y, &cloud, &codec, &tpl).unwrap());
        let cloud2 = PointCloud::from_tensor(&normal_tensor::<f32>(32, 3, &mut rng).scale(0.05));
        objects.push(prepare_object(&cloud2, &codec).unwrap());
    }
    let cfg = TrainConfig {
        steps: 6,
        batch_paired: 2,
        batch_obj: 2,
        lr: 1e-3,
        t_steps: 25,
        beta_start: 1e-3,
        beta_end: 0.08,
        denoiser: den_cfg,
        seed: 77,
        checkpoint_every: 100,
        ..TrainConfig::default()
    };
    (codec, paired, objects, cfg)
}

fn run(steps: usize, resume_at: Option<usize>) -> (Vec<f64>, DiffusionModel<f32>) {
    let (codec, paired, objects, mut cfg) = tiny_setup();
    let tpl = HandTemplate::standard();
    let mut model = DiffusionModel::<f32>::init(cfg.denoiser, cfg.seed);
    let mut losses = Vec::new();
    cfg.steps = resume_at.unwrap_or(steps);
    train(&mut model, &codec, &tpl, &paired, &objects, &cfg, |_, l, _| {
        losses.push(l.total);
        Ok(())
    })
    .unwrap();
    if let Some(_k) = resume_at {
        // Continue to the full horizon from the same model state, as a
        // resumed run would after loading the checkpoint.
        cfg.steps = steps;
        train(&mut model, &codec, &tpl, &paired, &objects, &cfg, |_, l, _| {
            losses.push(l.total);
            Ok(())
        })
        .unwrap();
    }
    (losses, model)
}

#[test]
fn same_seed_same_trajectory_bitwise() {
    let (l1, m1) = run(6, None);
    let (l2, m2) = run(6, None);
    assert_eq!(l1, l2);
    for i in 0..m1.state.len() {
        assert_eq!(m1.state.value(i), m2.state.value(i), "{}", m1.state.param(i).name);
    }
}

#[test]
fn split_run_replays_the_straight_run_exactly() {
    let (l_straight, m_straight) = run(6, None);
    let (l_split, m_split) = run(6, Some(3));
    assert_eq!(l_straight, l_split);
    for i in 0..m_straight.state.len() {
        assert_eq!(m_straight.state.value(i), m_split.state.value(i));
    }
    assert_eq!(m_straight.state.adam_step, m_split.state.adam_step);
}

#[test]
fn frozen_codec_is_bit_identical_after_training() {
    let (codec, paired, objects, cfg) = tiny_setup();
    let before: Vec<Tensor<f32>> =
        (0..codec.state.len()).map(|i| codec.state.value(i).clone()).collect();
    let tpl = HandTemplate::standard();
    let mut model = DiffusionModel::<f32>::init(cfg.denoiser, cfg.seed);
    train(&mut model, &codec, &tpl, &paired, &objects, &cfg, |_, _, _| Ok(())).unwrap();
    for (i, b) in before.iter().enumerate() {
        assert_eq!(codec.state.value(i), b, "{}", codec.state.param(i).name);
    }
}

#[test]
fn conditional_sampling_clamps_object_tokens_every_step() {
    let (codec, _, objects, cfg) = tiny_setup();
    let model = DiffusionModel::<f32>::init(cfg.denoiser, 4);
    let schedule = NoiseSchedule::<f32>::linear(cfg.t_steps, cfg.beta_start, cfg.beta_end).unwrap();
    let sampler = Sampler::new(&model.denoiser, &model.state, &schedule, RenoiseMode::DdpmPosterior);
    let tokens = objects[0].object_tokens.clone();
    let mut steps_seen = 0usize;
    sampler.sample_latent_cond(&tokens, 5, 0, |_, z| {
        steps_seen += 1;
        let c = tokens.cols();
        for r in 0..4 {
            assert_eq!(&z.data()[(1 + r) * c..(2 + r) * c], tokens.row(r));
        }
    });
    assert_eq!(steps_seen, cfg.t_steps);
}

#[test]
fn two_seeds_give_different_samples() {
    let (_, _, objects, cfg) = tiny_setup();
    let model = DiffusionModel::<f32>::init(cfg.denoiser, 4);
    let schedule = NoiseSchedule::<f32>::linear(cfg.t_steps, cfg.beta_start, cfg.beta_end).unwrap();
    let sampler = Sampler::new(&model.denoiser, &model.state, &schedule, RenoiseMode::DdpmPosterior);
    let a = sampler.sample_latent_cond(&objects[0].object_tokens, 5, 0, |_, _| {});
    let b = sampler.sample_latent_cond(&objects[0].object_tokens, 6, 0, |_, _| {});
    assert_ne!(a, b);
    // Same seed twice is bit-identical.
    let a2 = sampler.sample_latent_cond(&objects[0].object_tokens, 5, 0, |_, _| {});
    assert_eq!(a, a2);
}

#[test]
fn uniform_helper_is_used_for_draws() {
    // Silences the unused-import lint while pinning the uniform range.
    let mut rng = derive_rng(1, &[1]);
    let v: f64 = uniform(&mut rng, 0.25, 0.75);
    assert!((0.25..0.75).contains(&v));
}
