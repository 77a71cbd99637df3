//! Denoising objective with analytic gradients, and baseline pretraining on
//! synthesized plans.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::generator::condition::{Condition, ConditionSampler};
use crate::generator::layout::synthesize_plan;
use crate::generator::policy::{init_policy, Policy, PolicyConfig};
use crate::generator::schedule::{NoiseSchedule, SamplingSchedule};
use crate::post_training::respace::respace;

/// One training example: a clean sample and its condition encoding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub x0: Vec<f64>,
    pub cond: Vec<f64>,
}

/// Noise draw for one example: schedule index and standard-normal noise.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseDraw {
    pub index: usize,
    pub noise: Vec<f64>,
}

pub fn draw_noise<R: Rng + ?Sized>(batch: &[Example], sched: &SamplingSchedule, rng: &mut R) -> Vec<NoiseDraw> {
    batch
        .iter()
        .map(|ex| NoiseDraw {
            index: rng.random_range(0..sched.len()),
            noise: (0..ex.x0.len()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect(),
        })
        .collect()
}

/// Mean squared error between the policy mean and the posterior mean of the
/// forward-noised sample, averaged over batch and dimensions, with its gradient.
pub fn denoising_loss(
    pol: &Policy,
    batch: &[Example],
    draws: &[NoiseDraw],
    sched: &SamplingSchedule,
) -> (f64, Vec<f64>) {
    assert!(!batch.is_empty(), "batch must not be empty");
    assert_eq!(batch.len(), draws.len());
    let d = pol.dim();
    let scale = 1.0 / (batch.len() * d) as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; pol.params.len()];
    for (ex, dr) in batch.iter().zip(draws) {
        let i = dr.index;
        let (sa, sb) = (sched.alpha_bar[i].sqrt(), (1.0 - sched.alpha_bar[i]).sqrt());
        let xt: Vec<f64> = ex.x0.iter().zip(&dr.noise).map(|(x, e)| sa * x + sb * e).collect();
        let target = sched.posterior_mean(i, &ex.x0, &xt);
        let mu = pol.mean(&xt, sched.timesteps[i], &ex.cond);
        let resid: Vec<f64> = mu.iter().zip(&target).map(|(m, t)| m - t).collect();
        loss += resid.iter().map(|r| r * r).sum::<f64>() * scale;
        let g: Vec<f64> = resid.iter().map(|r| 2.0 * r * scale).collect();
        pol.accumulate_mean_grad(&xt, sched.timesteps[i], &ex.cond, &g, &mut grad);
    }
    (loss, grad)
}

/// Rescales `grad` in place so its L2 norm is at most `max_norm`; returns the original norm.
pub fn clip_grad_norm(grad: &mut [f64], max_norm: Option<f64>) -> f64 {
    let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    if let Some(m) = max_norm {
        if norm > m && norm > 0.0 {
            let s = m / norm;
            grad.iter_mut().for_each(|g| *g *= s);
        }
    }
    norm
}

/// One SGD step on the denoising loss; returns the pre-step loss and the new policy.
pub fn denoising_step<R: Rng + ?Sized>(
    pol: &Policy,
    batch: &[Example],
    sched: &SamplingSchedule,
    rng: &mut R,
    lr: f64,
) -> (f64, Policy) {
    denoising_step_clipped(pol, batch, sched, rng, lr, None)
}

pub fn denoising_step_clipped<R: Rng + ?Sized>(
    pol: &Policy,
    batch: &[Example],
    sched: &SamplingSchedule,
    rng: &mut R,
    lr: f64,
    max_grad_norm: Option<f64>,
) -> (f64, Policy) {
    let draws = draw_noise(batch, sched, rng);
    let (loss, mut grad) = denoising_loss(pol, batch, &draws, sched);
    clip_grad_norm(&mut grad, max_grad_norm);
    let mut next = pol.clone();
    for (p, g) in next.params.iter_mut().zip(&grad) {
        *p -= lr * g;
    }
    (loss, next)
}

/// Shuffled mini-batch epochs of [`denoising_step_clipped`]; returns per-step losses.
#[allow(clippy::too_many_arguments)]
pub fn fit<R: Rng + ?Sized>(
    pol: &mut Policy,
    data: &[Example],
    sched: &SamplingSchedule,
    epochs: usize,
    batch_size: usize,
    lr: f64,
    max_grad_norm: Option<f64>,
    rng: &mut R,
) -> Vec<f64> {
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut losses = Vec::new();
    for _ in 0..epochs {
        order.shuffle(rng);
        for chunk in order.chunks(batch_size.max(1)) {
            let batch: Vec<Example> = chunk.iter().map(|&k| data[k].clone()).collect();
            let (loss, next) = denoising_step_clipped(pol, &batch, sched, rng, lr, max_grad_norm);
            *pol = next;
            losses.push(loss);
        }
    }
    losses
}

/// Settings for the deterministic baseline policy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PretrainConfig {
    pub max_rooms: usize,
    /// Room cap of the synthesized training programs.
    pub cap: usize,
    pub plans: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub max_grad_norm: Option<f64>,
    pub respacing: String,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        Self {
            max_rooms: 8,
            cap: 7,
            plans: 256,
            epochs: 30,
            batch_size: 16,
            lr: 0.2,
            max_grad_norm: Some(5.0),
            respacing: "80,20,0,0".into(),
        }
    }
}

/// Synthesized reference plans for capped training programs.
pub fn synthesize_base_set(cfg: &PretrainConfig, seed: u64) -> Vec<(Condition, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0ba5_e5e7);
    let sampler = ConditionSampler::train(cfg.cap);
    (0..cfg.plans)
        .map(|k| {
            let c = sampler.sample(format!("base{k:05}"), &mut rng);
            let x = synthesize_plan(&c, cfg.max_rooms, &mut rng);
            (c, x.coords)
        })
        .collect()
}

/// A policy trained briefly on synthesized plans; a pure function of `seed`.
pub fn pretrain_baseline(cfg: &PretrainConfig, seed: u64) -> Policy {
    let pcfg = PolicyConfig::for_layout(cfg.max_rooms);
    let mut pol = init_policy(pcfg, seed).expect("layout policy config is consistent");
    let ts = respace(&cfg.respacing, NoiseSchedule::DEFAULT_STEPS).expect("valid respacing");
    let sched = SamplingSchedule::new(&NoiseSchedule::default(), &ts);
    let data: Vec<Example> = synthesize_base_set(cfg, seed)
        .into_iter()
        .map(|(c, x0)| Example {
            cond: pol.encode(&c),
            x0,
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    fit(
        &mut pol,
        &data,
        &sched,
        cfg.epochs,
        cfg.batch_size,
        cfg.lr,
        cfg.max_grad_norm,
        &mut rng,
    );
    pol
}
