//! A few PPO rounds on the pretrained baseline, first against a synthetic
//! target and then against the space-syntax reward.
//!
//! cargo run --release --example ppo_post_training

use floorsyntax::generator::{
    pretrain_baseline, ConditionSampler, NoiseSchedule, OodGuard, PretrainConfig, SamplingSchedule,
};
use floorsyntax::post_training::{
    respace, sspt_ppo_round, PpoConfig, PpoEnv, RewardClip, RewardOracle, SpaceSyntaxOracle, SyntheticTarget,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn run(
    label: &str,
    oracle: &dyn RewardOracle,
    cfg: &PpoConfig,
    rounds: usize,
) -> Result<(), Box<dyn std::error::Error>> {
    let sched = SamplingSchedule::new(&NoiseSchedule::default(), &respace(&cfg.respacing, 1000)?);
    let guard = OodGuard::new(7);
    let env = PpoEnv {
        sampler: ConditionSampler::train(7),
        guard: &guard,
        schedule: &sched,
        oracle,
    };
    let mut pol = pretrain_baseline(&PretrainConfig::default(), 0);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for round in 0..rounds {
        let (next, d) = sspt_ppo_round(&pol, cfg, &env, round, &mut rng)?;
        pol = next;
        println!(
            "{label} round {round}: mean reward {:.4e}, KL {:.2e}, clip fraction {:.3}, failures {}",
            d.mean_reward.unwrap_or(f64::NAN),
            d.kl,
            d.clip_fraction,
            d.failures
        );
    }
    println!(
        "{label}: {} conditions drawn, {} over the cap",
        guard.sampled(),
        guard.violations()
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let target = SyntheticTarget {
        target: (0..32).map(|i| if i % 2 == 0 { 0.4 } else { -0.3 }).collect(),
    };
    let synthetic = PpoConfig {
        lr: 0.03,
        rollouts: 256,
        reward_clip: RewardClip::None,
        ..PpoConfig::default()
    };
    run("synthetic", &target, &synthetic, 5)?;
    run("space-syntax", &SpaceSyntaxOracle::default(), &PpoConfig::default(), 3)
}
