//! Iterative Top-K fine-tuning against a pre-scored base set.
//!
//! cargo run --release --example iter_post_training

use floorsyntax::generator::{
    pretrain_baseline, synthesize_base_set, ConditionSampler, NoiseSchedule, OodGuard, PretrainConfig, SamplingSchedule,
};
use floorsyntax::post_training::{respace, sspt_iter_round, BaseSet, IterConfig, IterEnv, SpaceSyntaxOracle};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pre = PretrainConfig::default();
    let cfg = IterConfig {
        samples: 128,
        top_k: 64,
        ..IterConfig::default()
    };
    let sched = SamplingSchedule::new(&NoiseSchedule::default(), &respace(&cfg.respacing, 1000)?);
    let oracle = SpaceSyntaxOracle::default();
    let guard = OodGuard::new(pre.cap);
    let base = BaseSet::score(synthesize_base_set(&pre, 0), &oracle);
    println!("base set: {} plans", base.len());

    let env = IterEnv {
        sampler: ConditionSampler::train(pre.cap),
        guard: &guard,
        schedule: &sched,
        oracle: &oracle,
    };
    let mut pol = pretrain_baseline(&pre, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for round in 0..3 {
        let (next, d) = sspt_iter_round(&pol, &base, &cfg, &env, round, &mut rng)?;
        pol = next;
        println!(
            "round {round}: median fresh {:.4e}, median selected {:.4e}, {} of {} selected were fresh, loss {:.4}",
            d.median_score.unwrap_or(f64::NAN),
            d.median_selected.unwrap_or(f64::NAN),
            d.selected_generated,
            d.selected,
            d.mean_loss.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
