//! Sample layouts from the pretrained baseline, render them and save the masks.
//!
//! cargo run --example toy_rollout [out_dir]

use floorsyntax::generator::{
    pretrain_baseline, render_layout, rollout, ConditionSampler, LayoutVector, NoiseSchedule, PretrainConfig,
    RenderConfig, SamplingSchedule,
};
use floorsyntax::oracle::{analyze_mask, OracleConfig};
use floorsyntax::post_training::respace;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).map(std::path::PathBuf::from);
    let pol = pretrain_baseline(&PretrainConfig::default(), 11);
    let sched = SamplingSchedule::new(&NoiseSchedule::default(), &respace("80,20,0,0", 1000)?);
    let sampler = ConditionSampler::train(7);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in 0..4 {
        let cond = sampler.sample(format!("toy{k}"), &mut rng);
        let traj = rollout(&pol, &pol.encode(&cond), &sched, &mut rng);
        let logp: f64 = traj.steps.iter().map(|s| s.logp).sum();
        let plan = match render_layout(
            &LayoutVector {
                coords: traj.x0.clone(),
            },
            &cond,
            &RenderConfig::default(),
        ) {
            Ok(plan) => plan,
            Err(e) => {
                println!("{}: render failed: {e}", cond.id);
                continue;
            }
        };
        let report = analyze_mask(&cond.id, &plan.mask, &OracleConfig::default());
        println!(
            "{}: {} rooms, {} steps, log-prob {logp:.2}, outcome {:?}, public score {:?}",
            cond.id,
            cond.room_count(),
            traj.steps.len(),
            report.outcome,
            report.public_score
        );
        if let Some(dir) = &out {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(format!("{}.png", cond.id)), plan.mask.encode_png())?;
        }
    }
    Ok(())
}
