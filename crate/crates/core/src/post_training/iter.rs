//! Iterative Top-K fine-tuning: generate, score, keep the best of the union
//! with a pre-scored base set, fine-tune on the survivors.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ConfigError;
use crate::generator::condition::{Condition, ConditionSampler, OodGuard};
use crate::generator::policy::Policy;
use crate::generator::sampling::rollout_batch;
use crate::generator::schedule::SamplingSchedule;
use crate::generator::training::{fit, Example};
use crate::post_training::oracles::RewardOracle;
use crate::post_training::ppo::draw_conditions;
use crate::screening::top_k;
use crate::stats;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterConfig {
    /// Fresh candidates per round.
    pub samples: usize,
    pub top_k: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub max_grad_norm: Option<f64>,
    pub respacing: String,
}

impl Default for IterConfig {
    fn default() -> Self {
        Self {
            samples: 256,
            top_k: 128,
            epochs: 4,
            batch_size: 16,
            lr: 0.05,
            max_grad_norm: Some(5.0),
            respacing: "80,20,0,0".into(),
        }
    }
}

impl IterConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.samples == 0 || self.top_k == 0 || self.batch_size == 0 {
            return bad("samples, top-k and batch size must be positive");
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return bad("learning rate must be finite and non-negative");
        }
        if self.max_grad_norm.is_some_and(|m| !(m > 0.0)) {
            return bad("gradient-norm bound must be positive");
        }
        Ok(())
    }
}

/// A plan with its oracle score; failures score negative infinity.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredPlan {
    pub id: String,
    pub cond: Condition,
    pub x0: Vec<f64>,
    pub score: f64,
}

/// Reference plans, scored once and reused every round.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct BaseSet {
    pub plans: Vec<ScoredPlan>,
}

impl BaseSet {
    pub fn score(plans: Vec<(Condition, Vec<f64>)>, oracle: &dyn RewardOracle) -> Self {
        let plans = plans
            .into_par_iter()
            .map(|(cond, x0)| {
                let score = oracle.reward(&x0, &cond).unwrap_or(f64::NEG_INFINITY);
                ScoredPlan {
                    id: cond.id.clone(),
                    cond,
                    x0,
                    score,
                }
            })
            .collect();
        Self { plans }
    }

    pub fn len(&self) -> usize {
        self.plans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plans.is_empty()
    }
}

pub struct IterEnv<'a> {
    pub sampler: ConditionSampler,
    pub guard: &'a OodGuard,
    pub schedule: &'a SamplingSchedule,
    pub oracle: &'a dyn RewardOracle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterDiagnostics {
    pub round: usize,
    pub samples: usize,
    pub failures: usize,
    /// Median finite score of the fresh candidates.
    pub median_score: Option<f64>,
    pub best_score: Option<f64>,
    /// Median score of the selected set.
    pub median_selected: Option<f64>,
    pub selected: usize,
    pub selected_generated: usize,
    /// Fraction of fresh candidates that made the cut.
    pub acceptance_rate: f64,
    pub mean_loss: Option<f64>,
    pub seconds: f64,
}

/// Samples and scores `conds` under `pol`, one seeded rollout each.
pub fn generate_scored<R: Rng + ?Sized>(
    pol: &Policy,
    conds: Vec<Condition>,
    sched: &SamplingSchedule,
    oracle: &dyn RewardOracle,
    rng: &mut R,
) -> Vec<ScoredPlan> {
    let enc: Vec<Vec<f64>> = conds.iter().map(|c| pol.encode(c)).collect();
    let seeds: Vec<u64> = (0..conds.len()).map(|_| rng.next_u64()).collect();
    let trajs = rollout_batch(pol, &enc, &seeds, sched);
    conds
        .into_par_iter()
        .zip(trajs)
        .map(|(cond, t)| {
            let score = oracle.reward(&t.x0, &cond).filter(|s| s.is_finite());
            ScoredPlan {
                id: cond.id.clone(),
                score: score.unwrap_or(f64::NEG_INFINITY),
                cond,
                x0: t.x0,
            }
        })
        .collect()
}

/// Keys of the selected set for a round: the `k` best of candidates and base.
pub fn select_top_k(candidates: &[ScoredPlan], base: &BaseSet, k: usize) -> Vec<String> {
    let c: Vec<(String, f64)> = candidates.iter().map(|p| (p.id.clone(), p.score)).collect();
    let b: Vec<(String, f64)> = base.plans.iter().map(|p| (p.id.clone(), p.score)).collect();
    top_k(&c, &b, k)
}

pub fn sspt_iter_round<R: Rng + ?Sized>(
    pol: &Policy,
    base: &BaseSet,
    cfg: &IterConfig,
    env: &IterEnv,
    round: usize,
    rng: &mut R,
) -> Result<(Policy, IterDiagnostics), ConfigError> {
    cfg.validate()?;
    let start = Instant::now();
    let conds = draw_conditions(&env.sampler, env.guard, &format!("i{round:03}_"), cfg.samples, rng);
    let cands = generate_scored(pol, conds, env.schedule, env.oracle, rng);
    let selected = select_top_k(&cands, base, cfg.top_k);

    let mut by_id: BTreeMap<&str, &ScoredPlan> = base.plans.iter().map(|p| (p.id.as_str(), p)).collect();
    // a fresh id never collides with a base id; if it did, the candidate wins
    by_id.extend(cands.iter().map(|p| (p.id.as_str(), p)));
    let chosen: Vec<&ScoredPlan> = selected.iter().map(|id| by_id[id.as_str()]).collect();
    let examples: Vec<Example> = chosen
        .iter()
        .map(|p| Example {
            x0: p.x0.clone(),
            cond: pol.encode(&p.cond),
        })
        .collect();

    let mut next = pol.clone();
    let losses = if examples.is_empty() {
        Vec::new()
    } else {
        fit(
            &mut next,
            &examples,
            env.schedule,
            cfg.epochs,
            cfg.batch_size,
            cfg.lr,
            cfg.max_grad_norm,
            rng,
        )
    };

    let finite: Vec<f64> = cands.iter().map(|p| p.score).filter(|s| s.is_finite()).collect();
    let chosen_scores: Vec<f64> = chosen.iter().map(|p| p.score).collect();
    let fresh: std::collections::BTreeSet<&str> = cands.iter().map(|p| p.id.as_str()).collect();
    let selected_generated = selected.iter().filter(|id| fresh.contains(id.as_str())).count();
    let diag = IterDiagnostics {
        round,
        samples: cands.len(),
        failures: cands.len() - finite.len(),
        median_score: (!finite.is_empty()).then(|| stats::median(&finite)),
        best_score: finite.iter().copied().reduce(f64::max),
        median_selected: (!chosen_scores.is_empty()).then(|| stats::median(&chosen_scores)),
        selected: selected.len(),
        selected_generated,
        acceptance_rate: selected_generated as f64 / cands.len() as f64,
        mean_loss: (!losses.is_empty()).then(|| stats::mean(&losses)),
        seconds: start.elapsed().as_secs_f64(),
    };
    Ok((next, diag))
}
