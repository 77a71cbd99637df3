//! On-policy PPO over the reverse-diffusion chain with terminal rewards.
//!
//! Per round: collect rollouts under the frozen behavior policy, score the
//! terminal samples, clip rewards, normalize advantages, then take
//! `sub_epochs` full-batch ascent steps on the timestep-averaged clipped
//! surrogate minus an optional KL penalty.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ConfigError;
use crate::generator::condition::{Condition, ConditionSampler, OodGuard};
use crate::generator::policy::Policy;
use crate::generator::sampling::{rollout_batch, Trajectory};
use crate::generator::schedule::SamplingSchedule;
use crate::generator::training::clip_grad_norm;
use crate::post_training::objective::{
    clip_rewards, clipped_surrogate, gauss_logprob_iso, normalize_advantages, ppo_ratio, surrogate_is_unclipped,
    RewardClip, RATIO_MAX, RATIO_MIN,
};
use crate::post_training::oracles::RewardOracle;
use crate::stats;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PpoConfig {
    pub clip_eps: f64,
    pub beta_kl: f64,
    pub sub_epochs: usize,
    pub rollouts: usize,
    pub reward_clip: RewardClip,
    pub respacing: String,
    pub lr: f64,
    pub max_grad_norm: Option<f64>,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            clip_eps: 0.2,
            beta_kl: 0.0,
            sub_epochs: 1,
            rollouts: 256,
            reward_clip: RewardClip::Quantile { lo: 0.05, hi: 0.95 },
            respacing: "80,20,0,0".into(),
            lr: 0.005,
            max_grad_norm: Some(1.0),
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if !(self.clip_eps > 0.0 && self.clip_eps < 1.0) {
            return bad("clip epsilon must lie in (0, 1)");
        }
        if !(self.beta_kl >= 0.0 && self.beta_kl.is_finite()) {
            return bad("KL weight must be finite and non-negative");
        }
        if self.sub_epochs == 0 || self.rollouts == 0 {
            return bad("sub-epochs and rollouts must be positive");
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

/// Trajectories of one round with their clipped rewards and advantages.
#[derive(Clone, Debug, PartialEq)]
pub struct RolloutBatch {
    pub conditions: Vec<Condition>,
    pub trajectories: Vec<Trajectory>,
    /// Oracle rewards before clipping; `None` for failed evaluations.
    pub raw_rewards: Vec<Option<f64>>,
    pub rewards: Vec<f64>,
    pub advantages: Vec<f64>,
}

impl RolloutBatch {
    /// Clips rewards, gives failures the bottom of the clip range, and
    /// normalizes advantages.
    pub fn new(
        conditions: Vec<Condition>,
        trajectories: Vec<Trajectory>,
        raw: Vec<Option<f64>>,
        clip: RewardClip,
    ) -> Self {
        let finite: Vec<f64> = raw.iter().flatten().copied().filter(|r| r.is_finite()).collect();
        let bounds = clip.bounds(&finite);
        let floor = match bounds {
            Some((lo, _)) => lo,
            None => finite.iter().copied().fold(f64::INFINITY, f64::min),
        };
        let floor = if floor.is_finite() { floor } else { 0.0 };
        let filled: Vec<f64> = raw
            .iter()
            .map(|r| r.filter(|v| v.is_finite()).unwrap_or(floor))
            .collect();
        // bounds come from the successful evaluations only
        let rewards = match bounds {
            Some(b) => clip_rewards(&filled, RewardClip::Fixed { lo: b.0, hi: b.1 }),
            None => filled,
        };
        let advantages = normalize_advantages(&rewards);
        let trajectories = trajectories
            .into_iter()
            .zip(&raw)
            .map(|(mut t, r)| {
                t.reward = *r;
                t
            })
            .collect();
        Self {
            conditions,
            trajectories,
            raw_rewards: raw,
            rewards,
            advantages,
        }
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn failures(&self) -> usize {
        self.raw_rewards
            .iter()
            .filter(|r| !r.is_some_and(f64::is_finite))
            .count()
    }
}

/// Objective value with its gradient and per-step ratio statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectiveEval {
    pub value: f64,
    pub grad: Vec<f64>,
    pub mean_ratio: f64,
    pub kl: f64,
    pub clip_fraction: f64,
}

struct TrajTerms {
    value: f64,
    grad: Vec<f64>,
    ratio_sum: f64,
    kl: f64,
    clipped: usize,
    steps: usize,
}

/// `J = (1/N) sum_n [(1/T_n) sum_t min(rho A_n, clip(rho) A_n) - beta KL_n]`
/// with `KL_n = (1/T_n) sum_t (logp_old - logp_new)`, and its analytic
/// gradient. Per-trajectory terms run in parallel and are summed in order.
pub fn ppo_objective(
    pol: &Policy,
    batch: &RolloutBatch,
    sched: &SamplingSchedule,
    clip_eps: f64,
    beta_kl: f64,
) -> ObjectiveEval {
    let n = batch.len();
    assert!(n > 0, "empty rollout batch");
    let terms: Vec<TrajTerms> = batch
        .trajectories
        .par_iter()
        .zip(&batch.advantages)
        .map(|(tr, &adv)| traj_terms(pol, tr, adv, sched, clip_eps, beta_kl))
        .collect();
    let mut grad = vec![0.0; pol.params.len()];
    let (mut value, mut ratio_sum, mut kl, mut clipped, mut steps) = (0.0, 0.0, 0.0, 0, 0);
    for t in &terms {
        value += t.value;
        for (g, v) in grad.iter_mut().zip(&t.grad) {
            *g += v;
        }
        ratio_sum += t.ratio_sum;
        kl += t.kl;
        clipped += t.clipped;
        steps += t.steps;
    }
    let inv = 1.0 / n as f64;
    grad.iter_mut().for_each(|g| *g *= inv);
    ObjectiveEval {
        value: value * inv,
        grad,
        mean_ratio: if steps > 0 { ratio_sum / steps as f64 } else { 1.0 },
        kl: kl * inv,
        clip_fraction: if steps > 0 { clipped as f64 / steps as f64 } else { 0.0 },
    }
}

fn traj_terms(pol: &Policy, tr: &Trajectory, adv: f64, sched: &SamplingSchedule, eps: f64, beta: f64) -> TrajTerms {
    let mut grad = vec![0.0; pol.params.len()];
    let t_n = tr.steps.len();
    if t_n == 0 {
        return TrajTerms {
            value: 0.0,
            grad,
            ratio_sum: 0.0,
            kl: 0.0,
            clipped: 0,
            steps: 0,
        };
    }
    let inv_t = 1.0 / t_n as f64;
    let (mut surr, mut kl, mut ratio_sum, mut clipped) = (0.0, 0.0, 0.0, 0);
    for s in &tr.steps {
        let mu = pol.mean(&s.state, s.t, &tr.cond);
        let var = sched.variance[s.index];
        let logp = gauss_logprob_iso(&s.action, &mu, var);
        let raw_ratio = (logp - s.logp).exp();
        let rho = ppo_ratio(logp, s.logp);
        surr += clipped_surrogate(rho, adv, eps);
        kl += s.logp - logp;
        ratio_sum += rho;
        let live = surrogate_is_unclipped(rho, adv, eps) && raw_ratio > RATIO_MIN && raw_ratio < RATIO_MAX;
        if !live {
            clipped += 1;
        }
        // dJ_n/dlogp_t = (1/T)[rho A 1(live) + beta]
        let d_logp = inv_t * (if live { rho * adv } else { 0.0 } + beta);
        if d_logp != 0.0 {
            let g: Vec<f64> = s.action.iter().zip(&mu).map(|(a, m)| d_logp * (a - m) / var).collect();
            pol.accumulate_mean_grad(&s.state, s.t, &tr.cond, &g, &mut grad);
        }
    }
    TrajTerms {
        value: surr * inv_t - beta * kl * inv_t,
        grad,
        ratio_sum,
        kl: kl * inv_t,
        clipped,
        steps: t_n,
    }
}

/// Everything a round needs besides the policy and its settings.
pub struct PpoEnv<'a> {
    pub sampler: ConditionSampler,
    pub guard: &'a OodGuard,
    pub schedule: &'a SamplingSchedule,
    pub oracle: &'a dyn RewardOracle,
}

/// Per-round diagnostics; one row of the training log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PpoDiagnostics {
    pub round: usize,
    pub rollouts: usize,
    pub failures: usize,
    /// Mean and median of the finite raw rewards.
    pub mean_reward: Option<f64>,
    pub median_reward: Option<f64>,
    pub mean_clipped_reward: f64,
    pub objective: f64,
    pub mean_ratio_first: f64,
    pub mean_ratio_last: f64,
    /// KL estimate of the returned policy against the behavior policy.
    pub kl: f64,
    pub clip_fraction: f64,
    pub grad_norm: f64,
    pub seconds: f64,
}

/// Draws `n` conditions from the sampler, recording each with the guard.
pub fn draw_conditions<R: Rng + ?Sized>(
    sampler: &ConditionSampler,
    guard: &OodGuard,
    prefix: &str,
    n: usize,
    rng: &mut R,
) -> Vec<Condition> {
    (0..n)
        .map(|k| {
            let c = sampler.sample(format!("{prefix}{k:05}"), rng);
            guard.check(&c);
            c
        })
        .collect()
}

/// Collects rollouts under `pol` and scores them.
pub fn collect_rollouts<R: Rng + ?Sized>(
    pol: &Policy,
    conditions: Vec<Condition>,
    sched: &SamplingSchedule,
    oracle: &dyn RewardOracle,
    clip: RewardClip,
    rng: &mut R,
) -> RolloutBatch {
    let enc: Vec<Vec<f64>> = conditions.iter().map(|c| pol.encode(c)).collect();
    let seeds: Vec<u64> = (0..conditions.len()).map(|_| rng.next_u64()).collect();
    let trajs = rollout_batch(pol, &enc, &seeds, sched);
    let raw: Vec<Option<f64>> = trajs
        .par_iter()
        .zip(&conditions)
        .map(|(t, c)| oracle.reward(&t.x0, c).filter(|r| r.is_finite()))
        .collect();
    RolloutBatch::new(conditions, trajs, raw, clip)
}

/// One PPO round; the behavior policy is `pol` itself.
pub fn sspt_ppo_round<R: Rng + ?Sized>(
    pol: &Policy,
    cfg: &PpoConfig,
    env: &PpoEnv,
    round: usize,
    rng: &mut R,
) -> Result<(Policy, PpoDiagnostics), ConfigError> {
    cfg.validate()?;
    let start = Instant::now();
    let conds = draw_conditions(&env.sampler, env.guard, &format!("r{round:03}_"), cfg.rollouts, rng);
    let batch = collect_rollouts(pol, conds, env.schedule, env.oracle, cfg.reward_clip, rng);
    let (next, mut diag) = ppo_update(pol, &batch, cfg, env.schedule);
    diag.round = round;
    diag.seconds = start.elapsed().as_secs_f64();
    Ok((next, diag))
}

/// The optimization half of a round on an already-collected batch.
pub fn ppo_update(
    pol: &Policy,
    batch: &RolloutBatch,
    cfg: &PpoConfig,
    sched: &SamplingSchedule,
) -> (Policy, PpoDiagnostics) {
    let mut cur = pol.clone();
    let mut first = None;
    let mut last = None;
    let mut grad_norm = 0.0;
    for _ in 0..cfg.sub_epochs {
        let mut ev = ppo_objective(&cur, batch, sched, cfg.clip_eps, cfg.beta_kl);
        let norm = clip_grad_norm(&mut ev.grad, cfg.max_grad_norm);
        if first.is_none() {
            grad_norm = norm;
        }
        for (p, g) in cur.params.iter_mut().zip(&ev.grad) {
            *p += cfg.lr * g;
        }
        first.get_or_insert((ev.value, ev.mean_ratio));
        last = Some(ev);
    }
    let after = ppo_objective(&cur, batch, sched, cfg.clip_eps, cfg.beta_kl);
    let (objective, ratio_first) = first.expect("at least one sub-epoch");
    let last = last.expect("at least one sub-epoch");
    let finite: Vec<f64> = batch.raw_rewards.iter().flatten().copied().collect();
    let diag = PpoDiagnostics {
        round: 0,
        rollouts: batch.len(),
        failures: batch.failures(),
        mean_reward: (!finite.is_empty()).then(|| stats::mean(&finite)),
        median_reward: (!finite.is_empty()).then(|| stats::median(&finite)),
        mean_clipped_reward: stats::mean(&batch.rewards),
        objective,
        mean_ratio_first: ratio_first,
        mean_ratio_last: last.mean_ratio,
        kl: after.kl,
        clip_fraction: last.clip_fraction,
        grad_norm,
        seconds: 0.0,
    };
    (cur, diag)
}

/// Appends serializable rows to a CSV log, writing the header when the file is new.
pub fn append_log<T: Serialize>(path: &Path, rows: &[T]) -> csv::Result<()> {
    let fresh = !path.exists() || std::fs::metadata(path)?.len() == 0;
    let file = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(fresh)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes rows to any writer as CSV with a header.
pub fn write_log<T: Serialize, W: Write>(rows: &[T], w: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::policy::{init_policy, PolicyConfig};
    use crate::generator::schedule::NoiseSchedule;
    use crate::post_training::oracles::SyntheticTarget;
    use crate::post_training::respace::respace;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(max_rooms: usize) -> (Policy, SamplingSchedule) {
        let pol = init_policy(PolicyConfig::for_layout(max_rooms), 4).unwrap();
        let sched = SamplingSchedule::new(&NoiseSchedule::default(), &respace("8,2,0,0", 1000).unwrap());
        (pol, sched)
    }

    #[test]
    fn zero_lr_round_is_a_no_op() {
        let (pol, sched) = setup(2);
        let guard = OodGuard::new(2);
        let oracle = SyntheticTarget { target: vec![0.3; 8] };
        let env = PpoEnv {
            sampler: ConditionSampler::exact(2),
            guard: &guard,
            schedule: &sched,
            oracle: &oracle,
        };
        let cfg = PpoConfig {
            sub_epochs: 1,
            rollouts: 8,
            lr: 0.0,
            ..PpoConfig::default()
        };
        let (next, d) = sspt_ppo_round(&pol, &cfg, &env, 0, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(next, pol);
        assert_eq!(d.kl, 0.0);
        assert!((d.mean_ratio_first - 1.0).abs() < 1e-6);
        assert_eq!(guard.sampled(), 8);
    }

    #[test]
    fn on_policy_identities() {
        let (pol, sched) = setup(2);
        let oracle = SyntheticTarget { target: vec![0.3; 8] };
        let conds = draw_conditions(
            &ConditionSampler::exact(2),
            &OodGuard::new(2),
            "c",
            6,
            &mut ChaCha8Rng::seed_from_u64(0),
        );
        let batch = collect_rollouts(
            &pol,
            conds,
            &sched,
            &oracle,
            RewardClip::None,
            &mut ChaCha8Rng::seed_from_u64(2),
        );
        let ev = ppo_objective(&pol, &batch, &sched, 0.2, 0.1);
        assert!((ev.mean_ratio - 1.0).abs() < 1e-12);
        assert!(ev.kl.abs() < 1e-12);
        // at rho = 1 the surrogate equals the mean advantage, which is zero
        assert!(ev.value.abs() < 1e-9);
        assert_eq!(ev.clip_fraction, 0.0);
    }

    #[test]
    fn objective_gradient_matches_finite_differences() {
        let (pol, sched) = setup(1);
        let oracle = SyntheticTarget { target: vec![0.3; 4] };
        let conds = draw_conditions(
            &ConditionSampler::exact(1),
            &OodGuard::new(1),
            "c",
            5,
            &mut ChaCha8Rng::seed_from_u64(0),
        );
        let batch = collect_rollouts(
            &pol,
            conds,
            &sched,
            &oracle,
            RewardClip::None,
            &mut ChaCha8Rng::seed_from_u64(2),
        );
        let mut moved = pol.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for p in moved.params.iter_mut() {
            *p += rng.random_range(-0.002..0.002);
        }
        let ev = ppo_objective(&moved, &batch, &sched, 0.2, 0.3);
        let h = 1e-6;
        for k in 0..moved.params.len() {
            let mut a = moved.clone();
            let mut b = moved.clone();
            a.params[k] += h;
            b.params[k] -= h;
            let fd = (ppo_objective(&a, &batch, &sched, 0.2, 0.3).value
                - ppo_objective(&b, &batch, &sched, 0.2, 0.3).value)
                / (2.0 * h);
            assert!(
                (fd - ev.grad[k]).abs() <= 1e-4 * ev.grad[k].abs().max(1e-2),
                "param {k}: {fd} vs {}",
                ev.grad[k]
            );
        }
    }

    #[test]
    fn failures_get_the_clip_floor() {
        let (pol, sched) = setup(1);
        let conds = draw_conditions(
            &ConditionSampler::exact(1),
            &OodGuard::new(1),
            "c",
            4,
            &mut ChaCha8Rng::seed_from_u64(0),
        );
        let enc: Vec<Vec<f64>> = conds.iter().map(|c| pol.encode(c)).collect();
        let trajs = rollout_batch(&pol, &enc, &[1, 2, 3, 4], &sched);
        let raw = vec![Some(1.0), None, Some(3.0), Some(f64::NAN)];
        let b = RolloutBatch::new(
            conds.clone(),
            trajs.clone(),
            raw.clone(),
            RewardClip::Fixed { lo: -2.0, hi: 2.0 },
        );
        assert_eq!(b.rewards, vec![1.0, -2.0, 2.0, -2.0]);
        assert_eq!(b.failures(), 2);
        let b = RolloutBatch::new(conds, trajs, raw, RewardClip::None);
        assert_eq!(b.rewards, vec![1.0, 1.0, 3.0, 1.0]);
        assert_eq!(b.trajectories[1].reward, None);
    }

    #[test]
    fn log_rows_share_a_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.csv");
        let row = PpoDiagnostics {
            round: 0,
            rollouts: 2,
            failures: 0,
            mean_reward: Some(1.5),
            median_reward: None,
            mean_clipped_reward: 1.0,
            objective: 0.0,
            mean_ratio_first: 1.0,
            mean_ratio_last: 1.0,
            kl: 0.0,
            clip_fraction: 0.0,
            grad_norm: 0.0,
            seconds: 0.0,
        };
        append_log(&path, std::slice::from_ref(&row)).unwrap();
        append_log(&path, &[row]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("round,rollouts"));
        assert_eq!(lines[1], lines[2]);
    }
}
