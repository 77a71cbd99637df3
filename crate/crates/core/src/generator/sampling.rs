//! Reverse-process sampling and recorded trajectories.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::generator::policy::Policy;
use crate::generator::schedule::SamplingSchedule;
use crate::post_training::objective::gauss_logprob_iso;

/// One stochastic reverse step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Schedule index.
    pub index: usize,
    /// Base timestep.
    pub t: usize,
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    /// Behavior log-probability of `action`.
    pub logp: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Condition encoding the policy saw.
    pub cond: Vec<f64>,
    /// Stochastic steps in sampling order; the final deterministic step is not recorded.
    pub steps: Vec<StepRecord>,
    pub x0: Vec<f64>,
    pub reward: Option<f64>,
}

fn normal_vec<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Draws `x_{i-1} ~ N(mu, var_i I)`. Returns the log-probability of the draw,
/// or `None` for a deterministic step (zero variance or `deterministic`), in
/// which case the mean is returned.
pub fn sample_step<R: Rng + ?Sized>(
    pol: &Policy,
    x: &[f64],
    i: usize,
    cond: &[f64],
    sched: &SamplingSchedule,
    deterministic: bool,
    rng: &mut R,
) -> (Vec<f64>, Option<f64>) {
    let mu = pol.mean(x, sched.timesteps[i], cond);
    let var = sched.variance[i];
    if deterministic || var <= 0.0 {
        return (mu, None);
    }
    let sd = var.sqrt();
    let a: Vec<f64> = mu
        .iter()
        .zip(normal_vec(mu.len(), rng))
        .map(|(m, z)| m + sd * z)
        .collect();
    let logp = gauss_logprob_iso(&a, &mu, var);
    (a, Some(logp))
}

/// Runs the full reverse chain from `x_T ~ N(0, I)`.
pub fn rollout<R: Rng + ?Sized>(pol: &Policy, cond: &[f64], sched: &SamplingSchedule, rng: &mut R) -> Trajectory {
    let mut x = normal_vec(pol.dim(), rng);
    let mut steps = Vec::with_capacity(sched.len().saturating_sub(1));
    for i in (0..sched.len()).rev() {
        let (next, logp) = sample_step(pol, &x, i, cond, sched, false, rng);
        if let Some(logp) = logp {
            steps.push(StepRecord {
                index: i,
                t: sched.timesteps[i],
                state: x,
                action: next.clone(),
                logp,
            });
        }
        x = next;
    }
    Trajectory {
        cond: cond.to_vec(),
        steps,
        x0: x,
        reward: None,
    }
}

/// One rollout per condition encoding, each with its own seeded generator;
/// runs in parallel and keeps input order.
pub fn rollout_batch(pol: &Policy, conds: &[Vec<f64>], seeds: &[u64], sched: &SamplingSchedule) -> Vec<Trajectory> {
    assert_eq!(conds.len(), seeds.len());
    conds
        .par_iter()
        .zip(seeds)
        .map(|(c, &seed)| rollout(pol, c, sched, &mut ChaCha8Rng::seed_from_u64(seed)))
        .collect()
}

/// Log-probabilities of the recorded actions under `pol`.
pub fn recompute_logp(pol: &Policy, traj: &Trajectory, sched: &SamplingSchedule) -> Vec<f64> {
    traj.steps
        .iter()
        .map(|s| {
            let mu = pol.mean(&s.state, s.t, &traj.cond);
            gauss_logprob_iso(&s.action, &mu, sched.variance[s.index])
        })
        .collect()
}
