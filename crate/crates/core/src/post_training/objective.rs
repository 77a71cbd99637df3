//! Scalar building blocks of the PPO objective.

use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stats::{mean, population_std, quantile};

pub const ADV_EPSILON: f64 = 1e-8;
pub const RATIO_MIN: f64 = 1e-8;
pub const RATIO_MAX: f64 = 1e8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ObjectiveError {
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("length mismatch: {0} vs {1}")]
    Length(usize, usize),
}

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Log-density of a diagonal Gaussian, summed over dimensions.
pub fn gauss_logprob(a: &[f64], mu: &[f64], var: &[f64]) -> Result<f64, ObjectiveError> {
    if a.len() != mu.len() {
        return Err(ObjectiveError::Dimension(a.len(), mu.len()));
    }
    if a.len() != var.len() {
        return Err(ObjectiveError::Dimension(a.len(), var.len()));
    }
    let mut s = 0.0;
    for ((x, m), v) in a.iter().zip(mu).zip(var) {
        let d = x - m;
        s += LN_2PI + v.ln() + d * d / v;
    }
    Ok(-0.5 * s)
}

/// Isotropic variant with one shared variance.
pub fn gauss_logprob_iso(a: &[f64], mu: &[f64], var: f64) -> f64 {
    assert_eq!(a.len(), mu.len(), "dimension mismatch");
    let sq: f64 = a.iter().zip(mu).map(|(x, m)| (x - m) * (x - m)).sum();
    -0.5 * (a.len() as f64 * (LN_2PI + var.ln()) + sq / var)
}

/// `exp(logp_new - logp_old)` clamped to `[1e-8, 1e8]`.
pub fn ppo_ratio(logp_new: f64, logp_old: f64) -> f64 {
    (logp_new - logp_old).exp().clamp(RATIO_MIN, RATIO_MAX)
}

/// `min(rho * A, clip(rho, 1 - eps, 1 + eps) * A)`.
pub fn clipped_surrogate(rho: f64, adv: f64, eps: f64) -> f64 {
    (rho * adv).min(rho.clamp(1.0 - eps, 1.0 + eps) * adv)
}

/// Whether the unclipped branch is the active minimum, i.e. the surrogate
/// depends on `rho`.
pub fn surrogate_is_unclipped(rho: f64, adv: f64, eps: f64) -> bool {
    rho * adv <= rho.clamp(1.0 - eps, 1.0 + eps) * adv
}

/// `mean(logp_old - logp_new)`.
pub fn kl_estimate(logp_old: &[f64], logp_new: &[f64]) -> Result<f64, ObjectiveError> {
    if logp_old.len() != logp_new.len() {
        return Err(ObjectiveError::Length(logp_old.len(), logp_new.len()));
    }
    if logp_old.is_empty() {
        return Ok(0.0);
    }
    Ok(logp_old.iter().zip(logp_new).map(|(o, n)| o - n).sum::<f64>() / logp_old.len() as f64)
}

/// `(R - mean) / (population std + 1e-8)`; all zeros for fewer than two rewards.
pub fn normalize_advantages(rewards: &[f64]) -> Vec<f64> {
    if rewards.len() < 2 {
        return vec![0.0; rewards.len()];
    }
    let m = mean(rewards);
    let sd = population_std(rewards);
    rewards.iter().map(|r| (r - m) / (sd + ADV_EPSILON)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardClip {
    None,
    Fixed { lo: f64, hi: f64 },
    Quantile { lo: f64, hi: f64 },
}

impl FromStr for RewardClip {
    type Err = String;

    /// `none`, `fixed:LO,HI` or `quantile:QLO,QHI`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "none" {
            return Ok(Self::None);
        }
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| format!("reward clip {s:?} must be none, fixed:LO,HI or quantile:QLO,QHI"))?;
        let (a, b) = rest
            .split_once(',')
            .ok_or_else(|| format!("reward clip {s:?} needs two bounds"))?;
        let lo: f64 = a.trim().parse().map_err(|_| format!("bad bound {a:?}"))?;
        let hi: f64 = b.trim().parse().map_err(|_| format!("bad bound {b:?}"))?;
        if !(lo < hi) {
            return Err(format!("reward clip bounds must satisfy lo < hi, got {lo}, {hi}"));
        }
        match kind {
            "fixed" => Ok(Self::Fixed { lo, hi }),
            "quantile" if (0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi) => Ok(Self::Quantile { lo, hi }),
            "quantile" => Err(format!("quantiles must lie in [0, 1], got {lo}, {hi}")),
            other => Err(format!("unknown reward clip mode {other:?}")),
        }
    }
}

impl RewardClip {
    /// Concrete `[lo, hi]` bounds for a batch; `None` means no clipping. Only
    /// finite rewards enter the quantiles.
    pub fn bounds(&self, rewards: &[f64]) -> Option<(f64, f64)> {
        match *self {
            RewardClip::None => None,
            RewardClip::Fixed { lo, hi } => Some((lo, hi)),
            RewardClip::Quantile { lo, hi } => {
                let finite: Vec<f64> = rewards.iter().copied().filter(|r| r.is_finite()).collect();
                if finite.is_empty() {
                    return None;
                }
                Some((quantile(&finite, lo), quantile(&finite, hi)))
            }
        }
    }
}

pub fn clip_rewards(rewards: &[f64], mode: RewardClip) -> Vec<f64> {
    match mode.bounds(rewards) {
        None => rewards.to_vec(),
        Some((lo, hi)) => rewards.iter().map(|r| r.clamp(lo, hi)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn logprob_cases() {
        let v = gauss_logprob(&[0.0], &[0.0], &[1.0]).unwrap();
        assert!((v + 0.918_938_533_204_672_7).abs() < 1e-15);
        let v = gauss_logprob(&[0.3, -2.0, 5.0], &[0.3, -2.0, 5.0], &[1.0; 3]).unwrap();
        assert!((v + 1.5 * LN_2PI).abs() < 1e-14);
        assert_eq!(
            gauss_logprob(&[0.0], &[0.0, 1.0], &[1.0]),
            Err(ObjectiveError::Dimension(1, 2))
        );
        let iso = gauss_logprob_iso(&[0.1, 0.2], &[0.0, -0.3], 0.25);
        let diag = gauss_logprob(&[0.1, 0.2], &[0.0, -0.3], &[0.25, 0.25]).unwrap();
        assert!((iso - diag).abs() < 1e-14);
    }

    #[test]
    fn ratio_cases() {
        assert_eq!(ppo_ratio(-3.0, -3.0), 1.0);
        assert!((ppo_ratio(2f64.ln(), 0.0) - 2.0).abs() < 1e-15);
        assert_eq!(ppo_ratio(100.0, 0.0), RATIO_MAX);
        assert_eq!(ppo_ratio(-100.0, 0.0), RATIO_MIN);
        let edge = 8.0 * 10f64.ln();
        assert!(ppo_ratio(edge - 0.01, 0.0) < RATIO_MAX);
    }

    #[test]
    fn surrogate_cases() {
        assert_eq!(clipped_surrogate(1.5, 1.0, 0.2), 1.2);
        assert_eq!(clipped_surrogate(0.5, -1.0, 0.2), -0.8);
        assert_eq!(clipped_surrogate(1.0, -0.37, 0.2), -0.37);
        assert!(!surrogate_is_unclipped(1.5, 1.0, 0.2));
        assert!(surrogate_is_unclipped(1.1, 1.0, 0.2));
    }

    #[test]
    fn kl_cases() {
        assert_eq!(kl_estimate(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(kl_estimate(&[1.5, 2.5], &[1.0, 2.0]).unwrap(), 0.5);
        assert_eq!(kl_estimate(&[1.0], &[]), Err(ObjectiveError::Length(1, 0)));
    }

    #[test]
    fn advantage_cases() {
        let a = normalize_advantages(&[1.0, 2.0, 3.0]);
        assert!((a[0] + 1.2247).abs() < 1e-4 && a[1].abs() < 1e-12 && (a[2] - 1.2247).abs() < 1e-4);
        assert_eq!(normalize_advantages(&[4.0; 5]), vec![0.0; 5]);
        assert_eq!(normalize_advantages(&[4.0]), vec![0.0]);
    }

    #[test]
    fn clip_cases() {
        let r: Vec<f64> = (0..10).map(f64::from).collect();
        let fixed = clip_rewards(&r, RewardClip::Fixed { lo: 2.0, hi: 7.0 });
        assert_eq!(fixed, vec![2.0, 2.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 7.0, 7.0]);
        assert_eq!(clip_rewards(&r, RewardClip::Quantile { lo: 0.0, hi: 1.0 }), r);
        let (lo, hi) = RewardClip::Quantile { lo: 0.1, hi: 0.9 }.bounds(&r).unwrap();
        assert!((lo - 0.9).abs() < 1e-12 && (hi - 8.1).abs() < 1e-12);
        assert_eq!(
            "quantile:0.05,0.95".parse::<RewardClip>().unwrap(),
            RewardClip::Quantile { lo: 0.05, hi: 0.95 }
        );
        assert_eq!(
            "fixed:-1,1".parse::<RewardClip>().unwrap(),
            RewardClip::Fixed { lo: -1.0, hi: 1.0 }
        );
        assert!("quantile:0.5,2".parse::<RewardClip>().is_err());
        assert!("bogus".parse::<RewardClip>().is_err());
    }

    proptest! {
        #[test]
        fn kl_is_antisymmetric(pairs in prop::collection::vec((-50.0f64..0.0, -50.0f64..0.0), 1..20)) {
            let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let ab = kl_estimate(&a, &b).unwrap();
            let ba = kl_estimate(&b, &a).unwrap();
            prop_assert!((ab + ba).abs() < 1e-9);
        }

        #[test]
        fn advantages_have_unit_moments(r in prop::collection::vec(-100.0f64..100.0, 2..64)) {
            prop_assume!(population_std(&r) > 1e-3);
            let a = normalize_advantages(&r);
            prop_assert!(mean(&a).abs() < 1e-9);
            prop_assert!((population_std(&a) - 1.0).abs() < 1e-6);
        }

        #[test]
        fn surrogate_never_exceeds_unclipped(rho in 1e-3f64..10.0, adv in -5.0f64..5.0, eps in 0.01f64..0.99) {
            let j = clipped_surrogate(rho, adv, eps);
            prop_assert!(j <= rho * adv + 1e-15);
        }

        #[test]
        fn clipping_is_monotone(r in prop::collection::vec(-10.0f64..10.0, 2..40)) {
            let c = clip_rewards(&r, RewardClip::Quantile { lo: 0.1, hi: 0.9 });
            for i in 0..r.len() {
                for j in 0..r.len() {
                    if r[i] <= r[j] {
                        prop_assert!(c[i] <= c[j]);
                    }
                }
            }
        }
    }
}
