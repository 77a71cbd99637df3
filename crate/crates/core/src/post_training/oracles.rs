//! Terminal rewards for post-training.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::generator::condition::Condition;
use crate::generator::layout::{render_layout, LayoutVector, RenderConfig};
use crate::metrics::Category;
use crate::oracle::{analyze_mask, OracleConfig, PlanOutcome, PlanReport};
use crate::screening::{selection_score, GateConfig, SelectionScore};

/// Maps a terminal sample and its condition to a scalar reward. `None` marks
/// a failed evaluation (render failure, no scored graph, non-finite value).
pub trait RewardOracle: Sync {
    fn name(&self) -> &str;
    fn reward(&self, x0: &[f64], cond: &Condition) -> Option<f64>;
}

/// Negative mean squared distance to a fixed target vector.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticTarget {
    pub target: Vec<f64>,
}

impl RewardOracle for SyntheticTarget {
    fn name(&self) -> &str {
        "synthetic_target"
    }

    fn reward(&self, x0: &[f64], _cond: &Condition) -> Option<f64> {
        assert_eq!(x0.len(), self.target.len(), "target width");
        let d: f64 = x0.iter().zip(&self.target).map(|(a, b)| (a - b) * (a - b)).sum();
        Some(-d / x0.len() as f64)
    }
}

/// Weights of the linear reward. The default keeps only the selection score.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardWeights {
    pub selection: f64,
    pub public_score: f64,
    pub integration: f64,
    /// Weight of the (subtracted) distance to the reference profile.
    pub profile_penalty: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            selection: 1.0,
            public_score: 0.0,
            integration: 0.0,
            profile_penalty: 0.0,
        }
    }
}

/// One oracle evaluation of a generated plan.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub report: PlanReport,
    pub score: SelectionScore,
    pub reward: Option<f64>,
}

/// Render, analyze, screen.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SpaceSyntaxOracle {
    pub render: RenderConfig,
    pub oracle: OracleConfig,
    pub gates: GateConfig,
    pub weights: RewardWeights,
    /// Reference relative profile for the profile penalty.
    pub reference: Option<BTreeMap<Category, f64>>,
}

impl SpaceSyntaxOracle {
    pub fn evaluate(&self, plan_id: &str, x0: &[f64], cond: &Condition) -> Evaluation {
        let x = LayoutVector { coords: x0.to_vec() };
        let report = match render_layout(&x, cond, &self.render) {
            Ok(plan) => {
                let mut r = analyze_mask(plan_id, &plan.mask, &self.oracle);
                for f in plan.flags.names() {
                    r.add_flag(f);
                }
                r
            }
            Err(e) => {
                let mut r = PlanReport::failed(plan_id, PlanOutcome::ParseFailed, e.to_string(), &self.oracle);
                r.add_flag("render_failed");
                r
            }
        };
        let score = selection_score(&report, &self.gates);
        let reward = self.combine(&report, &score);
        Evaluation { report, score, reward }
    }

    fn combine(&self, r: &PlanReport, s: &SelectionScore) -> Option<f64> {
        let w = &self.weights;
        let term = |weight: f64, v: Option<f64>| -> Option<f64> {
            if weight == 0.0 {
                Some(0.0)
            } else {
                v.map(|v| weight * v)
            }
        };
        let penalty = if w.profile_penalty == 0.0 {
            Some(0.0)
        } else {
            self.profile_gap(r).map(|d| -w.profile_penalty * d)
        };
        let total = term(w.selection, Some(s.s))?
            + term(w.public_score, r.public_score)?
            + term(w.integration, r.integration)?
            + penalty?;
        total.is_finite().then_some(total)
    }

    /// Mean absolute gap between the plan's relative profile and the reference,
    /// over the reference categories present in the plan.
    fn profile_gap(&self, r: &PlanReport) -> Option<f64> {
        let reference = self.reference.as_ref()?;
        let gaps: Vec<f64> = reference
            .iter()
            .filter_map(|(g, y)| r.relative_integration.get(g).map(|v| (v - y).abs()))
            .collect();
        (!gaps.is_empty()).then(|| gaps.iter().sum::<f64>() / gaps.len() as f64)
    }
}

impl RewardOracle for SpaceSyntaxOracle {
    fn name(&self) -> &str {
        "space_syntax"
    }

    fn reward(&self, x0: &[f64], cond: &Condition) -> Option<f64> {
        self.evaluate(&cond.id, x0, cond).reward
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::condition::ConditionSampler;
    use crate::generator::layout::synthesize_plan;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn synthetic_target_peaks_at_target() {
        let o = SyntheticTarget {
            target: vec![0.5, -0.5],
        };
        let c = ConditionSampler::exact(4).sample("c".into(), &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(o.reward(&[0.5, -0.5], &c), Some(0.0));
        assert_eq!(o.reward(&[1.5, -0.5], &c), Some(-0.5));
    }

    #[test]
    fn synthesized_plans_score_and_garbage_fails() {
        let o = SpaceSyntaxOracle::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = ConditionSampler::exact(6).sample("c".into(), &mut rng);
        let x = synthesize_plan(&c, 8, &mut rng);
        let ev = o.evaluate("p", &x.coords, &c);
        assert!(ev.report.valid, "{:?}", ev.report);
        assert!(ev.reward.is_some());
        assert_eq!(ev.reward, Some(ev.score.s));

        let zeros = vec![0.0; 32];
        let ev = o.evaluate("z", &zeros, &c);
        assert!(ev.reward.is_none());
        assert!(ev.report.flags.contains(&"render_failed".to_string()));
    }

    #[test]
    fn weights_mix_terms() {
        let mut o = SpaceSyntaxOracle::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = ConditionSampler::exact(5).sample("c".into(), &mut rng);
        let x = synthesize_plan(&c, 8, &mut rng);
        let base = o.evaluate("p", &x.coords, &c);
        o.weights = RewardWeights {
            selection: 0.0,
            public_score: 2.0,
            integration: 0.0,
            profile_penalty: 0.0,
        };
        let r = o.reward(&x.coords, &c).unwrap();
        assert_eq!(r, 2.0 * base.report.public_score.unwrap());
        o.weights.profile_penalty = 1.0;
        assert!(o.reward(&x.coords, &c).is_none(), "penalty needs a reference");
        o.reference = Some(base.report.relative_integration.clone());
        assert_eq!(o.reward(&x.coords, &c).unwrap(), r);
    }
}
