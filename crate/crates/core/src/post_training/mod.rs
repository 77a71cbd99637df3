//! Post-training strategies: Top-K iterative fine-tuning and PPO.

pub mod iter;
pub mod objective;
pub mod oracles;
pub mod ppo;
pub mod respace;

pub use iter::{sspt_iter_round, BaseSet, IterConfig, IterDiagnostics, IterEnv};
pub use objective::{
    clip_rewards, clipped_surrogate, gauss_logprob, kl_estimate, normalize_advantages, ppo_ratio, RewardClip,
};
pub use oracles::{RewardOracle, RewardWeights, SpaceSyntaxOracle, SyntheticTarget};
pub use ppo::{sspt_ppo_round, PpoConfig, PpoDiagnostics, PpoEnv, RolloutBatch};
pub use respace::{respace, RespaceError};
