//! Toy conditional reverse-diffusion layout generator.

pub mod checkpoint;
pub mod condition;
pub mod layout;
pub mod policy;
pub mod sampling;
pub mod schedule;
pub mod training;

pub use checkpoint::{load_policy, save_policy, CheckpointError};
pub use condition::{encode_condition, Condition, ConditionSampler, OodGuard};
pub use layout::{render_layout, synthesize_plan, LayoutVector, RenderConfig, RenderError, RenderedPlan};
pub use policy::{init_policy, p_mean_variance, Policy, PolicyConfig};
pub use sampling::{recompute_logp, rollout, rollout_batch, sample_step, StepRecord, Trajectory};
pub use schedule::{NoiseSchedule, SamplingSchedule};
pub use training::{denoising_step, pretrain_baseline, synthesize_base_set, Example, PretrainConfig};
