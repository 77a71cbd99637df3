//! Affine Gaussian reverse-diffusion policy.
//!
//! `mu = W_x x_t + W_t emb(t) + W_c enc(c) + b`, with a fixed per-step
//! variance taken from the sampling schedule.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::ConfigError;
use crate::generator::condition::{encode_condition, encoding_len, Condition};
use crate::generator::schedule::SamplingSchedule;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    /// State dimension.
    pub dim: usize,
    /// Sinusoidal timestep-embedding width (even).
    pub emb_dim: usize,
    /// Condition-encoding width.
    pub cond_dim: usize,
    /// Room slots when the state is a floor-plan layout vector.
    pub max_rooms: Option<usize>,
    /// Half-width of the uniform initialization.
    pub init_scale: f64,
}

impl PolicyConfig {
    pub fn for_layout(max_rooms: usize) -> Self {
        Self {
            dim: 4 * max_rooms,
            emb_dim: 16,
            cond_dim: encoding_len(max_rooms),
            max_rooms: Some(max_rooms),
            init_scale: 0.01,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.dim == 0 {
            return bad("policy dim must be positive".into());
        }
        if !self.emb_dim.is_multiple_of(2) {
            return bad(format!("embedding width {} must be even", self.emb_dim));
        }
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return bad("init scale must be finite and non-negative".into());
        }
        if let Some(m) = self.max_rooms {
            if self.dim != 4 * m {
                return bad(format!(
                    "dim {} does not match {m} room slots (expected {})",
                    self.dim,
                    4 * m
                ));
            }
            if self.cond_dim != encoding_len(m) {
                return bad(format!(
                    "condition width {} does not match {m} room slots (expected {})",
                    self.cond_dim,
                    encoding_len(m)
                ));
            }
        }
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        self.dim * (self.dim + self.emb_dim + self.cond_dim + 1)
    }

    /// Offsets of `W_x`, `W_t`, `W_c`, `b` in the flat parameter vector.
    pub fn offsets(&self) -> [usize; 4] {
        let d = self.dim;
        let wt = d * d;
        let wc = wt + d * self.emb_dim;
        let b = wc + d * self.cond_dim;
        [0, wt, wc, b]
    }
}

/// Sinusoidal embedding of a base timestep.
pub fn timestep_embedding(t: usize, width: usize) -> Vec<f64> {
    let half = width / 2;
    let mut v = Vec::with_capacity(width);
    for k in 0..half {
        let freq = (-(10000f64.ln()) * k as f64 / half as f64).exp();
        v.push((t as f64 * freq).sin());
    }
    for k in 0..half {
        let freq = (-(10000f64.ln()) * k as f64 / half as f64).exp();
        v.push((t as f64 * freq).cos());
    }
    v
}

/// Flat row-major parameters `[W_x | W_t | W_c | b]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub config: PolicyConfig,
    pub params: Vec<f64>,
}

pub fn init_policy(config: PolicyConfig, seed: u64) -> Result<Policy, ConfigError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = config.init_scale;
    let params = (0..config.param_count())
        .map(|_| if s > 0.0 { rng.random_range(-s..s) } else { 0.0 })
        .collect();
    Ok(Policy { config, params })
}

impl Policy {
    pub fn zeros(config: PolicyConfig) -> Self {
        Self {
            params: vec![0.0; config.param_count()],
            config,
        }
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    /// Condition features for this policy; zeros when it is not a layout policy.
    pub fn encode(&self, c: &Condition) -> Vec<f64> {
        match self.config.max_rooms {
            Some(m) => encode_condition(c, m),
            None => vec![0.0; self.config.cond_dim],
        }
    }

    pub fn w_x(&self) -> &[f64] {
        let [a, b, _, _] = self.config.offsets();
        &self.params[a..b]
    }

    pub fn w_x_mut(&mut self) -> &mut [f64] {
        let [a, b, _, _] = self.config.offsets();
        &mut self.params[a..b]
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        let [_, _, _, b] = self.config.offsets();
        &mut self.params[b..]
    }

    /// Policy mean for state `x` at base timestep `t`.
    pub fn mean(&self, x: &[f64], t: usize, cond: &[f64]) -> Vec<f64> {
        let c = &self.config;
        assert_eq!(x.len(), c.dim, "state width");
        assert_eq!(cond.len(), c.cond_dim, "condition width");
        let emb = timestep_embedding(t, c.emb_dim);
        let [ox, ot, oc, ob] = c.offsets();
        let p = &self.params;
        (0..c.dim)
            .map(|r| {
                let mut acc = p[ob + r];
                acc += dot(&p[ox + r * c.dim..ox + (r + 1) * c.dim], x);
                acc += dot(&p[ot + r * c.emb_dim..ot + (r + 1) * c.emb_dim], &emb);
                acc += dot(&p[oc + r * c.cond_dim..oc + (r + 1) * c.cond_dim], cond);
                acc
            })
            .collect()
    }

    /// Adds `d(g . mu)/d(theta)` into `grad` for upstream gradient `g` on the mean.
    pub fn accumulate_mean_grad(&self, x: &[f64], t: usize, cond: &[f64], g: &[f64], grad: &mut [f64]) {
        let c = &self.config;
        let emb = timestep_embedding(t, c.emb_dim);
        let [ox, ot, oc, ob] = c.offsets();
        for r in 0..c.dim {
            let gr = g[r];
            if gr == 0.0 {
                continue;
            }
            axpy(gr, x, &mut grad[ox + r * c.dim..ox + (r + 1) * c.dim]);
            axpy(gr, &emb, &mut grad[ot + r * c.emb_dim..ot + (r + 1) * c.emb_dim]);
            axpy(gr, cond, &mut grad[oc + r * c.cond_dim..oc + (r + 1) * c.cond_dim]);
            grad[ob + r] += gr;
        }
    }
}

/// Mean and log-variance of the reverse step at schedule index `i`. The
/// variance at index 0 is zero, so its log-variance is negative infinity.
pub fn p_mean_variance(pol: &Policy, x: &[f64], i: usize, cond: &[f64], sched: &SamplingSchedule) -> (Vec<f64>, f64) {
    let mu = pol.mean(x, sched.timesteps[i], cond);
    (mu, sched.variance[i].ln())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
