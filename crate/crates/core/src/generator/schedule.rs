//! Base noise schedule and the respaced sampling schedule derived from it.

use serde::{Deserialize, Serialize};

/// Linear-beta forward process over `T` base steps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSchedule {
    pub betas: Vec<f64>,
    pub alphas_cumprod: Vec<f64>,
}

impl NoiseSchedule {
    pub const DEFAULT_STEPS: usize = 1000;
    pub const BETA_START: f64 = 1e-4;
    pub const BETA_END: f64 = 0.02;

    pub fn linear(steps: usize, beta_start: f64, beta_end: f64) -> Self {
        assert!(steps >= 1, "schedule needs at least one step");
        let betas: Vec<f64> = (0..steps)
            .map(|i| {
                if steps == 1 {
                    beta_start
                } else {
                    beta_start + (beta_end - beta_start) * i as f64 / (steps - 1) as f64
                }
            })
            .collect();
        let mut acc = 1.0;
        let alphas_cumprod = betas
            .iter()
            .map(|b| {
                acc *= 1.0 - b;
                acc
            })
            .collect();
        Self { betas, alphas_cumprod }
    }

    pub fn steps(&self) -> usize {
        self.betas.len()
    }
}

impl Default for NoiseSchedule {
    fn default() -> Self {
        Self::linear(Self::DEFAULT_STEPS, Self::BETA_START, Self::BETA_END)
    }
}

/// Reverse-process schedule over a subset of base timesteps.
///
/// Index `i` runs over the kept timesteps in ascending order. Sampling starts
/// at `i = L - 1` and ends with the deterministic step at `i = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingSchedule {
    /// Base timestep of each index, strictly increasing.
    pub timesteps: Vec<usize>,
    pub alpha_bar: Vec<f64>,
    pub betas: Vec<f64>,
    /// Posterior variance of each reverse step; zero at index 0.
    pub variance: Vec<f64>,
    /// Posterior-mean coefficient on the clean sample.
    pub coef_x0: Vec<f64>,
    /// Posterior-mean coefficient on the current noisy state.
    pub coef_xt: Vec<f64>,
}

impl SamplingSchedule {
    pub fn new(base: &NoiseSchedule, timesteps: &[usize]) -> Self {
        assert!(!timesteps.is_empty(), "sampling schedule needs at least one step");
        assert!(
            timesteps.windows(2).all(|w| w[0] < w[1]),
            "timesteps must be strictly increasing"
        );
        let alpha_bar: Vec<f64> = timesteps.iter().map(|&t| base.alphas_cumprod[t]).collect();
        let mut betas = Vec::with_capacity(timesteps.len());
        let mut variance = Vec::with_capacity(timesteps.len());
        let mut coef_x0 = Vec::with_capacity(timesteps.len());
        let mut coef_xt = Vec::with_capacity(timesteps.len());
        for i in 0..timesteps.len() {
            let ab = alpha_bar[i];
            let ab_prev = if i == 0 { 1.0 } else { alpha_bar[i - 1] };
            let beta = 1.0 - ab / ab_prev;
            betas.push(beta);
            variance.push(beta * (1.0 - ab_prev) / (1.0 - ab));
            coef_x0.push(beta * ab_prev.sqrt() / (1.0 - ab));
            coef_xt.push((1.0 - ab_prev) * (1.0 - beta).sqrt() / (1.0 - ab));
        }
        Self {
            timesteps: timesteps.to_vec(),
            alpha_bar,
            betas,
            variance,
            coef_x0,
            coef_xt,
        }
    }

    /// Every base step.
    pub fn full(base: &NoiseSchedule) -> Self {
        let ts: Vec<usize> = (0..base.steps()).collect();
        Self::new(base, &ts)
    }

    pub fn len(&self) -> usize {
        self.timesteps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timesteps.is_empty()
    }

    /// Posterior mean of the previous state given the clean sample.
    pub fn posterior_mean(&self, i: usize, x0: &[f64], xt: &[f64]) -> Vec<f64> {
        x0.iter()
            .zip(xt)
            .map(|(a, b)| self.coef_x0[i] * a + self.coef_xt[i] * b)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_endpoints() {
        let s = NoiseSchedule::default();
        assert_eq!(s.steps(), 1000);
        assert_eq!(s.betas[0], 1e-4);
        assert!((s.betas[999] - 0.02).abs() < 1e-15);
        assert!(s.alphas_cumprod.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn full_schedule_matches_base_betas() {
        let base = NoiseSchedule::linear(50, 1e-4, 0.02);
        let s = SamplingSchedule::full(&base);
        for i in 0..50 {
            assert!((s.betas[i] - base.betas[i]).abs() < 1e-12);
        }
        assert_eq!(s.variance[0], 0.0);
        assert!(s.variance[1..].iter().all(|&v| v > 0.0));
    }

    #[test]
    fn posterior_mean_at_first_index_is_the_clean_sample() {
        let base = NoiseSchedule::default();
        let s = SamplingSchedule::new(&base, &[3, 40, 200]);
        assert!((s.coef_x0[0] - 1.0).abs() < 1e-12);
        assert!(s.coef_xt[0].abs() < 1e-12);
        // posterior mean of a noiseless chain stays on x0
        let x0 = [0.3, -0.7];
        let ab = s.alpha_bar[2].sqrt();
        let xt: Vec<f64> = x0.iter().map(|v| v * ab).collect();
        let m = s.posterior_mean(2, &x0, &xt);
        let expect = s.alpha_bar[1].sqrt();
        for (mv, x) in m.iter().zip(x0) {
            assert!((mv - x * expect).abs() < 1e-12);
        }
    }
}
