use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Additive RSS noise: white Gaussian plus sparse heavy-tailed impulses that
/// push one or two consecutive samples up or down by `impulse_scale` dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    pub gaussian_sigma: f64,
    pub impulse_prob: f64,
    pub impulse_scale: f64,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            gaussian_sigma: 0.01,
            impulse_prob: 0.0,
            impulse_scale: 3.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRealization {
    pub values: Vec<f64>,
    /// True where an impulse was added.
    pub impulse_mask: Vec<bool>,
}

impl NoiseModel {
    pub fn silent() -> Self {
        Self {
            gaussian_sigma: 0.0,
            impulse_prob: 0.0,
            impulse_scale: 0.0,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gaussian_sigma >= 0.0) {
            return Err(Error::invalid("noise sigma must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.impulse_prob) {
            return Err(Error::invalid("impulse probability must lie in [0, 1]"));
        }
        if !self.impulse_scale.is_finite() {
            return Err(Error::invalid("impulse scale must be finite"));
        }
        Ok(())
    }

    pub fn realize(&self, n: usize) -> Result<NoiseRealization> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let normal = Normal::new(0.0, self.gaussian_sigma).map_err(|e| Error::invalid(e.to_string()))?;
        let mut values: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
        let mut impulse_mask = vec![false; n];
        if self.impulse_prob > 0.0 {
            let mut i = 0;
            while i < n {
                if rng.random::<f64>() < self.impulse_prob {
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    let len = rng.random_range(1..=2usize);
                    for j in i..(i + len).min(n) {
                        values[j] += sign * self.impulse_scale;
                        impulse_mask[j] = true;
                    }
                    i += len;
                } else {
                    i += 1;
                }
            }
        }
        Ok(NoiseRealization {
            values,
            impulse_mask,
        })
    }
}
