//! One-vs-rest linear SVM fitted by stochastic sub-gradient descent on the
//! regularized hinge loss.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    /// Regularization weight lambda.
    pub lambda: f64,
    pub epochs: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            lambda: 1e-3,
            epochs: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearMachine {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearMachine {
    pub fn score(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }
}

fn fit_binary(x: &[Vec<f64>], target: &[f64], params: &SvmParams, rng: &mut ChaCha8Rng) -> LinearMachine {
    let dim = x[0].len();
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut t = 0usize;
    for _ in 0..params.epochs.max(1) {
        order.shuffle(rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (params.lambda * t as f64);
            let margin = target[i] * (w.iter().zip(&x[i]).map(|(a, v)| a * v).sum::<f64>() + b);
            // the bias is a weight on a constant unit feature
            let shrink = 1.0 - eta * params.lambda;
            for wj in w.iter_mut() {
                *wj *= shrink;
            }
            b *= shrink;
            if margin < 1.0 {
                for (wj, v) in w.iter_mut().zip(&x[i]) {
                    *wj += eta * target[i] * v;
                }
                b += eta * target[i];
            }
        }
        // keep the weight norm inside the feasible ball
        let norm = (w.iter().map(|v| v * v).sum::<f64>() + b * b).sqrt();
        let cap = 1.0 / params.lambda.sqrt();
        if norm > cap {
            let s = cap / norm;
            w.iter_mut().for_each(|v| *v *= s);
            b *= s;
        }
    }
    LinearMachine { weights: w, bias: b }
}

pub(crate) fn fit_ovr(x: &[Vec<f64>], y: &[usize], n_classes: usize, params: &SvmParams, seed: u64) -> Vec<LinearMachine> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_classes)
        .map(|c| {
            let target: Vec<f64> = y.iter().map(|&l| if l == c { 1.0 } else { -1.0 }).collect();
            fit_binary(x, &target, params, &mut rng)
        })
        .collect()
}

/// Class with the largest score; ties go to the lowest class index.
pub(crate) fn predict_ovr(machines: &[LinearMachine], x: &[f64]) -> usize {
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (c, m) in machines.iter().enumerate() {
        let s = m.score(x);
        if s > best_score {
            best = c;
            best_score = s;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separates_a_line() {
        let x: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64 / 50.0 - 1.0, ((i * 13) % 7) as f64 / 7.0]).collect();
        let y: Vec<usize> = x.iter().map(|p| usize::from(p[0] > 0.05)).collect();
        let m = fit_ovr(&x, &y, 2, &SvmParams { lambda: 1e-4, epochs: 200 }, 1);
        let correct = x.iter().zip(&y).filter(|(p, &l)| predict_ovr(&m, p) == l).count();
        assert!(correct >= 97, "{correct}");
    }
}
