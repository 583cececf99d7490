//! L2-regularized logistic regression trained by full-batch gradient descent,
//! and the train-only feature standardizer that precedes it.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self { learning_rate: 0.1, epochs: 200, l2: 1e-4 }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(z))` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Per-feature centering and scaling estimated on the training rows only.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    /// `rows` is row-major with `dim` columns.
    pub fn fit(rows: &[f64], dim: usize) -> Self {
        let n = (rows.len() / dim).max(1) as f64;
        let mut mean = vec![0.0; dim];
        for row in rows.chunks_exact(dim) {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for row in rows.chunks_exact(dim) {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m).powi(2);
            }
        }
        let scale = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 1e-12 { sd } else { 1.0 }
            })
            .collect();
        Self { mean, scale }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform_in_place(&self, rows: &mut [f64]) {
        for row in rows.chunks_exact_mut(self.dim()) {
            for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.scale) {
                *v = (*v - m) / s;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticHead {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LogisticHead {
    pub fn zeros(dim: usize) -> Self {
        Self { weights: vec![0.0; dim], bias: 0.0 }
    }

    fn logit(&self, row: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(row).map(|(w, x)| w * x).sum::<f64>()
    }

    pub fn score(&self, row: &[f64]) -> f64 {
        sigmoid(self.logit(row))
    }

    /// Mean binary cross-entropy plus `l2/2 * |w|^2` (bias unpenalized).
    pub fn loss(&self, rows: &[f64], labels: &[u8], l2: f64) -> f64 {
        let dim = self.weights.len();
        let n = labels.len() as f64;
        let data: f64 = rows
            .chunks_exact(dim)
            .zip(labels)
            .map(|(row, &y)| {
                let z = self.logit(row);
                // -[y log s(z) + (1-y) log(1-s(z))] = softplus(z) - y z
                softplus(z) - f64::from(y) * z
            })
            .sum();
        data / n + 0.5 * l2 * self.weights.iter().map(|w| w * w).sum::<f64>()
    }

    /// Gradient of [`Self::loss`] with respect to `(weights, bias)`.
    pub fn gradient(&self, rows: &[f64], labels: &[u8], l2: f64) -> (Vec<f64>, f64) {
        let dim = self.weights.len();
        let n = labels.len() as f64;
        let mut gw = vec![0.0; dim];
        let mut gb = 0.0;
        for (row, &y) in rows.chunks_exact(dim).zip(labels) {
            let err = sigmoid(self.logit(row)) - f64::from(y);
            gb += err;
            for (g, x) in gw.iter_mut().zip(row) {
                *g += err * x;
            }
        }
        for (g, w) in gw.iter_mut().zip(&self.weights) {
            *g = *g / n + l2 * w;
        }
        (gw, gb / n)
    }

    /// Trains from zero weights; returns the head and the loss before each epoch
    /// followed by the final loss.
    pub fn train(rows: &[f64], dim: usize, labels: &[u8], config: &LogisticConfig) -> (Self, Vec<f64>) {
        let mut head = Self::zeros(dim);
        let mut history = Vec::with_capacity(config.epochs + 1);
        for _ in 0..config.epochs {
            history.push(head.loss(rows, labels, config.l2));
            let (gw, gb) = head.gradient(rows, labels, config.l2);
            for (w, g) in head.weights.iter_mut().zip(&gw) {
                *w -= config.learning_rate * g;
            }
            head.bias -= config.learning_rate * gb;
        }
        history.push(head.loss(rows, labels, config.l2));
        (head, history)
    }
}
