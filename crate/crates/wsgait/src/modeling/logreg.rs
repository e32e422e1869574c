//! L2-regularized logistic regression via full-batch gradient descent.

use serde::{Deserialize, Serialize};

const ITERATIONS: usize = 400;
const LEARNING_RATE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl LogRegModel {
    pub fn fit(rows: &[Vec<f64>], labels: &[bool], l2: f64) -> LogRegModel {
        let n = rows.len();
        let d = rows[0].len();
        let mut w = vec![0.0f64; d];
        let mut b = 0.0f64;
        let inv_n = 1.0 / n as f64;
        let mut grad = vec![0.0f64; d];
        for _ in 0..ITERATIONS {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut grad_b = 0.0;
            for (row, &label) in rows.iter().zip(labels) {
                let z = b + w.iter().zip(row).map(|(wi, xi)| wi * xi).sum::<f64>();
                let err = sigmoid(z) - (label as u8 as f64);
                for (g, x) in grad.iter_mut().zip(row) {
                    *g += err * x;
                }
                grad_b += err;
            }
            for (wi, g) in w.iter_mut().zip(&grad) {
                *wi -= LEARNING_RATE * (g * inv_n + l2 * *wi);
            }
            b -= LEARNING_RATE * grad_b * inv_n; // bias unregularized
        }
        LogRegModel { weights: w, bias: b }
    }

    pub fn score(&self, row: &[f64]) -> f64 {
        let z = self.bias + self.weights.iter().zip(row).map(|(w, x)| w * x).sum::<f64>();
        sigmoid(z)
    }
}
