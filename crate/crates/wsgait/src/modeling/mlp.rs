//! One-hidden-layer perceptron trained with full-batch momentum descent
//! and early stopping on a held-out split.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::derive_seed;

const MAX_EPOCHS: usize = 200;
const MOMENTUM: f64 = 0.9;
const PATIENCE: usize = 20;
const MIN_DELTA: f64 = 1e-4;
const HOLDOUT_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub hidden: usize,
    /// hidden x input, row-major
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

struct Workspace {
    hidden_out: Vec<f64>,
}

impl MlpModel {
    fn forward(&self, row: &[f64], ws: &mut Workspace) -> f64 {
        let d = row.len();
        for h in 0..self.hidden {
            let mut z = self.b1[h];
            let base = h * d;
            for (j, &x) in row.iter().enumerate() {
                z += self.w1[base + j] * x;
            }
            ws.hidden_out[h] = z.tanh();
        }
        let mut z = self.b2;
        for h in 0..self.hidden {
            z += self.w2[h] * ws.hidden_out[h];
        }
        sigmoid(z)
    }

    fn log_loss(&self, rows: &[&Vec<f64>], labels: &[bool], ws: &mut Workspace) -> f64 {
        let mut loss = 0.0;
        for (row, &label) in rows.iter().zip(labels) {
            let p = self.forward(row, ws).clamp(1e-12, 1.0 - 1e-12);
            loss -= if label { p.ln() } else { (1.0 - p).ln() };
        }
        loss / rows.len() as f64
    }

    pub fn fit(rows: &[Vec<f64>], labels: &[bool], hidden: usize, lr: f64, seed: u64) -> MlpModel {
        let n = rows.len();
        let d = rows[0].len();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &["mlp-init"]));

        let s1 = 1.0 / (d as f64).sqrt();
        let s2 = 1.0 / (hidden as f64).sqrt();
        let mut model = MlpModel {
            hidden,
            w1: (0..hidden * d).map(|_| rng.random_range(-s1..s1)).collect(),
            b1: vec![0.0; hidden],
            w2: (0..hidden).map(|_| rng.random_range(-s2..s2)).collect(),
            b2: 0.0,
        };

        // stratified holdout for early stopping
        let genuine: Vec<usize> = (0..n).filter(|&i| labels[i]).collect();
        let impostor: Vec<usize> = (0..n).filter(|&i| !labels[i]).collect();
        let gh = ((genuine.len() as f64 * HOLDOUT_FRACTION).round() as usize)
            .clamp(usize::from(genuine.len() > 1), genuine.len().saturating_sub(1));
        let ih = ((impostor.len() as f64 * HOLDOUT_FRACTION).round() as usize)
            .clamp(usize::from(impostor.len() > 1), impostor.len().saturating_sub(1));
        let (val_idx, fit_idx): (Vec<usize>, Vec<usize>) = {
            let mut val: Vec<usize> = genuine.iter().take(gh).chain(impostor.iter().take(ih)).copied().collect();
            val.sort_unstable();
            let fit: Vec<usize> = (0..n).filter(|i| !val.contains(i)).collect();
            (val, fit)
        };
        let use_holdout = !val_idx.is_empty()
            && fit_idx.iter().any(|&i| labels[i])
            && fit_idx.iter().any(|&i| !labels[i]);
        let (fit_rows, fit_labels): (Vec<&Vec<f64>>, Vec<bool>) = if use_holdout {
            (fit_idx.iter().map(|&i| &rows[i]).collect(), fit_idx.iter().map(|&i| labels[i]).collect())
        } else {
            (rows.iter().collect(), labels.to_vec())
        };
        let (val_rows, val_labels): (Vec<&Vec<f64>>, Vec<bool>) = if use_holdout {
            (val_idx.iter().map(|&i| &rows[i]).collect(), val_idx.iter().map(|&i| labels[i]).collect())
        } else {
            (Vec::new(), Vec::new())
        };

        let nf = fit_rows.len() as f64;
        let mut ws = Workspace { hidden_out: vec![0.0; hidden] };
        let mut v_w1 = vec![0.0f64; hidden * d];
        let mut v_b1 = vec![0.0f64; hidden];
        let mut v_w2 = vec![0.0f64; hidden];
        let mut v_b2 = 0.0f64;
        let mut g_w1 = vec![0.0f64; hidden * d];
        let mut g_b1 = vec![0.0f64; hidden];
        let mut g_w2 = vec![0.0f64; hidden];

        let mut best = model.clone();
        let mut best_loss = f64::INFINITY;
        let mut stale = 0usize;

        for _epoch in 0..MAX_EPOCHS {
            g_w1.iter_mut().for_each(|g| *g = 0.0);
            g_b1.iter_mut().for_each(|g| *g = 0.0);
            g_w2.iter_mut().for_each(|g| *g = 0.0);
            let mut g_b2 = 0.0f64;

            for (row, &label) in fit_rows.iter().zip(&fit_labels) {
                let p = model.forward(row, &mut ws);
                let err_out = p - (label as u8 as f64);
                g_b2 += err_out;
                for h in 0..hidden {
                    g_w2[h] += err_out * ws.hidden_out[h];
                    let dh = err_out * model.w2[h] * (1.0 - ws.hidden_out[h] * ws.hidden_out[h]);
                    g_b1[h] += dh;
                    let base = h * d;
                    for (j, &x) in row.iter().enumerate() {
                        g_w1[base + j] += dh * x;
                    }
                }
            }

            for (i, g) in g_w1.iter().enumerate() {
                v_w1[i] = MOMENTUM * v_w1[i] - lr * g / nf;
                model.w1[i] += v_w1[i];
            }
            for (i, g) in g_b1.iter().enumerate() {
                v_b1[i] = MOMENTUM * v_b1[i] - lr * g / nf;
                model.b1[i] += v_b1[i];
            }
            for (i, g) in g_w2.iter().enumerate() {
                v_w2[i] = MOMENTUM * v_w2[i] - lr * g / nf;
                model.w2[i] += v_w2[i];
            }
            v_b2 = MOMENTUM * v_b2 - lr * g_b2 / nf;
            model.b2 += v_b2;

            if use_holdout {
                let loss = model.log_loss(&val_rows, &val_labels, &mut ws);
                if loss < best_loss - MIN_DELTA {
                    best_loss = loss;
                    best = model.clone();
                    stale = 0;
                } else {
                    stale += 1;
                    if stale >= PATIENCE {
                        break;
                    }
                }
            }
        }

        if use_holdout && best_loss.is_finite() {
            best
        } else {
            model
        }
    }

    pub fn score(&self, row: &[f64]) -> f64 {
        let mut ws = Workspace { hidden_out: vec![0.0; self.hidden] };
        self.forward(row, &mut ws)
    }
}
