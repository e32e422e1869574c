//! Support vector machine trained by dual coordinate ascent with the bias
//! absorbed into the kernel (K + 1).

use serde::{Deserialize, Serialize};

use super::sq_dist;

const MAX_SWEEPS: usize = 200;
const TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SvmKernel {
    Linear,
    Rbf { gamma: f64 },
}

impl SvmKernel {
    fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            SvmKernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            SvmKernel::Rbf { gamma } => (-gamma * sq_dist(a, b)).exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub kernel: SvmKernel,
    pub c: f64,
    /// alpha_i * y_i for each support vector
    pub coefs: Vec<f64>,
    pub support: Vec<Vec<f64>>,
}

impl SvmModel {
    pub fn fit(rows: &[Vec<f64>], labels: &[bool], kernel: SvmKernel, c: f64) -> SvmModel {
        let n = rows.len();
        let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();

        // kernel matrix with the bias term absorbed
        let mut k = vec![0.0f64; n * n];
        for i in 0..n {
            for j in i..n {
                let v = kernel.eval(&rows[i], &rows[j]) + 1.0;
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
        }

        let mut alpha = vec![0.0f64; n];
        let mut f = vec![0.0f64; n]; // f_i = sum_j alpha_j y_j K_ij
        for _ in 0..MAX_SWEEPS {
            let mut max_step = 0.0f64;
            for i in 0..n {
                let grad = 1.0 - y[i] * f[i];
                let next = (alpha[i] + grad / k[i * n + i]).clamp(0.0, c);
                let delta = next - alpha[i];
                if delta != 0.0 {
                    alpha[i] = next;
                    let dy = delta * y[i];
                    let row = &k[i * n..(i + 1) * n];
                    for (fj, kij) in f.iter_mut().zip(row) {
                        *fj += dy * kij;
                    }
                    max_step = max_step.max(delta.abs());
                }
            }
            if max_step < TOLERANCE {
                break;
            }
        }

        let mut coefs = Vec::new();
        let mut support = Vec::new();
        for i in 0..n {
            if alpha[i] > 0.0 {
                coefs.push(alpha[i] * y[i]);
                support.push(rows[i].clone());
            }
        }
        SvmModel { kernel, c, coefs, support }
    }

    pub fn margin(&self, row: &[f64]) -> f64 {
        self.coefs
            .iter()
            .zip(&self.support)
            .map(|(a, sv)| a * (self.kernel.eval(sv, row) + 1.0))
            .sum()
    }

    /// Logistic squash of the margin; 0.5 exactly on the boundary.
    pub fn score(&self, row: &[f64]) -> f64 {
        let m = self.margin(row);
        if m >= 0.0 {
            1.0 / (1.0 + (-m).exp())
        } else {
            let e = m.exp();
            e / (1.0 + e)
        }
    }
}
