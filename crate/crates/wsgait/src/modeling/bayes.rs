//! Gaussian naive Bayes with a variance floor.

use serde::{Deserialize, Serialize};

use super::BAYES_VAR_FLOOR;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesModel {
    pub prior_genuine: f64,
    pub mean_genuine: Vec<f64>,
    pub var_genuine: Vec<f64>,
    pub mean_impostor: Vec<f64>,
    pub var_impostor: Vec<f64>,
}

fn class_stats(rows: &[Vec<f64>], labels: &[bool], which: bool, d: usize) -> (Vec<f64>, Vec<f64>) {
    let mut mean = vec![0.0; d];
    let mut count = 0.0;
    for (row, &l) in rows.iter().zip(labels) {
        if l == which {
            count += 1.0;
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
    }
    for m in &mut mean {
        *m /= count;
    }
    let mut var = vec![0.0; d];
    for (row, &l) in rows.iter().zip(labels) {
        if l == which {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
    }
    for s in &mut var {
        *s = (*s / count).max(BAYES_VAR_FLOOR);
    }
    (mean, var)
}

impl BayesModel {
    pub fn fit(rows: &[Vec<f64>], labels: &[bool]) -> BayesModel {
        let d = rows[0].len();
        let n_genuine = labels.iter().filter(|&&l| l).count();
        let (mean_genuine, var_genuine) = class_stats(rows, labels, true, d);
        let (mean_impostor, var_impostor) = class_stats(rows, labels, false, d);
        BayesModel {
            prior_genuine: n_genuine as f64 / labels.len() as f64,
            mean_genuine,
            var_genuine,
            mean_impostor,
            var_impostor,
        }
    }

    /// Posterior probability of the genuine class.
    pub fn score(&self, row: &[f64]) -> f64 {
        let log_lik = |means: &[f64], vars: &[f64], prior: f64| -> f64 {
            let mut ll = prior.max(1e-300).ln();
            for ((v, m), s2) in row.iter().zip(means).zip(vars) {
                ll -= 0.5 * ((2.0 * std::f64::consts::PI * s2).ln() + (v - m) * (v - m) / s2);
            }
            ll
        };
        let lg = log_lik(&self.mean_genuine, &self.var_genuine, self.prior_genuine);
        let li = log_lik(&self.mean_impostor, &self.var_impostor, 1.0 - self.prior_genuine);
        1.0 / (1.0 + (li - lg).exp())
    }
}
