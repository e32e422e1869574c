//! k-nearest neighbors with a fail-closed distance tie-break: equidistant
//! impostor rows are preferred over genuine ones when filling the
//! neighborhood, so an exact midpoint between opposite labels rejects.

use serde::{Deserialize, Serialize};

use super::sq_dist;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<bool>,
}

impl KnnModel {
    pub fn fit(rows: &[Vec<f64>], labels: &[bool], k: usize) -> KnnModel {
        KnnModel { k: k.max(1), rows: rows.to_vec(), labels: labels.to_vec() }
    }

    /// Fraction of genuine votes among the k nearest rows.
    pub fn score(&self, row: &[f64]) -> f64 {
        let k = self.k.min(self.rows.len());
        let mut dists: Vec<(f64, bool, usize)> = self
            .rows
            .iter()
            .zip(&self.labels)
            .enumerate()
            .map(|(i, (r, &l))| (sq_dist(r, row), l, i))
            .collect();
        // impostor (false) sorts before genuine on exact distance ties
        dists.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap()
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });
        let genuine = dists[..k].iter().filter(|&&(_, l, _)| l).count();
        genuine as f64 / k as f64
    }
}
