//! Distribution-overlap analysis (Bhattacharyya coefficients) and the
//! imitator learning-curve regression.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::modeling::SelectedFeatures;

/// Default number of equal-width partitions for overlap histograms.
pub const DEFAULT_PARTITIONS: usize = 10;

/// Pearson correlation; `None` when either side has zero variance.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx < 1e-24 || syy < 1e-24 {
        return None;
    }
    Some(sxy / (sxx.sqrt() * syy.sqrt()))
}

/// Spearman rank correlation with average ranks on ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::invalid("spearman needs two equal-length sequences of >= 2 values"));
    }
    let ranks = |v: &[f64]| -> Vec<f64> {
        let mut order: Vec<usize> = (0..v.len()).collect();
        order.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap().then(a.cmp(&b)));
        let mut out = vec![0.0; v.len()];
        let mut i = 0;
        while i < order.len() {
            let mut j = i;
            while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &order[i..=j] {
                out[k] = avg;
            }
            i = j + 1;
        }
        out
    };
    pearson(&ranks(xs), &ranks(ys))
        .ok_or_else(|| Error::invalid("spearman undefined: a sequence is constant"))
}

/// Bhattacharyya coefficient between two samples: the shared range is cut
/// into `partitions` equal-width bins, counts become relative frequencies,
/// and BC = sum of sqrt(p1 * p2) per bin. 0 means disjoint, 1 identical.
pub fn bhattacharyya(sample1: &[f64], sample2: &[f64], partitions: usize) -> Result<f64> {
    if sample1.is_empty() || sample2.is_empty() {
        return Err(Error::invalid("both samples must be non-empty"));
    }
    if partitions < 2 {
        return Err(Error::invalid("partitions must be >= 2"));
    }
    let mn = sample1
        .iter()
        .chain(sample2)
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let mx = sample1
        .iter()
        .chain(sample2)
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let mut p1 = vec![0.0f64; partitions];
    let mut p2 = vec![0.0f64; partitions];
    if mx == mn {
        p1[0] = 1.0;
        p2[0] = 1.0;
    } else {
        let width = (mx - mn) / partitions as f64;
        for &v in sample1 {
            let idx = (((v - mn) / width).floor() as usize).min(partitions - 1);
            p1[idx] += 1.0 / sample1.len() as f64;
        }
        for &v in sample2 {
            let idx = (((v - mn) / width).floor() as usize).min(partitions - 1);
            p2[idx] += 1.0 / sample2.len() as f64;
        }
    }
    let bc: f64 = p1.iter().zip(&p2).map(|(a, b)| (a * b).sqrt()).sum();
    Ok(bc.min(1.0))
}

/// Per-feature overlap table between a target and a rival population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BcReport {
    /// (feature, BC) rows in selection order.
    pub rows: Vec<(String, f64)>,
    pub median_bc: f64,
    pub mean_bc: f64,
    pub stddev_bc: f64,
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

impl BcReport {
    pub fn from_rows(rows: Vec<(String, f64)>) -> Result<BcReport> {
        if rows.is_empty() {
            return Err(Error::invalid("BC report needs at least one feature row"));
        }
        let values: Vec<f64> = rows.iter().map(|(_, v)| *v).collect();
        let mut sorted = values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
        Ok(BcReport {
            rows,
            median_bc: median(&sorted),
            mean_bc: mean,
            stddev_bc: var.sqrt(),
        })
    }
}

/// Computes one BC row per selected feature between the target's vectors
/// and another population's vectors.
pub fn bc_report(
    target_vectors: &[FeatureVector],
    other_vectors: &[FeatureVector],
    selected: &SelectedFeatures,
    partitions: usize,
) -> Result<BcReport> {
    if target_vectors.is_empty() || other_vectors.is_empty() {
        return Err(Error::invalid("both vector sets must be non-empty"));
    }
    let column = |vectors: &[FeatureVector], name: &str| -> Result<Vec<f64>> {
        vectors
            .iter()
            .map(|v| {
                v.values
                    .get(name)
                    .copied()
                    .ok_or_else(|| Error::MissingFeature(name.to_string()))
            })
            .collect()
    };
    let mut rows = Vec::with_capacity(selected.names.len());
    for name in &selected.names {
        let a = column(target_vectors, name)?;
        let b = column(other_vectors, name)?;
        rows.push((name.clone(), bhattacharyya(&a, &b, partitions)?));
    }
    BcReport::from_rows(rows)
}

/// Direction the per-iteration learning series is heading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Improved,
    Worsened,
    Flat,
}

/// Least-squares fit of Y(i) = b1 + b2 * exp(b3 / i).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurveFit {
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    /// r_i = |Y(i) - y(i)| per observation, in input order.
    pub residuals: Vec<f64>,
    pub sse: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl LearningCurveFit {
    pub fn predict(&self, i: f64) -> f64 {
        self.beta1 + self.beta2 * (self.beta3 / i).exp()
    }

    /// Same signs of b2 and b3 mean the learner improved; opposite signs
    /// mean it worsened.
    pub fn trend(&self) -> Trend {
        if self.beta2.abs() < 1e-9 || self.beta3.abs() < 1e-9 {
            Trend::Flat
        } else if self.beta2.signum() == self.beta3.signum() {
            Trend::Improved
        } else {
            Trend::Worsened
        }
    }
}

fn curve_sse(obs: &[(u32, f64)], b1: f64, b2: f64, b3: f64) -> f64 {
    obs.iter()
        .map(|&(i, y)| {
            let r = b1 + b2 * (b3 / i as f64).exp() - y;
            r * r
        })
        .sum()
}

/// Linear least squares for (b1, b2) at fixed b3.
fn solve_linear(obs: &[(u32, f64)], b3: f64) -> (f64, f64) {
    let n = obs.len() as f64;
    let mut sb = 0.0;
    let mut sbb = 0.0;
    let mut sy = 0.0;
    let mut sby = 0.0;
    for &(i, y) in obs {
        let b = (b3 / i as f64).exp();
        sb += b;
        sbb += b * b;
        sy += y;
        sby += b * y;
    }
    let det = n * sbb - sb * sb;
    if det.abs() < 1e-12 {
        (sy / n, 0.0)
    } else {
        let b1 = (sbb * sy - sb * sby) / det;
        let b2 = (n * sby - sb * sy) / det;
        (b1, b2)
    }
}

/// Solves a 3x3 system via Gaussian elimination with partial pivoting;
/// `None` if singular.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let mut pivot = col;
        for row in col + 1..3 {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0f64; 3];
    for col in (0..3).rev() {
        let mut s = b[col];
        for k in col + 1..3 {
            s -= a[col][k] * x[k];
        }
        x[col] = s / a[col][col];
    }
    Some(x)
}

const REFINE_STEPS: usize = 200;

/// Fits the learning-curve model by a beta3 grid search (linear solves for
/// beta1/beta2) followed by damped Gauss-Newton refinement. Deterministic;
/// if refinement stalls the best grid solution is returned with
/// `converged = false`.
pub fn fit_learning_curve(observations: &[(u32, f64)]) -> Result<LearningCurveFit> {
    if observations.len() < 4 {
        return Err(Error::invalid("learning-curve fit needs at least 4 observations"));
    }
    if observations.iter().any(|&(i, _)| i < 1) {
        return Err(Error::invalid("observation indices must be >= 1"));
    }

    // grid over beta3 in [-5, 5] step 0.5
    let mut best = (f64::INFINITY, 0.0, 0.0, 0.0);
    for step in 0..=20 {
        let b3 = -5.0 + 0.5 * step as f64;
        let (b1, b2) = solve_linear(observations, b3);
        let sse = curve_sse(observations, b1, b2, b3);
        if sse < best.0 {
            best = (sse, b1, b2, b3);
        }
    }
    let (mut sse, mut b1, mut b2, mut b3) = best;

    // Gauss-Newton with step halving
    let mut converged = false;
    let mut iterations = 0usize;
    for _ in 0..REFINE_STEPS {
        iterations += 1;
        // normal equations J^T J  /  J^T r
        let mut jtj = [[0.0f64; 3]; 3];
        let mut jtr = [0.0f64; 3];
        for &(i, y) in observations {
            let inv_i = 1.0 / i as f64;
            let e = (b3 * inv_i).exp();
            let j = [1.0, e, b2 * e * inv_i];
            let r = b1 + b2 * e - y;
            for a in 0..3 {
                for b in 0..3 {
                    jtj[a][b] += j[a] * j[b];
                }
                jtr[a] += j[a] * r;
            }
        }
        let Some(delta) = solve3(jtj, jtr) else {
            break;
        };
        let mut accepted = false;
        let mut scale = 1.0;
        for _ in 0..24 {
            let cand = (b1 - scale * delta[0], b2 - scale * delta[1], b3 - scale * delta[2]);
            let cand_sse = curve_sse(observations, cand.0, cand.1, cand.2);
            if cand_sse < sse {
                let improvement = sse - cand_sse;
                b1 = cand.0;
                b2 = cand.1;
                b3 = cand.2;
                sse = cand_sse;
                accepted = true;
                if improvement < 1e-14 * (1.0 + sse) {
                    converged = true;
                }
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            converged = true; // no descent direction left
            break;
        }
        if converged {
            break;
        }
    }

    let residuals: Vec<f64> = observations
        .iter()
        .map(|&(i, y)| (b1 + b2 * (b3 / i as f64).exp() - y).abs())
        .collect();
    let sse = residuals.iter().map(|r| r * r).sum();
    Ok(LearningCurveFit { beta1: b1, beta2: b2, beta3: b3, residuals, sse, iterations, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::Session;
    use std::collections::BTreeMap;

    #[test]
    fn bc_identical_samples_is_one() {
        let s = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(bhattacharyya(&s, &s, 10).unwrap(), 1.0);
    }

    #[test]
    fn bc_disjoint_supports_is_zero() {
        let a = vec![0.0, 1.0, 2.0];
        let b = vec![100.0, 101.0, 102.0];
        assert_eq!(bhattacharyya(&a, &b, 10).unwrap(), 0.0);
    }

    #[test]
    fn bc_two_bin_hand_computation() {
        // p1 = (0.5, 0.5), p2 = (0.9, 0.1) over 2 bins
        let a: Vec<f64> = (0..10).map(|i| if i < 5 { 0.25 } else { 0.75 }).collect();
        let b: Vec<f64> = (0..10).map(|i| if i < 9 { 0.25 } else { 0.75 }).collect();
        let bc = bhattacharyya(&a, &b, 2).unwrap();
        let expect = (0.5f64 * 0.9).sqrt() + (0.5f64 * 0.1).sqrt();
        assert!((bc - expect).abs() < 1e-9);
        assert!((bc - 0.8944).abs() < 1e-4);
    }

    #[test]
    fn bc_is_symmetric_bit_exactly() {
        let a = vec![0.0, 0.5, 1.5, 2.0, 3.0, 3.3];
        let b = vec![1.0, 1.2, 2.5, 4.0];
        let ab = bhattacharyya(&a, &b, 7).unwrap();
        let ba = bhattacharyya(&b, &a, 7).unwrap();
        assert_eq!(ab.to_bits(), ba.to_bits());
    }

    #[test]
    fn bc_does_not_decrease_as_distributions_converge() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let base: Vec<f64> = (0..400)
            .map(|_| {
                let u1: f64 = rng.random::<f64>().max(1e-12);
                let u2: f64 = rng.random();
                (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            })
            .collect();
        let mut last = 0.0;
        for shift in [4.0, 3.0, 2.0, 1.0, 0.0] {
            let shifted: Vec<f64> = base.iter().map(|v| v + shift).collect();
            let bc = bhattacharyya(&base, &shifted, 10).unwrap();
            assert!(bc >= last - 1e-12, "shift {shift}: {bc} < {last}");
            last = bc;
        }
        assert_eq!(last, 1.0);
    }

    fn vector(values: &[(&str, f64)]) -> FeatureVector {
        FeatureVector {
            subject_id: "t".into(),
            session: Session::Testing,
            start_ms: 0,
            label: None,
            values: values.iter().map(|(k, v)| (k.to_string(), *v)).collect::<BTreeMap<_, _>>(),
        }
    }

    #[test]
    fn bc_report_shape_and_self_overlap() {
        let names: Vec<String> = (0..30).map(|i| format!("f{i}")).collect();
        let selected = SelectedFeatures::unscored(names.clone());
        let vectors: Vec<FeatureVector> = (0..12)
            .map(|k| {
                let vals: Vec<(String, f64)> = names
                    .iter()
                    .map(|n| (n.clone(), k as f64 * 0.3))
                    .collect();
                FeatureVector {
                    subject_id: "t".into(),
                    session: Session::Testing,
                    start_ms: k,
                    label: None,
                    values: vals.into_iter().collect(),
                }
            })
            .collect();
        let report = bc_report(&vectors, &vectors, &selected, 10).unwrap();
        assert_eq!(report.rows.len(), 30);
        assert_eq!(report.median_bc, 1.0);
        assert_eq!(report.mean_bc, 1.0);
        // summaries recompute exactly from rows
        let values: Vec<f64> = report.rows.iter().map(|(_, v)| *v).collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        assert_eq!(report.mean_bc, mean);
    }

    #[test]
    fn bc_report_rejects_missing_feature() {
        let selected = SelectedFeatures::unscored(vec!["present".into(), "absent".into()]);
        let a = vec![vector(&[("present", 1.0)])];
        match bc_report(&a, &a, &selected, 10) {
            Err(crate::error::Error::MissingFeature(f)) => assert_eq!(f, "absent"),
            other => panic!("expected MissingFeature, got {other:?}"),
        }
    }

    #[test]
    fn learning_curve_constant_series() {
        let obs: Vec<(u32, f64)> = (1..=10).map(|i| (i, 3.5)).collect();
        let fit = fit_learning_curve(&obs).unwrap();
        assert!((fit.beta1 - 3.5).abs() < 1e-6, "beta1 = {}", fit.beta1);
        assert!(fit.beta2.abs() < 1e-6, "beta2 = {}", fit.beta2);
        assert!(fit.sse < 1e-12);
        assert_eq!(fit.trend(), Trend::Flat);
    }

    #[test]
    fn learning_curve_recovers_known_parameters() {
        let (b1, b2, b3) = (2.0, 1.0, -1.0);
        let obs: Vec<(u32, f64)> =
            (1..=20).map(|i| (i, b1 + b2 * (b3 / i as f64).exp())).collect();
        let fit = fit_learning_curve(&obs).unwrap();
        assert!((fit.beta1 - b1).abs() / b1.abs() < 0.01, "beta1 = {}", fit.beta1);
        assert!((fit.beta2 - b2).abs() / b2.abs() < 0.01, "beta2 = {}", fit.beta2);
        assert!((fit.beta3 - b3).abs() / b3.abs() < 0.01, "beta3 = {}", fit.beta3);
        // residual definition: r_i = |Y(i) - y(i)|
        for (k, &(i, y)) in obs.iter().enumerate() {
            let expect = (fit.predict(i as f64) - y).abs();
            assert_eq!(fit.residuals[k], expect);
        }
        let sse: f64 = fit.residuals.iter().map(|r| r * r).sum();
        assert_eq!(fit.sse, sse);
    }

    #[test]
    fn trend_classification_follows_signs() {
        let improved =
            LearningCurveFit { beta1: 1.0, beta2: 0.5, beta3: 2.0, residuals: vec![], sse: 0.0, iterations: 0, converged: true };
        assert_eq!(improved.trend(), Trend::Improved);
        let worsened =
            LearningCurveFit { beta1: 1.0, beta2: -0.5, beta3: 2.0, residuals: vec![], sse: 0.0, iterations: 0, converged: true };
        assert_eq!(worsened.trend(), Trend::Worsened);
    }

    #[test]
    fn fit_requires_four_observations() {
        assert!(fit_learning_curve(&[(1, 1.0), (2, 2.0), (3, 3.0)]).is_err());
    }

    #[test]
    fn spearman_basics() {
        let a = vec![1.0, 2.0, 3.0, 4.0];
        let up = vec![10.0, 20.0, 25.0, 50.0];
        let down = vec![4.0, 3.0, 2.0, 1.0];
        assert!((spearman(&a, &up).unwrap() - 1.0).abs() < 1e-12);
        assert!((spearman(&a, &down).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_three_point_example() {
        let r = pearson(&[1.0, 2.0, 4.0], &[1.2, 1.4, 1.6]).unwrap();
        assert!((r - 0.982).abs() < 1e-3, "r = {r}");
    }
}
