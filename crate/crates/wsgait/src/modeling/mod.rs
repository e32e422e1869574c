//! Per-user authentication modeling: mutual-information feature selection,
//! SMOTE class balancing, six classifier families behind one contract, and
//! 10-fold hyper-parameter tuning with HTER loss.

mod bayes;
mod forest;
mod knn;
mod logreg;
mod mlp;
mod svm;

pub use bayes::BayesModel;
pub use forest::ForestModel;
pub use knn::KnnModel;
pub use logreg::LogRegModel;
pub use mlp::MlpModel;
pub use svm::{SvmKernel, SvmModel};

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::derive_seed;
use crate::error::{Error, Result};
use crate::features::FeatureVector;

/// Default number of selected features per user model.
pub const DEFAULT_SELECT_K: usize = 30;
/// Default bin count for the plug-in MI estimator.
pub const DEFAULT_MI_BINS: usize = 10;
/// Default SMOTE neighborhood size.
pub const DEFAULT_SMOTE_NEIGHBORS: usize = 5;
/// Default cross-validation folds for tuning.
pub const DEFAULT_FOLDS: usize = 10;
/// Variance floor for the Gaussian Bayes model.
pub const BAYES_VAR_FLOOR: f64 = 1e-6;

/// The six classifier families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClassifierKind {
    Bayes,
    LogReg,
    MulPer,
    RanFor,
    Svm,
    Knn,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 6] = [
        ClassifierKind::Bayes,
        ClassifierKind::LogReg,
        ClassifierKind::MulPer,
        ClassifierKind::RanFor,
        ClassifierKind::Svm,
        ClassifierKind::Knn,
    ];

    /// Lowercase token for CLI flags and file names.
    pub fn token(self) -> &'static str {
        match self {
            ClassifierKind::Bayes => "bayes",
            ClassifierKind::LogReg => "logreg",
            ClassifierKind::MulPer => "mulper",
            ClassifierKind::RanFor => "ranfor",
            ClassifierKind::Svm => "svm",
            ClassifierKind::Knn => "knn",
        }
    }

    pub fn from_token(tok: &str) -> Option<ClassifierKind> {
        ClassifierKind::ALL.iter().copied().find(|k| k.token() == tok)
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ClassifierKind::Bayes => "Bayes",
            ClassifierKind::LogReg => "LogReg",
            ClassifierKind::MulPer => "MulPer",
            ClassifierKind::RanFor => "RanFor",
            ClassifierKind::Svm => "SVM",
            ClassifierKind::Knn => "kNN",
        };
        f.write_str(name)
    }
}

/// A hyper-parameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Float(f64),
    Text(String),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Float(v) => write!(f, "{v}"),
            ParamValue::Text(v) => write!(f, "{v}"),
        }
    }
}

/// Named hyper-parameters for one classifier.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HyperParams {
    pub values: BTreeMap<String, ParamValue>,
}

impl HyperParams {
    pub fn with(mut self, name: &str, value: ParamValue) -> Self {
        self.values.insert(name.to_string(), value);
        self
    }

    pub fn int(&self, name: &str, default: i64) -> i64 {
        match self.values.get(name) {
            Some(ParamValue::Int(v)) => *v,
            Some(ParamValue::Float(v)) => *v as i64,
            _ => default,
        }
    }

    pub fn float(&self, name: &str, default: f64) -> f64 {
        match self.values.get(name) {
            Some(ParamValue::Float(v)) => *v,
            Some(ParamValue::Int(v)) => *v as f64,
            _ => default,
        }
    }

    pub fn text<'a>(&'a self, name: &str, default: &'a str) -> &'a str {
        match self.values.get(name) {
            Some(ParamValue::Text(v)) => v.as_str(),
            _ => default,
        }
    }
}

impl fmt::Display for HyperParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.values.is_empty() {
            return f.write_str("default");
        }
        let parts: Vec<String> = self.values.iter().map(|(k, v)| format!("{k}={v}")).collect();
        f.write_str(&parts.join(","))
    }
}

/// The declared tuning grid for one classifier family. `n_features` sizes
/// the RBF gamma values.
pub fn default_grid(kind: ClassifierKind, n_features: usize) -> Vec<HyperParams> {
    let d = n_features.max(1) as f64;
    match kind {
        ClassifierKind::Bayes => vec![HyperParams::default()],
        ClassifierKind::LogReg => [0.01, 0.1, 1.0]
            .iter()
            .map(|&l2| HyperParams::default().with("l2", ParamValue::Float(l2)))
            .collect(),
        ClassifierKind::MulPer => {
            let mut grid = Vec::new();
            for hidden in [16i64, 32] {
                for lr in [0.01, 0.1] {
                    grid.push(
                        HyperParams::default()
                            .with("hidden", ParamValue::Int(hidden))
                            .with("lr", ParamValue::Float(lr)),
                    );
                }
            }
            grid
        }
        ClassifierKind::RanFor => {
            let mut grid = Vec::new();
            for trees in [50i64, 100] {
                for depth in [0i64, 8] {
                    // depth 0 = unbounded
                    grid.push(
                        HyperParams::default()
                            .with("trees", ParamValue::Int(trees))
                            .with("max_depth", ParamValue::Int(depth)),
                    );
                }
            }
            grid
        }
        ClassifierKind::Svm => {
            // gamma stays at or below 1/d: larger values degenerate the
            // RBF kernel toward identity on standardized data, which
            // within-session cross-validation cannot catch
            let mut grid = Vec::new();
            for c in [0.1, 1.0, 10.0] {
                grid.push(
                    HyperParams::default()
                        .with("kernel", ParamValue::Text("linear".into()))
                        .with("c", ParamValue::Float(c)),
                );
            }
            for c in [0.1, 1.0, 10.0] {
                for gamma in [0.1 / d, 1.0 / d] {
                    grid.push(
                        HyperParams::default()
                            .with("kernel", ParamValue::Text("rbf".into()))
                            .with("c", ParamValue::Float(c))
                            .with("gamma", ParamValue::Float(gamma)),
                    );
                }
            }
            grid
        }
        ClassifierKind::Knn => [1i64, 3, 5, 7]
            .iter()
            .map(|&k| HyperParams::default().with("k", ParamValue::Int(k)))
            .collect(),
    }
}

/// An ordered list of selected feature names with their MI scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedFeatures {
    pub names: Vec<String>,
    /// Non-increasing MI scores aligned with `names`.
    pub scores: Vec<f64>,
}

impl SelectedFeatures {
    pub fn unscored(names: Vec<String>) -> Self {
        let scores = vec![0.0; names.len()];
        SelectedFeatures { names, scores }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// A labeled feature matrix over a fixed selected feature list.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub selection: SelectedFeatures,
    pub rows: Vec<Vec<f64>>,
    /// true = genuine, false = impostor
    pub labels: Vec<bool>,
}

impl Dataset {
    pub fn new(selection: SelectedFeatures, rows: Vec<Vec<f64>>, labels: Vec<bool>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::invalid("rows and labels must have equal length"));
        }
        let width = selection.names.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::invalid(format!(
                    "row {i} has {} values, expected {width}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("row {i} contains a non-finite value")));
            }
        }
        Ok(Dataset { selection, rows, labels })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.selection.names.len()
    }

    /// (genuine, impostor) row counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let g = self.labels.iter().filter(|&&l| l).count();
        (g, self.labels.len() - g)
    }
}

/// Per-column z-score standardization constants, fitted on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Scaler {
    pub fn fit(rows: &[Vec<f64>]) -> Scaler {
        let d = rows.first().map(|r| r.len()).unwrap_or(0);
        let n = rows.len() as f64;
        let mut means = vec![0.0; d];
        for row in rows {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut stds = vec![0.0; d];
        for row in rows {
            for ((s, v), m) in stds.iter_mut().zip(row).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        for s in &mut stds {
            *s = (*s / n).sqrt();
            if *s < 1e-12 {
                *s = 1.0; // constant column: leave centered values at zero
            }
        }
        Scaler { means, stds }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.means)
            .zip(&self.stds)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    pub fn transform_all(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform(r)).collect()
    }
}

/// Plug-in mutual information (bits) between a real-valued feature column
/// and a binary label, from the joint histogram over `bins` equal-width
/// bins of the column's range.
pub fn mutual_information(column: &[f64], labels: &[bool], bins: usize) -> Result<f64> {
    if column.len() != labels.len() || column.len() < 2 {
        return Err(Error::invalid("column and labels must have equal length >= 2"));
    }
    if bins == 0 {
        return Err(Error::invalid("bins must be positive"));
    }
    let n_genuine = labels.iter().filter(|&&l| l).count();
    if n_genuine == 0 || n_genuine == labels.len() {
        return Err(Error::invalid("both classes must be present"));
    }
    let mn = column.iter().cloned().fold(f64::INFINITY, f64::min);
    let mx = column.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let n = column.len() as f64;

    let mut joint = vec![[0.0f64; 2]; bins];
    if mx == mn {
        for &l in labels {
            joint[0][l as usize] += 1.0;
        }
    } else {
        let width = (mx - mn) / bins as f64;
        for (&v, &l) in column.iter().zip(labels) {
            let idx = (((v - mn) / width).floor() as usize).min(bins - 1);
            joint[idx][l as usize] += 1.0;
        }
    }

    let p_label = [
        (labels.len() - n_genuine) as f64 / n,
        n_genuine as f64 / n,
    ];
    let mut mi = 0.0;
    for cell in &joint {
        let p_bin = (cell[0] + cell[1]) / n;
        if p_bin == 0.0 {
            continue;
        }
        for y in 0..2 {
            let p = cell[y] / n;
            if p > 0.0 {
                mi += p * (p / (p_bin * p_label[y])).log2();
            }
        }
    }
    Ok(mi.max(0.0))
}

/// Selects the `k` highest-MI features of a labeled feature pool. Ties are
/// broken by input (catalog) order; the result is independent of row order.
pub fn select_top_k(
    names: &[String],
    columns: &[Vec<f64>],
    labels: &[bool],
    k: usize,
    bins: usize,
) -> Result<SelectedFeatures> {
    if names.len() != columns.len() {
        return Err(Error::invalid("names and columns must align"));
    }
    if k > names.len() {
        return Err(Error::invalid(format!(
            "k = {k} exceeds feature count {}",
            names.len()
        )));
    }
    let mut scored: Vec<(usize, f64)> = Vec::with_capacity(names.len());
    for (i, col) in columns.iter().enumerate() {
        scored.push((i, mutual_information(col, labels, bins)?));
    }
    // stable sort keeps catalog order among equal scores
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    scored.truncate(k);
    Ok(SelectedFeatures {
        names: scored.iter().map(|&(i, _)| names[i].clone()).collect(),
        scores: scored.iter().map(|&(_, s)| s).collect(),
    })
}

/// SMOTE: synthesizes `n_synthetic` minority rows, each on the segment
/// between a minority row and one of its `k_neighbors` nearest minority
/// neighbors. Parents rotate round-robin; neighbor and position are drawn
/// from the seeded generator.
pub fn smote(
    minority: &[Vec<f64>],
    k_neighbors: usize,
    n_synthetic: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if minority.len() <= k_neighbors {
        return Err(Error::invalid(format!(
            "SMOTE needs more than k_neighbors = {k_neighbors} minority rows, got {}",
            minority.len()
        )));
    }
    if n_synthetic == 0 {
        return Ok(Vec::new());
    }
    let n = minority.len();
    // k nearest neighbors of each row within the minority set (self excluded)
    let mut neighbor_lists: Vec<Vec<usize>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut dists: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (sq_dist(&minority[i], &minority[j]), j))
            .collect();
        dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        neighbor_lists.push(dists.iter().take(k_neighbors).map(|&(_, j)| j).collect());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_synthetic);
    for s in 0..n_synthetic {
        let parent = s % n;
        let neighbor = neighbor_lists[parent][rng.random_range(0..k_neighbors)];
        let u: f64 = rng.random();
        let row: Vec<f64> = minority[parent]
            .iter()
            .zip(&minority[neighbor])
            .map(|(p, q)| p + u * (q - p))
            .collect();
        out.push(row);
    }
    Ok(out)
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Learned parameters of one classifier family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelParams {
    Bayes(BayesModel),
    LogReg(LogRegModel),
    MulPer(MlpModel),
    RanFor(ForestModel),
    Svm(SvmModel),
    Knn(KnnModel),
}

impl ModelParams {
    /// Probability-like genuine score of a standardized row.
    fn score(&self, row: &[f64]) -> f64 {
        match self {
            ModelParams::Bayes(m) => m.score(row),
            ModelParams::LogReg(m) => m.score(row),
            ModelParams::MulPer(m) => m.score(row),
            ModelParams::RanFor(m) => m.score(row),
            ModelParams::Svm(m) => m.score(row),
            ModelParams::Knn(m) => m.score(row),
        }
    }
}

/// Accept/reject outcome with the underlying genuine score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub accept: bool,
    pub score: f64,
}

/// A trained per-user authentication model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kind: ClassifierKind,
    pub features: SelectedFeatures,
    pub scaler: Scaler,
    pub params: HyperParams,
    pub model: ModelParams,
    /// Accept iff score strictly exceeds this; exact ties reject.
    pub threshold: f64,
    pub seed: u64,
    /// Fraction of training rows misclassified by the final model.
    pub train_error: f64,
}

impl TrainedModel {
    /// Scores a raw (unstandardized) row aligned with `features.names`.
    pub fn decide_row(&self, row: &[f64]) -> Decision {
        let scaled = self.scaler.transform(row);
        let score = self.model.score(&scaled);
        Decision { accept: score > self.threshold, score }
    }

    /// Scores a named feature vector; every selected feature must be present.
    pub fn decide(&self, vector: &FeatureVector) -> Result<Decision> {
        let mut row = Vec::with_capacity(self.features.names.len());
        for name in &self.features.names {
            let v = vector
                .values
                .get(name)
                .ok_or_else(|| Error::MissingFeature(name.clone()))?;
            row.push(*v);
        }
        Ok(self.decide_row(&row))
    }
}

/// Trains one classifier on a dataset with fixed hyper-parameters.
///
/// Standardization is fitted here on the training rows and stored in the
/// returned model, so the artifact is self-contained.
pub fn train(
    kind: ClassifierKind,
    data: &Dataset,
    params: &HyperParams,
    seed: u64,
) -> Result<TrainedModel> {
    let (g, i) = data.class_counts();
    if g == 0 || i == 0 {
        return Err(Error::invalid("training data must contain both classes"));
    }
    let scaler = Scaler::fit(&data.rows);
    let rows = scaler.transform_all(&data.rows);
    let model = match kind {
        ClassifierKind::Bayes => ModelParams::Bayes(BayesModel::fit(&rows, &data.labels)),
        ClassifierKind::LogReg => {
            let l2 = params.float("l2", 0.1);
            ModelParams::LogReg(LogRegModel::fit(&rows, &data.labels, l2))
        }
        ClassifierKind::MulPer => {
            let hidden = params.int("hidden", 16) as usize;
            let lr = params.float("lr", 0.01);
            ModelParams::MulPer(MlpModel::fit(&rows, &data.labels, hidden, lr, seed))
        }
        ClassifierKind::RanFor => {
            let trees = params.int("trees", 100) as usize;
            let depth = params.int("max_depth", 0) as usize;
            ModelParams::RanFor(ForestModel::fit(&rows, &data.labels, trees, depth, seed))
        }
        ClassifierKind::Svm => {
            let c = params.float("c", 1.0);
            let kernel = match params.text("kernel", "linear") {
                "rbf" => SvmKernel::Rbf { gamma: params.float("gamma", 1.0 / data.n_cols().max(1) as f64) },
                _ => SvmKernel::Linear,
            };
            ModelParams::Svm(SvmModel::fit(&rows, &data.labels, kernel, c))
        }
        ClassifierKind::Knn => {
            let k = params.int("k", 1) as usize;
            ModelParams::Knn(KnnModel::fit(&rows, &data.labels, k))
        }
    };
    let mut errors = 0usize;
    for (row, &label) in rows.iter().zip(&data.labels) {
        let accept = model.score(row) > 0.5;
        if accept != label {
            errors += 1;
        }
    }
    Ok(TrainedModel {
        kind,
        features: data.selection.clone(),
        scaler,
        params: params.clone(),
        model,
        threshold: 0.5,
        seed,
        train_error: errors as f64 / rows.len() as f64,
    })
}

/// Assigns each row to one of `folds` folds, stratified by class.
pub fn stratified_folds(labels: &[bool], folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut genuine: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let mut impostor: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    genuine.shuffle(&mut rng);
    impostor.shuffle(&mut rng);
    let mut assignment = vec![0usize; labels.len()];
    for (pos, &idx) in genuine.iter().chain(impostor.iter()).enumerate() {
        assignment[idx] = pos % folds;
    }
    assignment
}

/// Picks the grid point minimizing mean cross-validated HTER. Ties keep
/// the earlier grid point; results are deterministic given the seed.
pub fn tune(
    kind: ClassifierKind,
    data: &Dataset,
    grid: &[HyperParams],
    folds: usize,
    seed: u64,
) -> Result<HyperParams> {
    if grid.is_empty() {
        return Err(Error::invalid("tuning grid is empty"));
    }
    if folds < 2 {
        return Err(Error::invalid("folds must be >= 2"));
    }
    if data.n_rows() < folds {
        return Err(Error::invalid(format!(
            "fewer rows ({}) than folds ({folds})",
            data.n_rows()
        )));
    }
    if grid.len() == 1 {
        return Ok(grid[0].clone());
    }
    let assignment = stratified_folds(&data.labels, folds, derive_seed(seed, &["folds"]));

    // fold splits are shared across grid points
    struct Fold {
        train: Dataset,
        val_rows: Vec<Vec<f64>>,
        val_labels: Vec<bool>,
    }
    let mut splits: Vec<Fold> = Vec::new();
    for fold in 0..folds {
        let mut train_rows = Vec::new();
        let mut train_labels = Vec::new();
        let mut val_rows = Vec::new();
        let mut val_labels = Vec::new();
        for (i, row) in data.rows.iter().enumerate() {
            if assignment[i] == fold {
                val_rows.push(row.clone());
                val_labels.push(data.labels[i]);
            } else {
                train_rows.push(row.clone());
                train_labels.push(data.labels[i]);
            }
        }
        let ng = val_labels.iter().filter(|&&l| l).count();
        let ni = val_labels.len() - ng;
        if ng == 0 || ni == 0 {
            continue;
        }
        let tg = train_labels.iter().filter(|&&l| l).count();
        if tg == 0 || tg == train_labels.len() {
            continue;
        }
        splits.push(Fold {
            train: Dataset::new(data.selection.clone(), train_rows, train_labels)?,
            val_rows,
            val_labels,
        });
    }
    if splits.is_empty() {
        return Err(Error::invalid("no valid folds; stratification failed"));
    }

    let mut best: Option<(f64, usize)> = None;
    for (pi, point) in grid.iter().enumerate() {
        let mut hter_sum = 0.0;
        for (fold, split) in splits.iter().enumerate() {
            let model = train(
                kind,
                &split.train,
                point,
                derive_seed(seed, &["tune", &pi.to_string(), &fold.to_string()]),
            )?;
            let mut false_accepts = 0usize;
            let mut false_rejects = 0usize;
            for (row, &label) in split.val_rows.iter().zip(&split.val_labels) {
                let d = model.decide_row(row);
                if label && !d.accept {
                    false_rejects += 1;
                } else if !label && d.accept {
                    false_accepts += 1;
                }
            }
            let ng = split.val_labels.iter().filter(|&&l| l).count();
            let ni = split.val_labels.len() - ng;
            let far = false_accepts as f64 / ni as f64;
            let frr = false_rejects as f64 / ng as f64;
            hter_sum += (far + frr) / 2.0;
        }
        let mean_hter = hter_sum / splits.len() as f64;
        if best.map_or(true, |(b, _)| mean_hter < b) {
            best = Some((mean_hter, pi));
        }
    }
    Ok(grid[best.unwrap().1].clone())
}

/// Persists a model as a versioned self-describing JSON record.
pub fn save_model(path: &Path, model: &TrainedModel) -> Result<()> {
    #[derive(Serialize)]
    struct Envelope<'a> {
        format_version: u32,
        model: &'a TrainedModel,
    }
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, &Envelope { format_version: 1, model })?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Loads a model persisted by [`save_model`].
pub fn load_model(path: &Path) -> Result<TrainedModel> {
    #[derive(Deserialize)]
    struct Envelope {
        format_version: u32,
        model: TrainedModel,
    }
    let file = File::open(path)?;
    let env: Envelope = serde_json::from_reader(BufReader::new(file))?;
    if env.format_version != 1 {
        return Err(Error::invalid(format!(
            "unsupported model format version {}",
            env.format_version
        )));
    }
    Ok(env.model)
}

#[cfg(test)]
mod tests;
