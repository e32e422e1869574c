//! FAR/FRR/HTER/SFAR/SHTER metrics and the classifier-by-sensor-combination
//! evaluation grid.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::derive_seed;
use crate::error::{Error, Result};
use crate::features::{extract_frame_features, FeatureCatalog};
use crate::modeling::{
    default_grid, select_top_k, smote, train, tune, ClassifierKind, Dataset, TrainedModel,
    DEFAULT_FOLDS, DEFAULT_MI_BINS, DEFAULT_SELECT_K, DEFAULT_SMOTE_NEIGHBORS,
};
use crate::signal::{segment, FrameParams, Recording, SensorKind, Session};

/// Impostor training rows per user model.
pub const DEFAULT_IMPOSTOR_TRAIN_TOTAL: usize = 108;

/// A non-empty subset of the four sensors.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SensorCombo {
    sensors: Vec<SensorKind>,
}

impl SensorCombo {
    pub fn new(mut sensors: Vec<SensorKind>) -> Result<SensorCombo> {
        sensors.sort();
        sensors.dedup();
        if sensors.is_empty() {
            return Err(Error::invalid("sensor combination must be non-empty"));
        }
        Ok(SensorCombo { sensors })
    }

    pub fn single(kind: SensorKind) -> SensorCombo {
        SensorCombo { sensors: vec![kind] }
    }

    pub fn sensors(&self) -> &[SensorKind] {
        &self.sensors
    }

    pub fn len(&self) -> usize {
        self.sensors.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Label like `agm` (accelerometer + gyroscope + magnetometer).
    pub fn label(&self) -> String {
        self.sensors.iter().map(|s| s.letter()).collect()
    }

    pub fn parse(s: &str) -> Result<SensorCombo> {
        let mut sensors = Vec::new();
        for c in s.chars() {
            let kind = SensorKind::from_letter(c)
                .ok_or_else(|| Error::invalid(format!("unknown sensor letter `{c}` in `{s}`")))?;
            sensors.push(kind);
        }
        SensorCombo::new(sensors)
    }

    pub fn contains(&self, kind: SensorKind) -> bool {
        self.sensors.contains(&kind)
    }

    pub fn is_subset_of(&self, sensors: &[SensorKind]) -> bool {
        self.sensors.iter().all(|s| sensors.contains(s))
    }
}

impl fmt::Display for SensorCombo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// All 15 non-empty sensor subsets: singletons first, then pairs, triples,
/// and the full set, each group in a/g/m/r order.
pub fn sensor_combos() -> Vec<SensorCombo> {
    let all = SensorKind::ALL;
    let mut combos = Vec::with_capacity(15);
    for size in 1..=4usize {
        match size {
            1 => {
                for &a in &all {
                    combos.push(SensorCombo { sensors: vec![a] });
                }
            }
            2 => {
                for i in 0..4 {
                    for j in i + 1..4 {
                        combos.push(SensorCombo { sensors: vec![all[i], all[j]] });
                    }
                }
            }
            3 => {
                for i in 0..4 {
                    for j in i + 1..4 {
                        for k in j + 1..4 {
                            combos.push(SensorCombo { sensors: vec![all[i], all[j], all[k]] });
                        }
                    }
                }
            }
            _ => combos.push(SensorCombo { sensors: all.to_vec() }),
        }
    }
    combos
}

/// Raw counts behind the rates of a [`MetricsReport`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricCounts {
    pub impostor_accepted: usize,
    pub impostor_total: usize,
    pub genuine_rejected: usize,
    pub genuine_total: usize,
    pub imitator_accepted: usize,
    pub imitator_total: usize,
}

/// Error rates of one evaluation, as fractions in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub far: f64,
    pub frr: f64,
    pub hter: f64,
    pub sfar: Option<f64>,
    pub shter: Option<f64>,
    pub counts: Option<MetricCounts>,
}

impl MetricsReport {
    /// Builds a report from rates alone (no counts). `hter` and `shter`
    /// are derived.
    pub fn from_rates(far: f64, frr: f64, sfar: Option<f64>) -> MetricsReport {
        MetricsReport {
            far,
            frr,
            hter: (far + frr) / 2.0,
            sfar,
            shter: sfar.map(|s| (s + frr) / 2.0),
            counts: None,
        }
    }

    /// Arithmetic mean of several reports; `sfar`/`shter` average over the
    /// reports that carry them. Counts are summed.
    pub fn mean_of(reports: &[MetricsReport]) -> Option<MetricsReport> {
        if reports.is_empty() {
            return None;
        }
        let n = reports.len() as f64;
        let far = reports.iter().map(|r| r.far).sum::<f64>() / n;
        let frr = reports.iter().map(|r| r.frr).sum::<f64>() / n;
        let sfars: Vec<f64> = reports.iter().filter_map(|r| r.sfar).collect();
        let sfar = if sfars.is_empty() {
            None
        } else {
            Some(sfars.iter().sum::<f64>() / sfars.len() as f64)
        };
        let mut counts = MetricCounts::default();
        let mut have_counts = false;
        for r in reports {
            if let Some(c) = r.counts {
                have_counts = true;
                counts.impostor_accepted += c.impostor_accepted;
                counts.impostor_total += c.impostor_total;
                counts.genuine_rejected += c.genuine_rejected;
                counts.genuine_total += c.genuine_total;
                counts.imitator_accepted += c.imitator_accepted;
                counts.imitator_total += c.imitator_total;
            }
        }
        Some(MetricsReport {
            far,
            frr,
            hter: (far + frr) / 2.0,
            sfar,
            shter: sfar.map(|s| (s + frr) / 2.0),
            counts: have_counts.then_some(counts),
        })
    }
}

/// Computes rates from accept/reject outcome sets. `imitator_accepts` may
/// be empty, leaving `sfar`/`shter` absent.
pub fn compute_metrics(
    genuine_accepts: &[bool],
    impostor_accepts: &[bool],
    imitator_accepts: &[bool],
) -> Result<MetricsReport> {
    if genuine_accepts.is_empty() || impostor_accepts.is_empty() {
        return Err(Error::invalid("genuine and impostor outcome sets must be non-empty"));
    }
    let genuine_rejected = genuine_accepts.iter().filter(|&&a| !a).count();
    let impostor_accepted = impostor_accepts.iter().filter(|&&a| a).count();
    let imitator_accepted = imitator_accepts.iter().filter(|&&a| a).count();
    let far = impostor_accepted as f64 / impostor_accepts.len() as f64;
    let frr = genuine_rejected as f64 / genuine_accepts.len() as f64;
    let sfar = if imitator_accepts.is_empty() {
        None
    } else {
        Some(imitator_accepted as f64 / imitator_accepts.len() as f64)
    };
    Ok(MetricsReport {
        far,
        frr,
        hter: (far + frr) / 2.0,
        sfar,
        shter: sfar.map(|s| (s + frr) / 2.0),
        counts: Some(MetricCounts {
            impostor_accepted,
            impostor_total: impostor_accepts.len(),
            genuine_rejected,
            genuine_total: genuine_accepts.len(),
            imitator_accepted,
            imitator_total: imitator_accepts.len(),
        }),
    })
}

/// Optional access-decision post-processor: grant only after a run of
/// `required` consecutive accepted frames. Excluded from headline metrics.
pub fn consecutive_accept_policy(outcomes: &[bool], required: usize) -> bool {
    if required == 0 {
        return true;
    }
    let mut run = 0usize;
    for &accept in outcomes {
        if accept {
            run += 1;
            if run >= required {
                return true;
            }
        } else {
            run = 0;
        }
    }
    false
}

/// Which rate a rendered heatmap shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridMetric {
    Zfar,
    Zfrr,
    Zhter,
    Sfar,
}

impl GridMetric {
    pub fn value(self, report: &MetricsReport) -> Option<f64> {
        match self {
            GridMetric::Zfar => Some(report.far),
            GridMetric::Zfrr => Some(report.frr),
            GridMetric::Zhter => Some(report.hter),
            GridMetric::Sfar => report.sfar,
        }
    }

    pub fn file_stem(self) -> &'static str {
        match self {
            GridMetric::Zfar => "grid_zfar",
            GridMetric::Zfrr => "grid_zfrr",
            GridMetric::Zhter => "grid_zhter",
            GridMetric::Sfar => "grid_sfar",
        }
    }
}

/// Configuration of the per-user evaluation pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridEvalConfig {
    pub frame: FrameParams,
    pub select_k: usize,
    pub mi_bins: usize,
    pub folds: usize,
    pub impostor_train_total: usize,
    pub smote_neighbors: usize,
    pub seed: u64,
}

impl Default for GridEvalConfig {
    fn default() -> Self {
        GridEvalConfig {
            frame: FrameParams::default(),
            select_k: DEFAULT_SELECT_K,
            mi_bins: DEFAULT_MI_BINS,
            folds: DEFAULT_FOLDS,
            impostor_train_total: DEFAULT_IMPOSTOR_TRAIN_TOTAL,
            smote_neighbors: DEFAULT_SMOTE_NEIGHBORS,
            seed: 42,
        }
    }
}

/// One cell of the grid: per-user reports and their mean.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub mean: MetricsReport,
    pub per_user: Vec<(String, MetricsReport)>,
}

/// The full evaluation grid.
#[derive(Debug, Clone)]
pub struct GridResult {
    pub classifiers: Vec<ClassifierKind>,
    pub combos: Vec<SensorCombo>,
    pub cells: BTreeMap<(ClassifierKind, SensorCombo), CellResult>,
    pub warnings: Vec<String>,
}

impl GridResult {
    pub fn cell(&self, kind: ClassifierKind, combo: &SensorCombo) -> Option<&CellResult> {
        self.cells.get(&(kind, combo.clone()))
    }

    /// Mean of a metric across one classifier's row.
    pub fn row_mean(&self, kind: ClassifierKind, metric: GridMetric) -> Option<f64> {
        let vals: Vec<f64> = self
            .combos
            .iter()
            .filter_map(|c| self.cell(kind, c))
            .filter_map(|cell| metric.value(&cell.mean))
            .collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    }

    /// Mean of a metric down one combo's column.
    pub fn col_mean(&self, combo: &SensorCombo, metric: GridMetric) -> Option<f64> {
        let vals: Vec<f64> = self
            .classifiers
            .iter()
            .filter_map(|&k| self.cell(k, combo))
            .filter_map(|cell| metric.value(&cell.mean))
            .collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    }

    /// Mean of a metric over every cell.
    pub fn overall_mean(&self, metric: GridMetric) -> Option<f64> {
        let vals: Vec<f64> = self
            .cells
            .values()
            .filter_map(|cell| metric.value(&cell.mean))
            .collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    }

    /// CSV heatmap of one metric, percentages with two decimals; the `avg`
    /// row and column are recomputed means.
    pub fn to_csv(&self, metric: GridMetric, header: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(h) = header {
            for line in h.lines() {
                out.push_str(&format!("# {line}\n"));
            }
        }
        out.push_str("classifier");
        for combo in &self.combos {
            out.push_str(&format!(",{}", combo.label()));
        }
        out.push_str(",avg\n");
        let fmt_val = |v: Option<f64>| -> String {
            v.map(|x| format!("{:.2}", x * 100.0)).unwrap_or_default()
        };
        for &kind in &self.classifiers {
            out.push_str(&kind.to_string());
            for combo in &self.combos {
                let v = self.cell(kind, combo).and_then(|c| metric.value(&c.mean));
                out.push_str(&format!(",{}", fmt_val(v)));
            }
            out.push_str(&format!(",{}\n", fmt_val(self.row_mean(kind, metric))));
        }
        out.push_str("avg");
        for combo in &self.combos {
            out.push_str(&format!(",{}", fmt_val(self.col_mean(combo, metric))));
        }
        out.push_str(&format!(",{}\n", fmt_val(self.overall_mean(metric))));
        out
    }

    /// Plain-text heatmap with percentages rounded to the nearest integer.
    pub fn to_text_table(&self, metric: GridMetric) -> String {
        let mut out = String::new();
        out.push_str(&format!("{:<8}", ""));
        for combo in &self.combos {
            out.push_str(&format!("{:>5}", combo.label()));
        }
        out.push_str(&format!("{:>5}\n", "avg"));
        let fmt_val = |v: Option<f64>| -> String {
            v.map(|x| format!("{:.0}", x * 100.0)).unwrap_or_else(|| "-".into())
        };
        for &kind in &self.classifiers {
            out.push_str(&format!("{:<8}", kind.to_string()));
            for combo in &self.combos {
                let v = self.cell(kind, combo).and_then(|c| metric.value(&c.mean));
                out.push_str(&format!("{:>5}", fmt_val(v)));
            }
            out.push_str(&format!("{:>5}\n", fmt_val(self.row_mean(kind, metric))));
        }
        out.push_str(&format!("{:<8}", "avg"));
        for combo in &self.combos {
            out.push_str(&format!("{:>5}", fmt_val(self.col_mean(combo, metric))));
        }
        out.push_str(&format!("{:>5}\n", fmt_val(self.overall_mean(metric))));
        out
    }

    /// Per-classifier summary for one sensor combination (accelerometer by
    /// default), plus grid-wide averages.
    pub fn summary_text(&self, header: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(h) = header {
            for line in h.lines() {
                out.push_str(&format!("# {line}\n"));
            }
        }
        let acc = SensorCombo::single(SensorKind::Accelerometer);
        let focus = if self.combos.contains(&acc) { acc } else { self.combos[0].clone() };
        out.push_str(&format!(
            "Per-classifier error rates (%), sensor combination `{}`\n\n",
            focus.label()
        ));
        out.push_str(&format!(
            "{:<10}{:>8}{:>8}{:>8}{:>8}{:>8}\n",
            "Classifier", "FAR", "FRR", "HTER", "SFAR", "SHTER"
        ));
        let fmt_opt = |v: Option<f64>| -> String {
            v.map(|x| format!("{:.2}", x * 100.0)).unwrap_or_else(|| "-".into())
        };
        let mut reports = Vec::new();
        for &kind in &self.classifiers {
            if let Some(cell) = self.cell(kind, &focus) {
                let r = &cell.mean;
                out.push_str(&format!(
                    "{:<10}{:>8.2}{:>8.2}{:>8.2}{:>8}{:>8}\n",
                    kind.to_string(),
                    r.far * 100.0,
                    r.frr * 100.0,
                    r.hter * 100.0,
                    fmt_opt(r.sfar),
                    fmt_opt(r.shter),
                ));
                reports.push(*r);
            }
        }
        if let Some(avg) = MetricsReport::mean_of(&reports) {
            out.push_str(&format!(
                "{:<10}{:>8.2}{:>8.2}{:>8.2}{:>8}{:>8}\n",
                "Average",
                avg.far * 100.0,
                avg.frr * 100.0,
                avg.hter * 100.0,
                fmt_opt(avg.sfar),
                fmt_opt(avg.shter),
            ));
        }
        out.push_str("\nGrid-wide averages (%), all combinations\n\n");
        for (name, metric) in [
            ("ZFAR", GridMetric::Zfar),
            ("ZFRR", GridMetric::Zfrr),
            ("ZHTER", GridMetric::Zhter),
            ("SFAR", GridMetric::Sfar),
        ] {
            out.push_str(&format!("{:<8}{}\n", name, fmt_opt(self.overall_mean(metric))));
        }
        out
    }
}

/// Per-subject preprocessed data: frames of each session turned into
/// full-catalog feature rows (absent sensors padded with NaN and guarded
/// by combo eligibility).
pub struct SubjectData {
    pub id: String,
    pub sensors: Vec<SensorKind>,
    pub train_rows: Vec<Vec<f64>>,
    pub test_rows: Vec<Vec<f64>>,
    pub mimicry_rows: Vec<Vec<f64>>,
}

fn full_catalog_rows(
    recordings: &[&Recording],
    frame: &FrameParams,
    full: &FeatureCatalog,
) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for rec in recordings {
        let frames = segment(rec, frame)?;
        let sensors = rec.sensors();
        let positions = full.indices_for_sensors(&sensors);
        for f in frames {
            let values = extract_frame_features(&f)?;
            let mut row = vec![f64::NAN; full.len()];
            for (pos, v) in positions.iter().zip(values) {
                row[*pos] = v;
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Groups recordings by subject and extracts features for every frame.
pub fn prepare_subjects(
    recordings: &[Recording],
    frame: &FrameParams,
) -> Result<(Vec<SubjectData>, Vec<String>)> {
    let full = FeatureCatalog::for_sensors(&SensorKind::ALL);
    let mut by_subject: BTreeMap<String, BTreeMap<Session, Vec<&Recording>>> = BTreeMap::new();
    for rec in recordings {
        by_subject
            .entry(rec.subject_id.clone())
            .or_default()
            .entry(rec.session)
            .or_default()
            .push(rec);
    }
    let mut warnings = Vec::new();
    let mut work: Vec<(String, Vec<&Recording>, Vec<&Recording>, Vec<&Recording>)> = Vec::new();
    for (id, sessions) in &by_subject {
        let training = sessions.get(&Session::Training).cloned().unwrap_or_default();
        let testing = sessions.get(&Session::Testing).cloned().unwrap_or_default();
        let mimicry = sessions.get(&Session::Mimicry).cloned().unwrap_or_default();
        if training.is_empty() || testing.is_empty() {
            warnings.push(format!(
                "subject {id} skipped: missing {} session",
                if training.is_empty() { "training" } else { "testing" }
            ));
            continue;
        }
        work.push((id.clone(), training, testing, mimicry));
    }

    let subjects: Result<Vec<SubjectData>> = work
        .par_iter()
        .map(|(id, training, testing, mimicry)| {
            let mut sensors: Vec<SensorKind> = SensorKind::ALL
                .iter()
                .copied()
                .filter(|s| {
                    training.iter().chain(testing).all(|r| r.traces.contains_key(s))
                })
                .collect();
            if sensors.is_empty() {
                sensors = Vec::new();
            }
            Ok(SubjectData {
                id: id.clone(),
                sensors,
                train_rows: full_catalog_rows(training, frame, &full)?,
                test_rows: full_catalog_rows(testing, frame, &full)?,
                mimicry_rows: full_catalog_rows(mimicry, frame, &full)?,
            })
        })
        .collect();
    Ok((subjects?, warnings))
}

/// Training-set impostor rows for one user: an equal quota from every
/// other subject's training frames, topped up round-robin to the target
/// total.
pub fn impostor_train_rows(subjects: &[SubjectData], me: usize, total: usize) -> Vec<Vec<f64>> {
    let others: Vec<usize> = (0..subjects.len()).filter(|&i| i != me).collect();
    if others.is_empty() || total == 0 {
        return Vec::new();
    }
    let quota = total / others.len();
    let extra = total % others.len();
    let mut rows = Vec::with_capacity(total);
    for (rank, &o) in others.iter().enumerate() {
        let want = quota + usize::from(rank < extra);
        for row in subjects[o].train_rows.iter().take(want) {
            rows.push(row.clone());
        }
    }
    rows
}

/// Per-user MI feature selection over one combo's pool. Returns the
/// selection and the selected columns' indices in the full catalog.
pub fn user_selection(
    combo: &SensorCombo,
    own_train_rows: &[Vec<f64>],
    impostor_rows: &[Vec<f64>],
    full_catalog: &FeatureCatalog,
    cfg: &GridEvalConfig,
) -> Result<(crate::modeling::SelectedFeatures, Vec<usize>)> {
    let pool = full_catalog.indices_for_sensors(combo.sensors());
    let pool_names: Vec<String> = pool.iter().map(|&i| full_catalog.entries[i].id.clone()).collect();

    let n_own = own_train_rows.len();
    let labels: Vec<bool> = (0..n_own + impostor_rows.len()).map(|i| i < n_own).collect();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(pool.len());
    for &ci in &pool {
        let mut col = Vec::with_capacity(labels.len());
        for row in own_train_rows.iter().chain(impostor_rows) {
            col.push(row[ci]);
        }
        columns.push(col);
    }
    let selection = select_top_k(&pool_names, &columns, &labels, cfg.select_k, cfg.mi_bins)?;
    let selected_idx: Vec<usize> = selection
        .names
        .iter()
        .map(|n| {
            let at = pool_names.iter().position(|p| p == n).unwrap();
            pool[at]
        })
        .collect();
    Ok((selection, selected_idx))
}

/// Runs the per-user pipeline (select, balance, tune, train) for one cell.
pub fn build_user_model(
    kind: ClassifierKind,
    combo: &SensorCombo,
    own_train_rows: &[Vec<f64>],
    impostor_rows: &[Vec<f64>],
    full_catalog: &FeatureCatalog,
    cfg: &GridEvalConfig,
    seed: u64,
) -> Result<TrainedModel> {
    let (selection, selected_idx) =
        user_selection(combo, own_train_rows, impostor_rows, full_catalog, cfg)?;
    let n_own = own_train_rows.len();

    let gather = |row: &Vec<f64>| -> Vec<f64> { selected_idx.iter().map(|&i| row[i]).collect() };
    let genuine_rows: Vec<Vec<f64>> = own_train_rows.iter().map(gather).collect();
    let mut rows: Vec<Vec<f64>> = genuine_rows.clone();
    let mut labels: Vec<bool> = vec![true; rows.len()];
    for row in impostor_rows {
        rows.push(gather(row));
        labels.push(false);
    }

    // oversample the genuine class up to the impostor count
    let n_imp = impostor_rows.len();
    if n_own < n_imp && n_own > cfg.smote_neighbors {
        let synthetic = smote(
            &genuine_rows,
            cfg.smote_neighbors,
            n_imp - n_own,
            derive_seed(seed, &["smote"]),
        )?;
        for row in synthetic {
            rows.push(row);
            labels.push(true);
        }
    }

    let data = Dataset::new(selection, rows, labels)?;
    let grid = default_grid(kind, cfg.select_k);
    let params = tune(kind, &data, &grid, cfg.folds, derive_seed(seed, &["tune"]))?;
    train(kind, &data, &params, derive_seed(seed, &["train"]))
}

/// Applies a trained model to full-catalog feature rows.
pub fn classify_rows(
    model: &TrainedModel,
    rows: &[Vec<f64>],
    full_catalog: &FeatureCatalog,
) -> Result<Vec<bool>> {
    let index: BTreeMap<&str, usize> = full_catalog
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| (e.id.as_str(), i))
        .collect();
    let cols: Result<Vec<usize>> = model
        .features
        .names
        .iter()
        .map(|n| {
            index
                .get(n.as_str())
                .copied()
                .ok_or_else(|| Error::MissingFeature(n.clone()))
        })
        .collect();
    let cols = cols?;
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        let gathered: Vec<f64> = cols.iter().map(|&i| row[i]).collect();
        out.push(model.decide_row(&gathered).accept);
    }
    Ok(out)
}

/// Runs the full evaluation grid: for every (classifier, combo) cell the
/// per-user pipeline is trained and tested, and the cell reports the mean
/// over users. Deterministic given the config seed at any parallelism.
pub fn run_grid(
    recordings: &[Recording],
    classifiers: &[ClassifierKind],
    combos: &[SensorCombo],
    cfg: &GridEvalConfig,
) -> Result<GridResult> {
    if classifiers.is_empty() || combos.is_empty() {
        return Err(Error::invalid("classifier and combo lists must be non-empty"));
    }
    let full = FeatureCatalog::for_sensors(&SensorKind::ALL);
    let (subjects, mut warnings) = prepare_subjects(recordings, &cfg.frame)?;
    if subjects.is_empty() {
        return Err(Error::invalid("no subject has both training and testing sessions"));
    }

    // precompute per-user impostor training rows (combo-independent)
    let impostors: Vec<Vec<Vec<f64>>> = (0..subjects.len())
        .map(|i| impostor_train_rows(&subjects, i, cfg.impostor_train_total))
        .collect();

    struct Item {
        kind: ClassifierKind,
        combo_idx: usize,
        subject_idx: usize,
    }
    let mut items = Vec::new();
    for &kind in classifiers {
        for (ci, _) in combos.iter().enumerate() {
            for si in 0..subjects.len() {
                items.push(Item { kind, combo_idx: ci, subject_idx: si });
            }
        }
    }

    let outcomes: Result<Vec<Option<MetricsReport>>> = items
        .par_iter()
        .map(|item| {
            let subject = &subjects[item.subject_idx];
            let combo = &combos[item.combo_idx];
            if !combo.is_subset_of(&subject.sensors) {
                return Ok(None);
            }
            let seed = derive_seed(
                cfg.seed,
                &["cell", &subject.id, item.kind.token(), &combo.label()],
            );
            let model = build_user_model(
                item.kind,
                combo,
                &subject.train_rows,
                &impostors[item.subject_idx],
                &full,
                cfg,
                seed,
            )?;
            let genuine = classify_rows(&model, &subject.test_rows, &full)?;
            let mut impostor = Vec::new();
            for (oi, other) in subjects.iter().enumerate() {
                if oi != item.subject_idx {
                    impostor.extend(classify_rows(&model, &other.test_rows, &full)?);
                }
            }
            let imitator = classify_rows(&model, &subject.mimicry_rows, &full)?;
            Ok(Some(compute_metrics(&genuine, &impostor, &imitator)?))
        })
        .collect();
    let outcomes = outcomes?;

    let mut cells: BTreeMap<(ClassifierKind, SensorCombo), CellResult> = BTreeMap::new();
    for (item, outcome) in items.iter().zip(outcomes) {
        let key = (item.kind, combos[item.combo_idx].clone());
        if let Some(report) = outcome {
            let cell = cells.entry(key).or_insert_with(|| CellResult {
                mean: MetricsReport::from_rates(0.0, 0.0, None),
                per_user: Vec::new(),
            });
            cell.per_user.push((subjects[item.subject_idx].id.clone(), report));
        }
    }
    for &kind in classifiers {
        for combo in combos {
            match cells.get_mut(&(kind, combo.clone())) {
                Some(cell) => {
                    let reports: Vec<MetricsReport> =
                        cell.per_user.iter().map(|(_, r)| *r).collect();
                    cell.mean = MetricsReport::mean_of(&reports).unwrap();
                }
                None => {
                    return Err(Error::invalid(format!(
                        "cell ({kind}, {combo}) has no eligible subjects"
                    )));
                }
            }
        }
    }
    for subject in &subjects {
        if subject.mimicry_rows.is_empty() {
            warnings.push(format!("subject {} has no mimicry session; SFAR omitted", subject.id));
        }
    }
    Ok(GridResult {
        classifiers: classifiers.to_vec(),
        combos: combos.to_vec(),
        cells,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FEATURES_PER_SENSOR;
    use crate::synth::{synthesize, SubjectProfile};

    #[test]
    fn hter_identity_on_reference_rates() {
        let r = MetricsReport::from_rates(0.0438, 0.0790, Some(0.2285));
        assert!((r.hter - 0.0614).abs() < 5e-5);
        assert!((r.shter.unwrap() - 0.15375).abs() < 5e-5);
        // rendered with two decimals these become 6.14 and 15.38
        assert_eq!(format!("{:.2}", r.hter * 100.0), "6.14");
        assert_eq!(format!("{:.2}", r.shter.unwrap() * 100.0), "15.38");
    }

    #[test]
    fn perfect_classifier_has_zero_rates() {
        let r = compute_metrics(&[true, true, true], &[false, false], &[false]).unwrap();
        assert_eq!(r.far, 0.0);
        assert_eq!(r.frr, 0.0);
        assert_eq!(r.hter, 0.0);
        assert_eq!(r.sfar, Some(0.0));
    }

    #[test]
    fn combos_are_fifteen_in_declared_order() {
        let combos = sensor_combos();
        assert_eq!(combos.len(), 15);
        let labels: Vec<String> = combos.iter().map(|c| c.label()).collect();
        assert_eq!(
            labels,
            vec![
                "a", "g", "m", "r", "ag", "am", "ar", "gm", "gr", "mr", "agm", "agr", "amr",
                "gmr", "agmr"
            ]
        );
    }

    #[test]
    fn combo_feature_pools_scale_with_size() {
        let full = FeatureCatalog::for_sensors(&SensorKind::ALL);
        for combo in sensor_combos() {
            let pool = full.indices_for_sensors(combo.sensors());
            assert_eq!(pool.len(), FEATURES_PER_SENSOR * combo.len());
        }
    }

    #[test]
    fn consecutive_policy_requires_a_run() {
        let outcomes = [true, true, false, true, true, true, false];
        assert!(consecutive_accept_policy(&outcomes, 3));
        assert!(!consecutive_accept_policy(&outcomes, 4));
        assert!(consecutive_accept_policy(&[], 0));
    }

    #[test]
    fn metrics_require_nonempty_outcomes() {
        assert!(compute_metrics(&[], &[false], &[]).is_err());
    }

    fn tiny_dataset(n_subjects: usize, seed: u64) -> Vec<Recording> {
        let mut recs = Vec::new();
        for i in 0..n_subjects {
            let profile = SubjectProfile::generate(format!("S{i:02}"), seed + i as u64);
            for (session, tag) in [(Session::Training, "train"), (Session::Testing, "test")] {
                recs.push(
                    synthesize(
                        &profile,
                        &profile.natural,
                        session,
                        55.0,
                        50.0,
                        derive_seed(seed, &[&profile.subject_id, tag]),
                    )
                    .unwrap(),
                );
            }
        }
        recs
    }

    #[test]
    fn small_grid_shape_and_determinism() {
        let recs = tiny_dataset(4, 7);
        let classifiers = [ClassifierKind::Bayes, ClassifierKind::Knn];
        let combos = vec![
            SensorCombo::single(SensorKind::Accelerometer),
            SensorCombo::parse("ag").unwrap(),
        ];
        let cfg = GridEvalConfig {
            select_k: 20,
            folds: 5,
            impostor_train_total: 30,
            seed: 11,
            ..GridEvalConfig::default()
        };
        let grid = run_grid(&recs, &classifiers, &combos, &cfg).unwrap();
        assert_eq!(grid.cells.len(), 4);
        for cell in grid.cells.values() {
            assert_eq!(cell.per_user.len(), 4);
            // identity holds exactly per cell
            assert_eq!(cell.mean.hter, (cell.mean.far + cell.mean.frr) / 2.0);
            assert!(cell.mean.sfar.is_none());
        }
        let grid2 = run_grid(&recs, &classifiers, &combos, &cfg).unwrap();
        for metric in [GridMetric::Zfar, GridMetric::Zfrr, GridMetric::Zhter] {
            assert_eq!(grid.to_csv(metric, None), grid2.to_csv(metric, None));
        }
        // averages recompute from cells
        let mean: f64 = grid
            .cells
            .values()
            .map(|c| c.mean.hter)
            .sum::<f64>()
            / grid.cells.len() as f64;
        assert!((grid.overall_mean(GridMetric::Zhter).unwrap() - mean).abs() < 1e-12);
    }

    #[test]
    fn missing_session_subject_is_skipped_with_warning() {
        let mut recs = tiny_dataset(3, 21);
        // drop one subject's testing session
        recs.retain(|r| !(r.subject_id == "S02" && r.session == Session::Testing));
        let classifiers = [ClassifierKind::Knn];
        let combos = vec![SensorCombo::single(SensorKind::Accelerometer)];
        let cfg = GridEvalConfig {
            select_k: 10,
            folds: 4,
            impostor_train_total: 10,
            seed: 3,
            ..GridEvalConfig::default()
        };
        let grid = run_grid(&recs, &classifiers, &combos, &cfg).unwrap();
        assert!(grid.warnings.iter().any(|w| w.contains("S02")));
        let cell = grid.cell(ClassifierKind::Knn, &combos[0]).unwrap();
        assert_eq!(cell.per_user.len(), 2);
    }
}
