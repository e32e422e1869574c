//! Experiment configuration: a TOML file with sections per pipeline stage.
//! Every field has a default, so an empty config reproduces the standard
//! 18-subject experiment.

use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use wsgait::evaluation::{sensor_combos, GridEvalConfig, SensorCombo};
use wsgait::modeling::ClassifierKind;
use wsgait::signal::FrameParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub dataset: DatasetSection,
    pub frames: FramesSection,
    pub selection: SelectionSection,
    pub modeling: ModelingSection,
    pub grid: GridSection,
    pub attack: AttackSection,
    pub analysis: AnalysisSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 42,
            dataset: DatasetSection::default(),
            frames: FramesSection::default(),
            selection: SelectionSection::default(),
            modeling: ModelingSection::default(),
            grid: GridSection::default(),
            attack: AttackSection::default(),
            analysis: AnalysisSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSection {
    pub subjects: usize,
    pub sample_rate_hz: f64,
    pub train_duration_s: f64,
    pub test_duration_s: f64,
    pub calibration_duration_s: f64,
    /// How far the shared imitator may sit from the population center
    /// (1.0 = a regular population draw).
    pub imitator_spread: f64,
}

impl Default for DatasetSection {
    fn default() -> Self {
        DatasetSection {
            subjects: 18,
            sample_rate_hz: 50.0,
            train_duration_s: 105.0,
            test_duration_s: 105.0,
            calibration_duration_s: 60.0,
            imitator_spread: 0.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FramesSection {
    pub frame_len_s: f64,
    pub overlap_s: f64,
    pub smooth_window: usize,
}

impl Default for FramesSection {
    fn default() -> Self {
        FramesSection { frame_len_s: 10.0, overlap_s: 5.0, smooth_window: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionSection {
    pub k: usize,
    pub mi_bins: usize,
}

impl Default for SelectionSection {
    fn default() -> Self {
        SelectionSection { k: 30, mi_bins: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelingSection {
    pub classifiers: Vec<String>,
    pub folds: usize,
    pub impostor_train_total: usize,
    pub smote_neighbors: usize,
}

impl Default for ModelingSection {
    fn default() -> Self {
        ModelingSection {
            classifiers: ClassifierKind::ALL.iter().map(|k| k.token().to_string()).collect(),
            folds: 10,
            impostor_train_total: 108,
            smote_neighbors: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    /// Sensor-combination labels, or the single entry "all" for all 15.
    pub combos: Vec<String>,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { combos: vec!["all".to_string()] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackSection {
    pub max_iterations: usize,
    pub overlap_threshold: f64,
    pub batch_frames: usize,
    pub stolen_frames: usize,
    pub spoof_sets: usize,
    pub spoof_frames: usize,
    /// "canonical" or "auto"
    pub dominant: String,
    /// Sensor combinations the per-target transcript models are trained on.
    pub combos: Vec<String>,
    /// "population" (one shared imitator) or "matched" (per-target).
    pub imitator: String,
    pub matched_jitter: f64,
}

impl Default for AttackSection {
    fn default() -> Self {
        AttackSection {
            max_iterations: 40,
            overlap_threshold: 0.70,
            batch_frames: 10,
            stolen_frames: 20,
            spoof_sets: 3,
            spoof_frames: 22,
            dominant: "canonical".to_string(),
            combos: vec!["a".to_string()],
            imitator: "population".to_string(),
            matched_jitter: 0.03,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    pub partitions: usize,
    /// Sensor combination whose per-user selections feed the BC reports.
    pub combo: String,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        AnalysisSection { partitions: 10, combo: "a".to_string() }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.dataset.subjects < 2 {
            bail!("dataset.subjects must be at least 2");
        }
        self.classifiers()?;
        self.grid_combos()?;
        self.attack_combos()?;
        SensorCombo::parse(&self.analysis.combo)
            .map_err(|e| anyhow::anyhow!("analysis.combo: {e}"))?;
        if !matches!(self.attack.dominant.as_str(), "canonical" | "auto") {
            bail!("attack.dominant must be `canonical` or `auto`");
        }
        if !matches!(self.attack.imitator.as_str(), "population" | "matched") {
            bail!("attack.imitator must be `population` or `matched`");
        }
        Ok(())
    }

    pub fn classifiers(&self) -> anyhow::Result<Vec<ClassifierKind>> {
        self.modeling
            .classifiers
            .iter()
            .map(|t| {
                ClassifierKind::from_token(t)
                    .ok_or_else(|| anyhow::anyhow!("unknown classifier `{t}`"))
            })
            .collect()
    }

    fn parse_combo_list(list: &[String]) -> anyhow::Result<Vec<SensorCombo>> {
        if list.len() == 1 && list[0] == "all" {
            return Ok(sensor_combos());
        }
        list.iter()
            .map(|s| SensorCombo::parse(s).map_err(|e| anyhow::anyhow!("{e}")))
            .collect()
    }

    pub fn grid_combos(&self) -> anyhow::Result<Vec<SensorCombo>> {
        Self::parse_combo_list(&self.grid.combos)
    }

    pub fn attack_combos(&self) -> anyhow::Result<Vec<SensorCombo>> {
        Self::parse_combo_list(&self.attack.combos)
    }

    pub fn frame_params(&self) -> FrameParams {
        FrameParams {
            frame_len_s: self.frames.frame_len_s,
            overlap_s: self.frames.overlap_s,
            smooth_window: self.frames.smooth_window,
        }
    }

    pub fn grid_eval_config(&self) -> GridEvalConfig {
        GridEvalConfig {
            frame: self.frame_params(),
            select_k: self.selection.k,
            mi_bins: self.selection.mi_bins,
            folds: self.modeling.folds,
            impostor_train_total: self.modeling.impostor_train_total,
            smote_neighbors: self.modeling.smote_neighbors,
            seed: self.seed,
        }
    }

    /// Short hash of the effective configuration, stamped into every
    /// output file.
    pub fn hash(&self) -> String {
        let canonical = toml::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        hex[..12].to_string()
    }

    /// Standard header lines for output files.
    pub fn file_header(&self) -> String {
        format!("config = {}\nversion = {}", self.hash(), env!("CARGO_PKG_VERSION"))
    }
}
