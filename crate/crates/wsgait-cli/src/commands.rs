//! Command implementations behind the CLI surface.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use wsgait::analysis::{bc_report, fit_learning_curve, spearman};
use wsgait::attack::{
    run_attack, AttackOptions, DominantMode, ImitatorDatabase, IterationRecord, TargetModel,
    Termination,
};
use wsgait::derive_seed;
use wsgait::evaluation::{
    build_user_model, impostor_train_rows, prepare_subjects, run_grid, user_selection, GridMetric,
    GridResult, SensorCombo, SubjectData,
};
use wsgait::features::{feature_vector, FeatureCatalog, FeatureVector};
use wsgait::io::{read_recording_csv, write_feature_store, write_recording_csv};
use wsgait::signal::{segment, Recording, SensorKind, Session};
use wsgait::synth::{
    calibration_sweep, matched_imitator, synthesize, ImitatorModel, SubjectProfile,
};

use crate::config::ExperimentConfig;

/// Whether a command completed fully or with declared gaps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandStatus {
    Success,
    /// Some declared outputs are absent (missing mimicry data,
    /// non-convergent attacks); maps to exit code 2.
    Partial,
}

pub struct OutputLayout {
    pub root: PathBuf,
}

impl OutputLayout {
    pub fn new(root: &Path) -> OutputLayout {
        OutputLayout { root: root.to_path_buf() }
    }

    pub fn dataset_dir(&self) -> PathBuf {
        self.root.join("dataset")
    }

    pub fn recordings_dir(&self) -> PathBuf {
        self.dataset_dir().join("recordings")
    }

    pub fn calibration_dir(&self) -> PathBuf {
        self.dataset_dir().join("calibration")
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.dataset_dir().join("manifest.toml")
    }

    pub fn attack_dir(&self) -> PathBuf {
        self.root.join("attack")
    }

    pub fn mimicry_dir(&self) -> PathBuf {
        self.attack_dir().join("mimicry")
    }

    pub fn transcripts_dir(&self) -> PathBuf {
        self.attack_dir().join("transcripts")
    }

    pub fn spoof_features_dir(&self) -> PathBuf {
        self.attack_dir().join("spoof_features")
    }

    pub fn attack_results_path(&self) -> PathBuf {
        self.attack_dir().join("attack_results.json")
    }

    pub fn eval_dir(&self) -> PathBuf {
        self.root.join("eval")
    }

    pub fn analysis_dir(&self) -> PathBuf {
        self.root.join("analysis")
    }
}

fn write_text(path: &Path, content: &str) -> anyhow::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, content).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn subject_ids(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("S{i:02}")).collect()
}

fn subject_profile(cfg: &ExperimentConfig, id: &str) -> SubjectProfile {
    SubjectProfile::generate(id, derive_seed(cfg.seed, &["profile", id]))
}

fn population_imitator(cfg: &ExperimentConfig) -> ImitatorModel {
    ImitatorModel::from_profile(SubjectProfile::generate_scaled(
        "imitator",
        derive_seed(cfg.seed, &["profile", "imitator"]),
        cfg.dataset.imitator_spread,
    ))
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    config: String,
    version: String,
    seed: u64,
    /// Subject sessions plus one calibration set.
    recordings: usize,
    subject: Vec<ManifestSubject>,
    calibration: ManifestCalibration,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestSubject {
    id: String,
    training: String,
    testing: String,
}

#[derive(Debug, Serialize, Deserialize, Default)]
struct ManifestCalibration {
    imitator: String,
    files: Vec<String>,
    tags: Vec<String>,
    gcat: Vec<String>,
}

/// Materializes the synthetic dataset: per-subject training/testing
/// recordings plus the imitator calibration sweep, all as CSV files with a
/// manifest.
pub fn cmd_synth(cfg: &ExperimentConfig, out: &Path, force: bool) -> anyhow::Result<()> {
    let layout = OutputLayout::new(out);
    let dataset = layout.dataset_dir();
    if dataset.exists() && dataset.read_dir()?.next().is_some() {
        if !force {
            bail!(
                "output dataset {} already exists and is not empty (use --force to overwrite)",
                dataset.display()
            );
        }
        fs::remove_dir_all(&dataset)?;
    }
    fs::create_dir_all(layout.recordings_dir())?;
    fs::create_dir_all(layout.calibration_dir())?;
    let header = cfg.file_header();

    let ids = subject_ids(cfg.dataset.subjects);
    let mut manifest_subjects = Vec::with_capacity(ids.len());
    for id in &ids {
        let profile = subject_profile(cfg, id);
        let mut entry = ManifestSubject {
            id: id.clone(),
            training: String::new(),
            testing: String::new(),
        };
        for (session, duration, field) in [
            (Session::Training, cfg.dataset.train_duration_s, &mut entry.training),
            (Session::Testing, cfg.dataset.test_duration_s, &mut entry.testing),
        ] {
            let rec = synthesize(
                &profile,
                &profile.natural,
                session,
                duration,
                cfg.dataset.sample_rate_hz,
                derive_seed(cfg.seed, &["recording", id, session.token()]),
            )?;
            let rel = format!("recordings/{id}_{}.csv", session.token());
            write_recording_csv(&dataset.join(&rel), &rec, Some(&header))?;
            *field = rel;
        }
        manifest_subjects.push(entry);
    }

    let imitator = population_imitator(cfg);
    let sweep = calibration_sweep(
        &imitator,
        cfg.dataset.calibration_duration_s,
        cfg.dataset.sample_rate_hz,
        derive_seed(cfg.seed, &["sweep", "imitator"]),
    )?;
    let mut calibration = ManifestCalibration {
        imitator: imitator.profile.subject_id.clone(),
        ..Default::default()
    };
    for run in &sweep {
        let rel = format!("calibration/cal_{}.csv", run.tag);
        write_recording_csv(&dataset.join(&rel), &run.recording, Some(&header))?;
        calibration.files.push(rel);
        calibration.tags.push(run.tag.clone());
        calibration.gcat.push(run.gcat.label());
    }

    let manifest = Manifest {
        config: cfg.hash(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        recordings: ids.len() * 2 + 1,
        subject: manifest_subjects,
        calibration,
    };
    write_text(&layout.manifest_path(), &toml::to_string_pretty(&manifest)?)?;
    println!(
        "dataset: {} subjects, {} recordings + 15-run calibration sweep -> {}",
        ids.len(),
        ids.len() * 2,
        dataset.display()
    );
    Ok(())
}

/// Validates external recording CSVs and copies them, normalized, into the
/// dataset layout.
pub fn cmd_ingest(cfg: &ExperimentConfig, out: &Path, files: &[PathBuf]) -> anyhow::Result<()> {
    if files.is_empty() {
        bail!("ingest needs at least one CSV file");
    }
    let layout = OutputLayout::new(out);
    fs::create_dir_all(layout.recordings_dir())?;
    let header = cfg.file_header();
    let mut seen: BTreeMap<(String, Session), PathBuf> = BTreeMap::new();
    for file in files {
        let rec = read_recording_csv(file).map_err(|e| anyhow!("{e}"))?;
        let key = (rec.subject_id.clone(), rec.session);
        if let Some(first) = seen.get(&key) {
            bail!(
                "{}: duplicate recording for subject {} session {} (first seen in {})",
                file.display(),
                rec.subject_id,
                rec.session.token(),
                first.display()
            );
        }
        let rel = format!("{}_{}.csv", rec.subject_id, rec.session.token());
        write_recording_csv(&layout.recordings_dir().join(&rel), &rec, Some(&header))?;
        seen.insert(key, file.clone());
        println!("ingested {} -> dataset/recordings/{rel}", file.display());
    }
    Ok(())
}

fn read_csv_dir(dir: &Path) -> anyhow::Result<Vec<Recording>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    paths.sort();
    let recordings: Result<Vec<Recording>, wsgait::Error> =
        paths.par_iter().map(|p| read_recording_csv(p)).collect();
    recordings.map_err(|e| anyhow!("{e}"))
}

/// Loads subject recordings and, when present, attack mimicry recordings.
pub fn load_dataset(layout: &OutputLayout) -> anyhow::Result<(Vec<Recording>, bool)> {
    let recordings_dir = layout.recordings_dir();
    if !recordings_dir.exists() {
        bail!(
            "missing input: {} (run `wsgait synth` or `wsgait ingest` first)",
            recordings_dir.display()
        );
    }
    let mut recordings = read_csv_dir(&recordings_dir)?;
    let mimicry_dir = layout.mimicry_dir();
    let mut has_mimicry = false;
    if mimicry_dir.exists() {
        let mimicry = read_csv_dir(&mimicry_dir)?;
        has_mimicry = !mimicry.is_empty();
        recordings.extend(mimicry);
    }
    Ok((recordings, has_mimicry))
}

/// Runs the zero-effort and imitator evaluation grid and writes the four
/// heatmap CSVs, aligned text tables, and the summary.
pub fn cmd_evaluate(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<CommandStatus> {
    let layout = OutputLayout::new(out);
    let (recordings, has_mimicry) = load_dataset(&layout)?;
    let classifiers = cfg.classifiers()?;
    let combos = cfg.grid_combos()?;
    let grid = run_grid(&recordings, &classifiers, &combos, &cfg.grid_eval_config())
        .map_err(|e| anyhow!("{e}"))?;
    for w in &grid.warnings {
        eprintln!("warning: {w}");
    }
    write_grid_outputs(cfg, &layout, &grid)?;
    println!(
        "evaluation grid: {} classifiers x {} combos -> {}",
        classifiers.len(),
        combos.len(),
        layout.eval_dir().display()
    );
    if !has_mimicry {
        eprintln!("warning: no mimicry data found; SFAR columns are absent (run `wsgait attack`)");
        return Ok(CommandStatus::Partial);
    }
    Ok(CommandStatus::Success)
}

fn write_grid_outputs(
    cfg: &ExperimentConfig,
    layout: &OutputLayout,
    grid: &GridResult,
) -> anyhow::Result<()> {
    let header = cfg.file_header();
    let eval = layout.eval_dir();
    fs::create_dir_all(&eval)?;
    for metric in [GridMetric::Zfar, GridMetric::Zfrr, GridMetric::Zhter, GridMetric::Sfar] {
        let csv = grid.to_csv(metric, Some(&header));
        write_text(&eval.join(format!("{}.csv", metric.file_stem())), &csv)?;
    }
    let mut tables = String::new();
    for line in header.lines() {
        tables.push_str(&format!("# {line}\n"));
    }
    for (name, metric) in [
        ("ZFAR", GridMetric::Zfar),
        ("ZFRR", GridMetric::Zfrr),
        ("ZHTER", GridMetric::Zhter),
        ("SFAR", GridMetric::Sfar),
    ] {
        tables.push_str(&format!("\n{name} (%)\n"));
        tables.push_str(&grid.to_text_table(metric));
    }
    write_text(&eval.join("tables.txt"), &tables)?;
    write_text(&eval.join("summary.txt"), &grid.summary_text(Some(&header)))?;
    Ok(())
}

/// Per-target attack outcome, persisted for the analysis stage.
#[derive(Debug, Serialize, Deserialize)]
pub struct AttackRecord {
    pub target: String,
    pub imitator: String,
    pub converged: bool,
    pub iterations: usize,
    pub termination: Termination,
    pub final_gcat: String,
    /// label -> SFAR fraction over the spoof frames
    pub sfar: BTreeMap<String, f64>,
    pub mean_sfar: f64,
}

/// Runs the spoofing attack against every subject: trains the transcript
/// models, runs the feedback loop, and writes transcripts, mimicry
/// recordings, spoof feature stores, and the aggregate report.
pub fn cmd_attack(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<CommandStatus> {
    let layout = OutputLayout::new(out);
    let (recordings, _) = load_dataset(&layout)?;
    let frame = cfg.frame_params();
    let (subjects, warnings) = prepare_subjects(&recordings, &frame).map_err(|e| anyhow!("{e}"))?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    if subjects.is_empty() {
        bail!("no subjects with training and testing sessions");
    }
    let full_catalog = FeatureCatalog::for_sensors(&SensorKind::ALL);
    let classifiers = cfg.classifiers()?;
    let attack_combos = cfg.attack_combos()?;
    let grid_cfg = cfg.grid_eval_config();
    let header = cfg.file_header();

    let training_by_subject: BTreeMap<String, &Recording> = recordings
        .iter()
        .filter(|r| r.session == Session::Training)
        .map(|r| (r.subject_id.clone(), r))
        .collect();

    // shared imitator and calibration database for the population mode
    let shared: Option<(ImitatorModel, ImitatorDatabase)> = if cfg.attack.imitator == "population" {
        let imitator = population_imitator(cfg);
        let sweep = calibration_sweep(
            &imitator,
            cfg.dataset.calibration_duration_s,
            cfg.dataset.sample_rate_hz,
            derive_seed(cfg.seed, &["sweep", "imitator"]),
        )
        .map_err(|e| anyhow!("{e}"))?;
        let db = ImitatorDatabase::from_sweep(&sweep, &frame).map_err(|e| anyhow!("{e}"))?;
        Some((imitator, db))
    } else {
        None
    };

    let dominant = match cfg.attack.dominant.as_str() {
        "auto" => DominantMode::Auto,
        _ => DominantMode::Canonical,
    };

    struct TargetOutcome {
        record: AttackRecord,
        trace: Vec<IterationRecord>,
        spoof_recordings: Vec<Recording>,
        spoof_vectors: Vec<FeatureVector>,
    }

    let outcomes: anyhow::Result<Vec<TargetOutcome>> = (0..subjects.len())
        .into_par_iter()
        .map(|si| {
            let subject = &subjects[si];
            let id = subject.id.clone();
            let stolen = training_by_subject
                .get(&id)
                .ok_or_else(|| anyhow!("no training recording for {id}"))?;

            // transcript models for this target
            let impostors = impostor_train_rows(&subjects, si, cfg.modeling.impostor_train_total);
            let mut models = Vec::new();
            for &kind in &classifiers {
                for combo in &attack_combos {
                    let seed = derive_seed(cfg.seed, &["cell", &id, kind.token(), &combo.label()]);
                    let model = build_user_model(
                        kind,
                        combo,
                        &subject.train_rows,
                        &impostors,
                        &full_catalog,
                        &grid_cfg,
                        seed,
                    )
                    .map_err(|e| anyhow!("training {kind}@{combo} for {id}: {e}"))?;
                    models.push(TargetModel { label: format!("{kind}@{combo}"), model });
                }
            }

            let (imitator, db) = match &shared {
                Some((imitator, db)) => (imitator.clone(), db.clone()),
                None => {
                    let profile = subject_profile(cfg, &id);
                    let imitator = matched_imitator(
                        &profile,
                        &format!("imitator_{id}"),
                        derive_seed(cfg.seed, &["imitator", &id]),
                        cfg.attack.matched_jitter,
                    );
                    let sweep = calibration_sweep(
                        &imitator,
                        cfg.dataset.calibration_duration_s,
                        cfg.dataset.sample_rate_hz,
                        derive_seed(cfg.seed, &["sweep", &id]),
                    )
                    .map_err(|e| anyhow!("{e}"))?;
                    let db =
                        ImitatorDatabase::from_sweep(&sweep, &frame).map_err(|e| anyhow!("{e}"))?;
                    (imitator, db)
                }
            };

            let opts = AttackOptions {
                max_iterations: cfg.attack.max_iterations,
                overlap_threshold: cfg.attack.overlap_threshold,
                batch_frames: cfg.attack.batch_frames,
                stolen_frames: cfg.attack.stolen_frames,
                spoof_sets: cfg.attack.spoof_sets,
                spoof_frames: cfg.attack.spoof_frames,
                dominant,
                frame,
                sample_rate_hz: cfg.dataset.sample_rate_hz,
                seed: derive_seed(cfg.seed, &["attack", &id]),
            };
            let result = run_attack(stolen, &imitator, db, &models, &opts)
                .map_err(|e| anyhow!("attack on {id}: {e}"))?;

            let mut spoof_vectors = Vec::new();
            for rec in &result.spoof_recordings {
                for f in segment(rec, &frame).map_err(|e| anyhow!("{e}"))? {
                    spoof_vectors.push(feature_vector(&f, None).map_err(|e| anyhow!("{e}"))?);
                }
            }
            let sfar: BTreeMap<String, f64> = result
                .sfar
                .iter()
                .map(|(label, &(a, t))| (label.clone(), a as f64 / t as f64))
                .collect();
            let mean_sfar = if sfar.is_empty() {
                0.0
            } else {
                sfar.values().sum::<f64>() / sfar.len() as f64
            };
            Ok(TargetOutcome {
                record: AttackRecord {
                    target: id.clone(),
                    imitator: result.imitator_id.clone(),
                    converged: result.converged,
                    iterations: result.iterations,
                    termination: result.termination.clone(),
                    final_gcat: result.final_gcat.label(),
                    sfar,
                    mean_sfar,
                },
                trace: result.trace,
                spoof_recordings: result.spoof_recordings,
                spoof_vectors,
            })
        })
        .collect();
    let outcomes = outcomes?;

    fs::create_dir_all(layout.transcripts_dir())?;
    fs::create_dir_all(layout.mimicry_dir())?;
    fs::create_dir_all(layout.spoof_features_dir())?;
    for outcome in &outcomes {
        let id = &outcome.record.target;
        let mut transcript = String::new();
        for line in header.lines() {
            transcript.push_str(&format!("# {line}\n"));
        }
        for record in &outcome.trace {
            transcript.push_str(&serde_json::to_string(record)?);
            transcript.push('\n');
        }
        write_text(&layout.transcripts_dir().join(format!("{id}.ndjson")), &transcript)?;
        for (k, rec) in outcome.spoof_recordings.iter().enumerate() {
            let path = layout.mimicry_dir().join(format!("{id}_set{}.csv", k + 1));
            write_recording_csv(&path, rec, Some(&header)).map_err(|e| anyhow!("{e}"))?;
        }
        write_feature_store(
            &layout.spoof_features_dir().join(format!("{id}.ndjson")),
            &outcome.spoof_vectors,
            Some(&header),
        )
        .map_err(|e| anyhow!("{e}"))?;
    }

    let records: Vec<&AttackRecord> = outcomes.iter().map(|o| &o.record).collect();
    let mut csv = String::new();
    for line in header.lines() {
        csv.push_str(&format!("# {line}\n"));
    }
    let labels: Vec<String> = records
        .first()
        .map(|r| r.sfar.keys().cloned().collect())
        .unwrap_or_default();
    csv.push_str("target,converged,iterations,final_gcat,mean_sfar");
    for l in &labels {
        csv.push_str(&format!(",{l}"));
    }
    csv.push('\n');
    for r in &records {
        csv.push_str(&format!(
            "{},{},{},{},{:.4}",
            r.target, r.converged, r.iterations, r.final_gcat, r.mean_sfar
        ));
        for l in &labels {
            csv.push_str(&format!(",{:.4}", r.sfar.get(l).copied().unwrap_or(f64::NAN)));
        }
        csv.push('\n');
    }
    write_text(&layout.attack_dir().join("sfar_by_target.csv"), &csv)?;

    let record_values: Vec<&AttackRecord> = records.clone();
    let json = serde_json::to_string_pretty(&record_values)?;
    write_text(&layout.attack_results_path(), &format!("{json}\n"))?;

    let converged = records.iter().filter(|r| r.converged).count();
    let mean_sfar = records.iter().map(|r| r.mean_sfar).sum::<f64>() / records.len().max(1) as f64;
    let mut summary = String::new();
    for line in header.lines() {
        summary.push_str(&format!("# {line}\n"));
    }
    summary.push_str(&format!(
        "targets           {}\nconverged         {converged}\nnon_converged     {}\nmean SFAR (%)     {:.2}\n",
        records.len(),
        records.len() - converged,
        mean_sfar * 100.0
    ));
    summary.push_str("\nper-model mean SFAR (%)\n");
    for l in &labels {
        let vals: Vec<f64> = records.iter().filter_map(|r| r.sfar.get(l)).copied().collect();
        let mean = vals.iter().sum::<f64>() / vals.len().max(1) as f64;
        summary.push_str(&format!("{l:<14}{:.2}\n", mean * 100.0));
    }
    summary.push_str("\nper-target outcomes\n");
    for r in &records {
        summary.push_str(&format!(
            "{:<6} converged={} iterations={:<3} final=({}) mean_sfar={:.2}%\n",
            r.target,
            r.converged,
            r.iterations,
            r.final_gcat,
            r.mean_sfar * 100.0
        ));
    }
    write_text(&layout.attack_dir().join("attack_summary.txt"), &summary)?;

    println!(
        "attack: {}/{} targets converged, mean SFAR {:.2}% -> {}",
        converged,
        records.len(),
        mean_sfar * 100.0,
        layout.attack_dir().display()
    );
    if converged < records.len() {
        return Ok(CommandStatus::Partial);
    }
    Ok(CommandStatus::Success)
}

fn rows_to_vectors(
    subject: &SubjectData,
    rows: &[Vec<f64>],
    session: Session,
    catalog: &FeatureCatalog,
) -> Vec<FeatureVector> {
    rows.iter()
        .enumerate()
        .map(|(i, row)| FeatureVector {
            subject_id: subject.id.clone(),
            session,
            start_ms: i as u64,
            label: None,
            values: catalog
                .entries
                .iter()
                .zip(row)
                .filter(|(_, v)| v.is_finite())
                .map(|(e, v)| (e.id.clone(), *v))
                .collect(),
        })
        .collect()
}

fn read_transcript(path: &Path) -> anyhow::Result<Vec<IterationRecord>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(serde_json::from_str(line)?);
    }
    Ok(out)
}

/// Bhattacharyya overlap reports per target plus the learning-curve fits
/// over the attack transcripts, joined with SFAR in the analysis summary.
pub fn cmd_analyze(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<()> {
    let layout = OutputLayout::new(out);
    let results_path = layout.attack_results_path();
    if !results_path.exists() {
        bail!(
            "missing input: {} (run `wsgait attack` first)",
            results_path.display()
        );
    }
    let attack_records: Vec<AttackRecord> =
        serde_json::from_str(&fs::read_to_string(&results_path)?)?;
    let sfar_by_target: BTreeMap<String, f64> = attack_records
        .iter()
        .map(|r| (r.target.clone(), r.mean_sfar))
        .collect();

    let (recordings, has_mimicry) = load_dataset(&layout)?;
    if !has_mimicry {
        bail!("missing input: {} (run `wsgait attack` first)", layout.mimicry_dir().display());
    }
    let frame = cfg.frame_params();
    let (subjects, _) = prepare_subjects(&recordings, &frame).map_err(|e| anyhow!("{e}"))?;
    let catalog = FeatureCatalog::for_sensors(&SensorKind::ALL);
    let combo = SensorCombo::parse(&cfg.analysis.combo).map_err(|e| anyhow!("{e}"))?;
    let grid_cfg = cfg.grid_eval_config();
    let header = cfg.file_header();
    let analysis_dir = layout.analysis_dir();
    fs::create_dir_all(&analysis_dir)?;

    let mut summary_rows: Vec<(String, f64, f64, Option<f64>)> = Vec::new();
    for (si, subject) in subjects.iter().enumerate() {
        if subject.mimicry_rows.is_empty() {
            continue;
        }
        let impostor_rows = impostor_train_rows(&subjects, si, cfg.modeling.impostor_train_total);
        let (selection, _) =
            user_selection(&combo, &subject.train_rows, &impostor_rows, &catalog, &grid_cfg)
                .map_err(|e| anyhow!("{e}"))?;

        let target_vecs = rows_to_vectors(subject, &subject.test_rows, Session::Testing, &catalog);
        let mut impostor_vecs = Vec::new();
        for (oi, other) in subjects.iter().enumerate() {
            if oi != si {
                impostor_vecs.extend(rows_to_vectors(other, &other.test_rows, Session::Testing, &catalog));
            }
        }
        let imitator_vecs =
            rows_to_vectors(subject, &subject.mimicry_rows, Session::Mimicry, &catalog);

        let vs_impostors = bc_report(&target_vecs, &impostor_vecs, &selection, cfg.analysis.partitions)
            .map_err(|e| anyhow!("{e}"))?;
        let vs_imitator = bc_report(&target_vecs, &imitator_vecs, &selection, cfg.analysis.partitions)
            .map_err(|e| anyhow!("{e}"))?;

        let mut csv = String::new();
        for line in header.lines() {
            csv.push_str(&format!("# {line}\n"));
        }
        csv.push_str("feature,bc_impostors,bc_imitator\n");
        for ((name, bi), (_, bm)) in vs_impostors.rows.iter().zip(&vs_imitator.rows) {
            csv.push_str(&format!("{name},{bi:.4},{bm:.4}\n"));
        }
        csv.push_str(&format!(
            "MedianBC,{:.4},{:.4}\nMeanBC,{:.4},{:.4}\nStdDevBC,{:.4},{:.4}\n",
            vs_impostors.median_bc,
            vs_imitator.median_bc,
            vs_impostors.mean_bc,
            vs_imitator.mean_bc,
            vs_impostors.stddev_bc,
            vs_imitator.stddev_bc
        ));
        write_text(&analysis_dir.join(format!("bc_{}.csv", subject.id)), &csv)?;

        // learning curve over the attack transcript's overlap fractions
        let transcript_path = layout.transcripts_dir().join(format!("{}.ndjson", subject.id));
        let mut fitted = None;
        if transcript_path.exists() {
            let trace = read_transcript(&transcript_path)?;
            let series: Vec<(u32, f64)> = trace
                .iter()
                .map(|r| {
                    let mean =
                        r.fractions.iter().map(|(_, f)| f).sum::<f64>() / r.fractions.len() as f64;
                    (r.iteration as u32, mean)
                })
                .collect();
            let mut csv = String::new();
            for line in header.lines() {
                csv.push_str(&format!("# {line}\n"));
            }
            if series.len() >= 4 {
                let fit = fit_learning_curve(&series).map_err(|e| anyhow!("{e}"))?;
                csv.push_str(&format!(
                    "# beta1 = {:.6}, beta2 = {:.6}, beta3 = {:.6}, sse = {:.6}, trend = {:?}\n",
                    fit.beta1,
                    fit.beta2,
                    fit.beta3,
                    fit.sse,
                    fit.trend()
                ));
                csv.push_str("i,y,y_fit,residual\n");
                for (k, &(i, y)) in series.iter().enumerate() {
                    csv.push_str(&format!(
                        "{i},{y:.6},{:.6},{:.6}\n",
                        fit.predict(i as f64),
                        fit.residuals[k]
                    ));
                }
                fitted = Some(fit);
            } else {
                csv.push_str("# too few iterations for a learning-curve fit (needs >= 4)\n");
                csv.push_str("i,y\n");
                for &(i, y) in &series {
                    csv.push_str(&format!("{i},{y:.6}\n"));
                }
            }
            write_text(&analysis_dir.join(format!("learning_curve_{}.csv", subject.id)), &csv)?;
        }
        let _ = fitted;

        summary_rows.push((
            subject.id.clone(),
            vs_impostors.median_bc,
            vs_imitator.median_bc,
            sfar_by_target.get(&subject.id).copied(),
        ));
    }

    if summary_rows.is_empty() {
        bail!("no subject has mimicry data to analyze");
    }

    let mut csv = String::new();
    for line in header.lines() {
        csv.push_str(&format!("# {line}\n"));
    }
    csv.push_str("target,median_bc_impostors,median_bc_imitator,mean_sfar\n");
    for (id, bi, bm, sfar) in &summary_rows {
        csv.push_str(&format!(
            "{id},{bi:.4},{bm:.4},{}\n",
            sfar.map(|s| format!("{s:.4}")).unwrap_or_default()
        ));
    }
    let paired: Vec<(f64, f64)> = summary_rows
        .iter()
        .filter_map(|(_, _, bm, sfar)| sfar.map(|s| (*bm, s)))
        .collect();
    if paired.len() >= 2 {
        let bc: Vec<f64> = paired.iter().map(|p| p.0).collect();
        let sf: Vec<f64> = paired.iter().map(|p| p.1).collect();
        match spearman(&bc, &sf) {
            Ok(rho) => csv.push_str(&format!("# spearman_medianbc_sfar = {rho:.4}\n")),
            Err(e) => csv.push_str(&format!("# spearman_medianbc_sfar undefined: {e}\n")),
        }
    }
    write_text(&analysis_dir.join("analysis_summary.csv"), &csv)?;
    println!("analysis: {} targets -> {}", summary_rows.len(), analysis_dir.display());
    Ok(())
}

/// Assembles the stage outputs into one report file.
pub fn cmd_report(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<()> {
    let layout = OutputLayout::new(out);
    let mut report = String::new();
    for line in cfg.file_header().lines() {
        report.push_str(&format!("# {line}\n"));
    }
    let sections = [
        ("EVALUATION", layout.eval_dir().join("summary.txt")),
        ("HEATMAPS", layout.eval_dir().join("tables.txt")),
        ("ATTACK", layout.attack_dir().join("attack_summary.txt")),
        ("ANALYSIS", layout.analysis_dir().join("analysis_summary.csv")),
    ];
    for (name, path) in sections {
        report.push_str(&format!("\n===== {name} =====\n"));
        match fs::read_to_string(&path) {
            Ok(text) => {
                for line in text.lines() {
                    if !line.starts_with('#') {
                        report.push_str(line);
                        report.push('\n');
                    }
                }
            }
            Err(_) => report.push_str(&format!("(missing: {})\n", path.display())),
        }
    }
    write_text(&layout.root.join("report.txt"), &report)?;
    println!("report -> {}", layout.root.join("report.txt").display());
    Ok(())
}
