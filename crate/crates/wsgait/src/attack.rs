//! The treadmill-assisted spoofing feedback loop: imitator database,
//! imitator profile, dominant-feature selection, overlap testing, feedback
//! generation, and spoof-sample production.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analysis::pearson;
use crate::derive_seed;
use crate::error::{Error, Result};
use crate::features::{
    extract_attack_features, AttackFeatureSet, ATTACK_FEATURE_NAMES,
};
use crate::signal::{segment, FrameParams, Recording, Session};
use crate::synth::{GcatConfig, ImitatorModel, StepLength, StepWidth, ThighLift, SPEED_STEP_MPH};

/// Correlation magnitude treated as strong, both for dominant-feature
/// selection and for actionable feedback knobs.
pub const STRONG_CORRELATION: f64 = 0.5;
/// Default overlap-test pass threshold (strictly more than 70%).
pub const DEFAULT_OVERLAP_THRESHOLD: f64 = 0.70;
/// Default feedback-loop iteration cap.
pub const DEFAULT_MAX_ITERATIONS: usize = 40;

/// The reproduction dominant feature set.
pub const CANONICAL_DOMINANT: [&str; 5] = ["abs_x", "rng_x", "nop_x", "rng_y", "nop_y"];

/// One imitator-database entry: data collected at a known configuration.
#[derive(Debug, Clone)]
pub struct DbEntry {
    pub tag: String,
    pub gcat: GcatConfig,
    pub per_frame: Vec<AttackFeatureSet>,
    pub means: [f64; 17],
}

impl DbEntry {
    fn from_recording(tag: String, gcat: GcatConfig, recording: &Recording, frame: &FrameParams) -> Result<DbEntry> {
        let frames = segment(recording, frame)?;
        if frames.is_empty() {
            return Err(Error::invalid(format!("db entry `{tag}` has no complete frames")));
        }
        let per_frame: Result<Vec<AttackFeatureSet>> =
            frames.iter().map(extract_attack_features).collect();
        let per_frame = per_frame?;
        let mut means = [0.0f64; 17];
        for set in &per_frame {
            for (m, v) in means.iter_mut().zip(&set.values) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= per_frame.len() as f64;
        }
        Ok(DbEntry { tag, gcat, per_frame, means })
    }

    /// Per-frame values of one attack feature.
    pub fn feature_values(&self, index: usize) -> Vec<f64> {
        self.per_frame.iter().map(|s| s.values[index]).collect()
    }
}

/// Grows monotonically as the feedback loop appends new runs; entries are
/// never mutated.
#[derive(Debug, Clone, Default)]
pub struct ImitatorDatabase {
    pub entries: Vec<DbEntry>,
}

impl ImitatorDatabase {
    /// Seeds the database from a calibration sweep.
    pub fn from_sweep(runs: &[crate::synth::CalibrationRun], frame: &FrameParams) -> Result<ImitatorDatabase> {
        let mut db = ImitatorDatabase::default();
        for run in runs {
            db.entries.push(DbEntry::from_recording(
                run.tag.clone(),
                run.gcat,
                &run.recording,
                frame,
            )?);
        }
        Ok(db)
    }

    pub fn push_recording(
        &mut self,
        tag: String,
        gcat: GcatConfig,
        recording: &Recording,
        frame: &FrameParams,
    ) -> Result<usize> {
        self.entries.push(DbEntry::from_recording(tag, gcat, recording, frame)?);
        Ok(self.entries.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// The four treadmill-adjustable characteristics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GcatKnob {
    Speed,
    StepLength,
    StepWidth,
    ThighLift,
}

impl GcatKnob {
    pub const ALL: [GcatKnob; 4] =
        [GcatKnob::Speed, GcatKnob::StepLength, GcatKnob::StepWidth, GcatKnob::ThighLift];

    pub fn name(self) -> &'static str {
        match self {
            GcatKnob::Speed => "speed",
            GcatKnob::StepLength => "step_length",
            GcatKnob::StepWidth => "step_width",
            GcatKnob::ThighLift => "thigh_lift",
        }
    }

    /// Correlation-friendly numeric value of a configuration's knob.
    pub fn value(self, gcat: &GcatConfig) -> f64 {
        match self {
            GcatKnob::Speed => gcat.speed_mph,
            GcatKnob::StepLength => gcat.step_length.ordinal() as f64,
            GcatKnob::StepWidth => gcat.step_width.ordinal() as f64,
            GcatKnob::ThighLift => gcat.thigh_lift.ordinal() as f64,
        }
    }
}

/// Correlation matrix between dominant features (rows) and GCAT knobs
/// (columns).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImitatorProfile {
    pub features: Vec<String>,
    /// One [speed, step_length, step_width, thigh_lift] row per feature.
    pub coeffs: Vec<[f64; 4]>,
    /// (feature, knob) pairs where a zero-variance side forced a 0.
    pub zero_variance: Vec<(String, String)>,
}

impl ImitatorProfile {
    pub fn row(&self, feature: &str) -> Option<&[f64; 4]> {
        self.features.iter().position(|f| f == feature).map(|i| &self.coeffs[i])
    }
}

/// Builds the imitator profile: Pearson correlation of each dominant
/// feature's per-entry mean against each knob across database entries.
pub fn build_profile(db: &ImitatorDatabase, dominant: &[String]) -> Result<ImitatorProfile> {
    if db.is_empty() {
        return Err(Error::invalid("imitator database is empty; run the calibration sweep first"));
    }
    let mut coeffs = Vec::with_capacity(dominant.len());
    let mut zero_variance = Vec::new();
    for feature in dominant {
        let fi = AttackFeatureSet::index_of(feature)
            .ok_or_else(|| Error::invalid(format!("unknown attack feature `{feature}`")))?;
        let feature_means: Vec<f64> = db.entries.iter().map(|e| e.means[fi]).collect();
        let mut row = [0.0f64; 4];
        for (ki, knob) in GcatKnob::ALL.iter().enumerate() {
            let knob_vals: Vec<f64> = db.entries.iter().map(|e| knob.value(&e.gcat)).collect();
            match pearson(&feature_means, &knob_vals) {
                Some(r) => row[ki] = r,
                None => {
                    row[ki] = 0.0;
                    zero_variance.push((feature.clone(), knob.name().to_string()));
                }
            }
        }
        coeffs.push(row);
    }
    Ok(ImitatorProfile { features: dominant.to_vec(), coeffs, zero_variance })
}

/// Pairwise Pearson correlations of the 17 attack features over all
/// per-frame values in the database. Zero-variance pairs yield 0.
pub fn attack_feature_correlations(db: &ImitatorDatabase) -> [[f64; 17]; 17] {
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); 17];
    for entry in &db.entries {
        for set in &entry.per_frame {
            for (c, v) in columns.iter_mut().zip(&set.values) {
                c.push(*v);
            }
        }
    }
    let mut corr = [[0.0f64; 17]; 17];
    for i in 0..17 {
        corr[i][i] = 1.0;
        for j in i + 1..17 {
            let r = pearson(&columns[i], &columns[j]).unwrap_or(0.0);
            corr[i][j] = r;
            corr[j][i] = r;
        }
    }
    corr
}

/// Scans the attack-feature list in order and admits a feature if it is
/// (a) not strongly correlated with anything already admitted and (b)
/// strongly correlated with at least one other listed feature.
pub fn select_dominant(order: &[&str], corr: &[[f64; 17]; 17]) -> Vec<String> {
    let mut dominant: Vec<usize> = Vec::new();
    for name in order {
        let Some(i) = AttackFeatureSet::index_of(name) else { continue };
        let decorrelated = dominant.iter().all(|&d| corr[i][d].abs() < STRONG_CORRELATION);
        let supported = (0..17).any(|j| j != i && corr[i][j].abs() >= STRONG_CORRELATION);
        if decorrelated && supported {
            dominant.push(i);
        }
    }
    dominant.iter().map(|&i| ATTACK_FEATURE_NAMES[i].to_string()).collect()
}

/// Share of imitator values inside the target's observed [min, max];
/// passes only strictly above the threshold.
pub fn overlap_test(target_values: &[f64], imitator_values: &[f64], threshold: f64) -> (bool, f64) {
    let mn = target_values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mx = target_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let inside = imitator_values.iter().filter(|&&v| v >= mn && v <= mx).count();
    let fraction = inside as f64 / imitator_values.len() as f64;
    (fraction > threshold, fraction)
}

/// Index of the database entry with the least mean absolute error against
/// the stolen sample over the dominant features, z-scored by database-wide
/// statistics. Ties keep the earliest entry.
pub fn nearest_entry(db: &ImitatorDatabase, stolen_means: &[f64; 17], dominant: &[String]) -> usize {
    let idx: Vec<usize> = dominant
        .iter()
        .filter_map(|f| AttackFeatureSet::index_of(f))
        .collect();
    // database-wide normalization per dominant feature
    let mut mu = vec![0.0f64; idx.len()];
    let mut sd = vec![0.0f64; idx.len()];
    let n = db.entries.len() as f64;
    for (k, &fi) in idx.iter().enumerate() {
        for e in &db.entries {
            mu[k] += e.means[fi];
        }
        mu[k] /= n;
        for e in &db.entries {
            sd[k] += (e.means[fi] - mu[k]).powi(2);
        }
        sd[k] = (sd[k] / n).sqrt();
        if sd[k] < 1e-12 {
            sd[k] = 1.0;
        }
    }
    let mut best = 0usize;
    let mut best_err = f64::INFINITY;
    for (ei, e) in db.entries.iter().enumerate() {
        let mut err = 0.0;
        for (k, &fi) in idx.iter().enumerate() {
            let ze = (e.means[fi] - mu[k]) / sd[k];
            let zs = (stolen_means[fi] - mu[k]) / sd[k];
            err += (ze - zs).abs();
        }
        err /= idx.len() as f64;
        if err < best_err {
            best_err = err;
            best = ei;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increase,
    Decrease,
}

/// One treadmill adjustment handed to the imitator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackInstruction {
    pub knob: GcatKnob,
    pub direction: Direction,
    pub driving_feature: String,
    pub mean_error: f64,
    pub coefficient: f64,
}

/// Derives the next instruction for a failing feature. The knob is the
/// one with the largest |correlation| in the feature's profile row; the
/// direction moves the feature toward the stolen sample under
/// `mean_error = mean(closest) - mean(stolen)`.
pub fn generate_feedback(
    feature: &str,
    mean_error: f64,
    profile: &ImitatorProfile,
) -> Result<FeedbackInstruction> {
    if mean_error == 0.0 {
        return Err(Error::invalid(
            "zero mean error: feature cannot have failed the overlap test",
        ));
    }
    let row = profile
        .row(feature)
        .ok_or_else(|| Error::invalid(format!("no profile row for feature `{feature}`")))?;
    let mut knob_idx = 0usize;
    for k in 1..4 {
        if row[k].abs() > row[knob_idx].abs() {
            knob_idx = k;
        }
    }
    let coefficient = row[knob_idx];
    if coefficient.abs() < STRONG_CORRELATION {
        return Err(Error::NoActionableKnob(feature.to_string()));
    }
    let direction = if -mean_error * coefficient > 0.0 {
        Direction::Increase
    } else {
        Direction::Decrease
    };
    Ok(FeedbackInstruction {
        knob: GcatKnob::ALL[knob_idx],
        direction,
        driving_feature: feature.to_string(),
        mean_error,
        coefficient,
    })
}

/// Applies an instruction to a configuration, clamped to the imitator's
/// feasible region; `None` when no movement is possible.
pub fn apply_instruction(
    gcat: &GcatConfig,
    instruction: &FeedbackInstruction,
    imitator: &ImitatorModel,
) -> Option<GcatConfig> {
    let sign = match instruction.direction {
        Direction::Increase => 1.0,
        Direction::Decrease => -1.0,
    };
    let mut next = *gcat;
    match instruction.knob {
        GcatKnob::Speed => {
            let lo = imitator.feasible.speed_min.max(crate::synth::SPEED_MIN_MPH);
            let hi = imitator.feasible.speed_max.min(crate::synth::SPEED_MAX_MPH);
            next.speed_mph = (gcat.speed_mph + sign * SPEED_STEP_MPH).clamp(lo, hi);
            if (next.speed_mph - gcat.speed_mph).abs() < 1e-9 {
                return None;
            }
        }
        GcatKnob::StepLength => {
            let level = (gcat.step_length.ordinal() + sign as i8).clamp(-1, 1);
            let stepped = StepLength::from_ordinal(level).unwrap();
            if stepped == gcat.step_length || !imitator.feasible.step_lengths.contains(&stepped) {
                return None;
            }
            next.step_length = stepped;
        }
        GcatKnob::StepWidth => {
            let level = (gcat.step_width.ordinal() + sign as i8).clamp(-1, 1);
            let stepped = StepWidth::from_ordinal(level).unwrap();
            if stepped == gcat.step_width || !imitator.feasible.step_widths.contains(&stepped) {
                return None;
            }
            next.step_width = stepped;
        }
        GcatKnob::ThighLift => {
            let level = (gcat.thigh_lift.ordinal() + sign as i8).clamp(-1, 1);
            let stepped = ThighLift::from_ordinal(level).unwrap();
            if stepped == gcat.thigh_lift || !imitator.feasible.thigh_lifts.contains(&stepped) {
                return None;
            }
            next.thigh_lift = stepped;
        }
    }
    Some(next)
}

/// How dominant features are chosen for an attack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DominantMode {
    /// The fixed five-feature reproduction set.
    Canonical,
    /// Recomputed from the calibration database correlations.
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackOptions {
    pub max_iterations: usize,
    pub overlap_threshold: f64,
    /// Frames synthesized per feedback iteration.
    pub batch_frames: usize,
    /// Frames taken from the target's stolen recording.
    pub stolen_frames: usize,
    pub spoof_sets: usize,
    pub spoof_frames: usize,
    pub dominant: DominantMode,
    pub frame: FrameParams,
    pub sample_rate_hz: f64,
    pub seed: u64,
}

impl Default for AttackOptions {
    fn default() -> Self {
        AttackOptions {
            max_iterations: DEFAULT_MAX_ITERATIONS,
            overlap_threshold: DEFAULT_OVERLAP_THRESHOLD,
            batch_frames: 10,
            stolen_frames: 20,
            spoof_sets: 3,
            spoof_frames: 22,
            dominant: DominantMode::Canonical,
            frame: FrameParams::default(),
            sample_rate_hz: crate::signal::DEFAULT_SAMPLE_RATE_HZ,
            seed: 42,
        }
    }
}

impl AttackOptions {
    /// Recording duration that yields exactly `frames` complete frames.
    pub fn duration_for_frames(&self, frames: usize) -> f64 {
        self.frame.frame_len_s + (frames.saturating_sub(1)) as f64 * (self.frame.frame_len_s - self.frame.overlap_s)
    }
}

/// One feedback-loop pass, as logged to the attack transcript.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub closest_index: usize,
    pub closest_tag: String,
    pub gcat: GcatConfig,
    pub fractions: Vec<(String, f64)>,
    pub all_passed: bool,
    pub instruction: Option<FeedbackInstruction>,
    pub db_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIterations,
    DeadEnd(String),
}

/// A trained model the spoof samples are scored against.
pub struct TargetModel {
    pub label: String,
    pub model: crate::modeling::TrainedModel,
}

/// Outcome of one attack against one target.
#[derive(Debug, Clone)]
pub struct AttackResult {
    pub target_id: String,
    pub imitator_id: String,
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
    pub final_gcat: GcatConfig,
    pub trace: Vec<IterationRecord>,
    pub spoof_recordings: Vec<Recording>,
    /// label -> (accepted spoof frames, total spoof frames)
    pub sfar: BTreeMap<String, (usize, usize)>,
    pub db: ImitatorDatabase,
}

impl AttackResult {
    pub fn sfar_rate(&self, label: &str) -> Option<f64> {
        self.sfar.get(label).map(|&(a, t)| a as f64 / t as f64)
    }

    /// Mean per-iteration overlap fraction, the learning-curve observable.
    pub fn overlap_series(&self) -> Vec<(u32, f64)> {
        self.trace
            .iter()
            .map(|r| {
                let mean =
                    r.fractions.iter().map(|(_, f)| f).sum::<f64>() / r.fractions.len() as f64;
                (r.iteration as u32, mean)
            })
            .collect()
    }
}

/// Runs the feedback loop of the treadmill attack.
///
/// `stolen` is the target recording the attacker obtained; `db` must
/// already contain the calibration sweep. On convergence the imitator
/// records `spoof_sets` independent spoof sets at the final configuration,
/// which are scored against `models`.
pub fn run_attack(
    stolen: &Recording,
    imitator: &ImitatorModel,
    mut db: ImitatorDatabase,
    models: &[TargetModel],
    opts: &AttackOptions,
) -> Result<AttackResult> {
    if db.is_empty() {
        return Err(Error::invalid("imitator database is empty; run the calibration sweep first"));
    }
    let stolen_frames_all = segment(stolen, &opts.frame)?;
    if stolen_frames_all.is_empty() {
        return Err(Error::invalid("stolen recording is shorter than one frame"));
    }
    let stolen_frames = &stolen_frames_all[..opts.stolen_frames.min(stolen_frames_all.len())];
    let stolen_sets: Result<Vec<AttackFeatureSet>> =
        stolen_frames.iter().map(extract_attack_features).collect();
    let stolen_sets = stolen_sets?;
    let mut stolen_means = [0.0f64; 17];
    for s in &stolen_sets {
        for (m, v) in stolen_means.iter_mut().zip(&s.values) {
            *m += v;
        }
    }
    for m in &mut stolen_means {
        *m /= stolen_sets.len() as f64;
    }
    let stolen_values: Vec<Vec<f64>> = (0..17)
        .map(|i| stolen_sets.iter().map(|s| s.values[i]).collect())
        .collect();

    let dominant: Vec<String> = match opts.dominant {
        DominantMode::Canonical => CANONICAL_DOMINANT.iter().map(|s| s.to_string()).collect(),
        DominantMode::Auto => {
            let corr = attack_feature_correlations(&db);
            let auto = select_dominant(&ATTACK_FEATURE_NAMES, &corr);
            if auto.is_empty() {
                return Err(Error::invalid(
                    "dominant-feature selection produced an empty set on this calibration data",
                ));
            }
            auto
        }
    };
    let dominant_idx: Vec<usize> = dominant
        .iter()
        .map(|f| AttackFeatureSet::index_of(f).unwrap())
        .collect();
    let profile = build_profile(&db, &dominant)?;

    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut termination = Termination::MaxIterations;
    let mut converged_gcat: Option<GcatConfig> = None;
    let mut iterations = 0usize;

    // initial configuration: the calibration entry closest to the stolen
    // sample
    let mut current_gcat = db.entries[nearest_entry(&db, &stolen_means, &dominant)].gcat;

    for iteration in 1..=opts.max_iterations {
        iterations = iteration;

        // the imitator walks at the current configuration; the attempt is
        // stored in the database
        let attempt_rec = imitator.synthesize(
            &current_gcat,
            Session::Calibration,
            opts.duration_for_frames(opts.batch_frames),
            opts.sample_rate_hz,
            derive_seed(opts.seed, &["iteration", &iteration.to_string()]),
        )?;
        let attempt =
            db.push_recording(format!("iter{iteration}"), current_gcat, &attempt_rec, &opts.frame)?;

        // overlap test on the newest mimicked samples
        let mut fractions: Vec<(String, f64)> = Vec::with_capacity(dominant.len());
        let mut failing: Vec<(usize, f64)> = Vec::new();
        for (k, &fi) in dominant_idx.iter().enumerate() {
            let imit_vals = db.entries[attempt].feature_values(fi);
            let (pass, fraction) =
                overlap_test(&stolen_values[fi], &imit_vals, opts.overlap_threshold);
            fractions.push((dominant[k].clone(), fraction));
            if !pass {
                failing.push((k, fraction));
            }
        }
        let all_passed = failing.is_empty();

        // the next adjustment starts from the database entry closest to the
        // stolen sample, which may be an earlier, better attempt
        let closest = nearest_entry(&db, &stolen_means, &dominant);
        let entry_gcat = db.entries[closest].gcat;
        let entry_tag = db.entries[closest].tag.clone();

        if all_passed {
            trace.push(IterationRecord {
                iteration,
                closest_index: closest,
                closest_tag: entry_tag,
                gcat: current_gcat,
                fractions,
                all_passed,
                instruction: None,
                db_size: db.len(),
            });
            termination = Termination::Converged;
            converged_gcat = Some(current_gcat);
            break;
        }

        // worst-failing feature first; ties keep dominant order
        failing.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
        let mut candidates: Vec<FeedbackInstruction> = Vec::new();
        for &(k, _) in &failing {
            let fi = dominant_idx[k];
            let mean_error = db.entries[closest].means[fi] - stolen_means[fi];
            match generate_feedback(&dominant[k], mean_error, &profile) {
                Ok(instr) => candidates.push(instr),
                Err(Error::NoActionableKnob(_)) | Err(Error::InvalidArgument(_)) => continue,
                Err(e) => return Err(e),
            }
        }

        if candidates.is_empty() {
            trace.push(IterationRecord {
                iteration,
                closest_index: closest,
                closest_tag: entry_tag,
                gcat: current_gcat,
                fractions,
                all_passed,
                instruction: None,
                db_size: db.len(),
            });
            termination = Termination::DeadEnd(
                "no failing feature has a strongly correlated knob".to_string(),
            );
            break;
        }

        // prefer an instruction that actually moves a knob; when every one
        // is clamped at the feasible boundary, retry the closest known
        // configuration with a fresh attempt
        let (instruction, next_gcat) = candidates
            .iter()
            .find_map(|i| apply_instruction(&entry_gcat, i, imitator).map(|g| (i.clone(), g)))
            .unwrap_or_else(|| (candidates[0].clone(), entry_gcat));

        trace.push(IterationRecord {
            iteration,
            closest_index: closest,
            closest_tag: entry_tag,
            gcat: current_gcat,
            fractions,
            all_passed,
            instruction: Some(instruction),
            db_size: db.len(),
        });
        current_gcat = next_gcat;
    }

    let converged = matches!(termination, Termination::Converged);
    let final_gcat = converged_gcat.unwrap_or_else(|| {
        // best-so-far: entry maximizing the worst dominant-feature overlap
        let mut best = db.entries[0].gcat;
        let mut best_score = f64::NEG_INFINITY;
        for e in &db.entries {
            let worst = dominant_idx
                .iter()
                .map(|&fi| overlap_test(&stolen_values[fi], &e.feature_values(fi), opts.overlap_threshold).1)
                .fold(f64::INFINITY, f64::min);
            if worst > best_score {
                best_score = worst;
                best = e.gcat;
            }
        }
        best
    });

    // spoof production at the final configuration
    let mut spoof_recordings = Vec::with_capacity(opts.spoof_sets);
    let mut sfar: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for set in 0..opts.spoof_sets {
        let mut rec = imitator.synthesize(
            &final_gcat,
            Session::Mimicry,
            opts.duration_for_frames(opts.spoof_frames),
            opts.sample_rate_hz,
            derive_seed(opts.seed, &["spoof", &set.to_string()]),
        )?;
        rec.subject_id = stolen.subject_id.clone();
        spoof_recordings.push(rec);
    }
    if !models.is_empty() {
        let mut spoof_vectors = Vec::new();
        for rec in &spoof_recordings {
            for frame in segment(rec, &opts.frame)? {
                spoof_vectors.push(crate::features::feature_vector(&frame, None)?);
            }
        }
        for tm in models {
            let mut accepted = 0usize;
            for v in &spoof_vectors {
                if tm.model.decide(v)?.accept {
                    accepted += 1;
                }
            }
            sfar.insert(tm.label.clone(), (accepted, spoof_vectors.len()));
        }
    }

    Ok(AttackResult {
        target_id: stolen.subject_id.clone(),
        imitator_id: imitator.profile.subject_id.clone(),
        iterations,
        converged,
        termination,
        final_gcat,
        trace,
        spoof_recordings,
        sfar,
        db,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{calibration_sweep, matched_imitator, SubjectProfile};

    fn sweep_db(imitator: &ImitatorModel, seed: u64) -> ImitatorDatabase {
        let runs = calibration_sweep(imitator, 60.0, 50.0, seed).unwrap();
        ImitatorDatabase::from_sweep(&runs, &FrameParams::default()).unwrap()
    }

    #[test]
    fn overlap_test_boundaries() {
        let target = vec![0.0, 10.0];
        let identical = target.clone();
        let (pass, frac) = overlap_test(&target, &identical, DEFAULT_OVERLAP_THRESHOLD);
        assert!(pass);
        assert_eq!(frac, 1.0);

        // 7 of 10 inside: exactly 0.70 fails the strict threshold
        let imit: Vec<f64> = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 11.0, 12.0, 13.0];
        let (pass, frac) = overlap_test(&target, &imit, DEFAULT_OVERLAP_THRESHOLD);
        assert!(!pass);
        assert!((frac - 0.70).abs() < 1e-12);

        // 8 of 10 inside passes
        let imit: Vec<f64> = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 12.0, 13.0];
        let (pass, frac) = overlap_test(&target, &imit, DEFAULT_OVERLAP_THRESHOLD);
        assert!(pass);
        assert!((frac - 0.80).abs() < 1e-12);
    }

    #[test]
    fn profile_correlations_match_hand_computation() {
        // three entries, feature exactly linear in speed
        let mk_entry = |speed: f64, value: f64| {
            let mut means = [0.0f64; 17];
            means[0] = value;
            DbEntry {
                tag: format!("speed_{speed}"),
                gcat: GcatConfig::regular(speed),
                per_frame: vec![AttackFeatureSet { values: means }],
                means,
            }
        };
        let db = ImitatorDatabase {
            entries: vec![mk_entry(1.2, 1.2), mk_entry(1.4, 1.4), mk_entry(1.6, 1.6)],
        };
        let profile = build_profile(&db, &["abs_x".to_string()]).unwrap();
        assert!((profile.coeffs[0][0] - 1.0).abs() < 1e-12);
        // categorical knobs never varied: zero-variance convention
        assert_eq!(profile.coeffs[0][1], 0.0);
        assert!(!profile.zero_variance.is_empty());

        // the 0.982 hand-computed case
        let db = ImitatorDatabase {
            entries: vec![mk_entry(1.2, 1.0), mk_entry(1.4, 2.0), mk_entry(1.6, 4.0)],
        };
        let profile = build_profile(&db, &["abs_x".to_string()]).unwrap();
        assert!((profile.coeffs[0][0] - 0.982).abs() < 1e-3, "{}", profile.coeffs[0][0]);
    }

    #[test]
    fn dominant_selection_reproduces_worked_trace() {
        // encode the documented relationships among the 17 features
        let mut corr = [[0.0f64; 17]; 17];
        for (i, row) in corr.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        let set = |corr: &mut [[f64; 17]; 17], a: &str, b: &str, v: f64| {
            let i = AttackFeatureSet::index_of(a).unwrap();
            let j = AttackFeatureSet::index_of(b).unwrap();
            corr[i][j] = v;
            corr[j][i] = v;
        };
        // abs_x is strongly supported by another feature but weakly tied to rng_x
        set(&mut corr, "abs_x", "eng_y", 0.8);
        set(&mut corr, "abs_x", "rng_x", 0.3);
        // rng_x strongly correlated with bap_x, sef_y, mean_m, api_m
        for other in ["bap_x", "sef_y", "mean_m", "api_m"] {
            set(&mut corr, "rng_x", other, 0.7);
        }
        let dominant = select_dominant(&ATTACK_FEATURE_NAMES, &corr);
        assert_eq!(dominant[0], "abs_x");
        assert_eq!(dominant[1], "rng_x");
    }

    #[test]
    fn fully_correlated_list_admits_only_the_first() {
        let corr = [[1.0f64; 17]; 17];
        let dominant = select_dominant(&ATTACK_FEATURE_NAMES, &corr);
        assert_eq!(dominant, vec!["abs_x".to_string()]);
    }

    #[test]
    fn feedback_reproduces_sign_rule() {
        let profile = ImitatorProfile {
            features: vec!["rng_y".to_string()],
            coeffs: vec![[0.9, 0.2, 0.1, 0.0]],
            zero_variance: vec![],
        };
        let instr = generate_feedback("rng_y", -3.2, &profile).unwrap();
        assert_eq!(instr.knob, GcatKnob::Speed);
        assert_eq!(instr.direction, Direction::Increase);

        let flipped = ImitatorProfile {
            features: vec!["rng_y".to_string()],
            coeffs: vec![[-0.9, 0.2, 0.1, 0.0]],
            zero_variance: vec![],
        };
        let instr = generate_feedback("rng_y", -3.2, &flipped).unwrap();
        assert_eq!(instr.direction, Direction::Decrease);

        // positive error with positive correlation: decrease
        let instr = generate_feedback("rng_y", 3.2, &profile).unwrap();
        assert_eq!(instr.direction, Direction::Decrease);

        // zero error is a guard case
        assert!(generate_feedback("rng_y", 0.0, &profile).is_err());

        // weak correlations are not actionable
        let weak = ImitatorProfile {
            features: vec!["rng_y".to_string()],
            coeffs: vec![[0.4, 0.3, 0.2, 0.1]],
            zero_variance: vec![],
        };
        match generate_feedback("rng_y", -3.2, &weak) {
            Err(Error::NoActionableKnob(f)) => assert_eq!(f, "rng_y"),
            other => panic!("expected NoActionableKnob, got {other:?}"),
        }
    }

    #[test]
    fn nearest_entry_prefers_exact_match_and_breaks_ties_early() {
        let mk_entry = |tag: &str, v: f64| {
            let mut means = [0.0f64; 17];
            means[0] = v;
            means[1] = v;
            DbEntry {
                tag: tag.into(),
                gcat: GcatConfig::regular(2.0),
                per_frame: vec![],
                means,
            }
        };
        let db = ImitatorDatabase {
            entries: vec![mk_entry("a", 1.0), mk_entry("b", 5.0), mk_entry("c", 9.0)],
        };
        let mut stolen = [0.0f64; 17];
        stolen[0] = 5.0;
        stolen[1] = 5.0;
        let dominant = vec!["abs_x".to_string(), "rng_x".to_string()];
        assert_eq!(nearest_entry(&db, &stolen, &dominant), 1);

        // equidistant between entries 0 and 2: earliest wins
        stolen[0] = 5.0;
        stolen[1] = 5.0;
        let db = ImitatorDatabase {
            entries: vec![mk_entry("a", 4.0), mk_entry("b", 6.0)],
        };
        assert_eq!(nearest_entry(&db, &stolen, &dominant), 0);
    }

    #[test]
    fn self_mimicry_converges_immediately() {
        let target = SubjectProfile::generate("S01", 404);
        let imitator = ImitatorModel::from_profile(target.clone());
        let db = sweep_db(&imitator, 7);
        let stolen = crate::synth::synthesize(
            &target,
            &target.natural,
            Session::Training,
            105.0,
            50.0,
            900,
        )
        .unwrap();
        let result =
            run_attack(&stolen, &imitator, db, &[], &AttackOptions::default()).unwrap();
        assert!(result.converged, "termination: {:?}", result.termination);
        assert_eq!(result.iterations, 1);
        assert_eq!(result.spoof_recordings.len(), 3);
        for rec in &result.spoof_recordings {
            assert_eq!(rec.session, Session::Mimicry);
            assert_eq!(rec.subject_id, "S01");
        }
    }

    #[test]
    fn matched_imitator_converges_and_conclusion_is_sound() {
        let target = SubjectProfile::generate("S02", 77);
        let imitator = matched_imitator(&target, "imit", derive_seed(77, &["imit"]), 0.03);
        let db = sweep_db(&imitator, 8);
        let stolen = crate::synth::synthesize(
            &target,
            &target.natural,
            Session::Training,
            105.0,
            50.0,
            901,
        )
        .unwrap();
        let opts = AttackOptions::default();
        let result = run_attack(&stolen, &imitator, db, &[], &opts).unwrap();
        assert!(result.converged, "termination: {:?}", result.termination);
        assert!(result.iterations <= DEFAULT_MAX_ITERATIONS);

        // soundness: the final iteration's fractions all pass
        let last = result.trace.last().unwrap();
        assert!(last.all_passed);
        for (_, f) in &last.fractions {
            assert!(*f > opts.overlap_threshold);
        }
    }

    #[test]
    fn infeasible_speed_ceiling_never_converges() {
        // target walking much faster than the imitator can reach
        let mut target = SubjectProfile::generate("S03", 5);
        target.base_period_s = 1.05;
        target.natural.speed_mph = 2.6;
        let mut imit_profile = SubjectProfile::generate("imit", 6);
        imit_profile.base_period_s = 1.75;
        imit_profile.natural.speed_mph = 1.8;
        let imitator = ImitatorModel::new(
            imit_profile,
            crate::synth::FeasibleRegion {
                speed_min: crate::synth::SPEED_MIN_MPH,
                speed_max: 2.0,
                ..Default::default()
            },
        )
        .unwrap();
        let db = sweep_db(&imitator, 9);
        let stolen = crate::synth::synthesize(
            &target,
            &target.natural,
            Session::Training,
            105.0,
            50.0,
            902,
        )
        .unwrap();
        let result =
            run_attack(&stolen, &imitator, db, &[], &AttackOptions::default()).unwrap();
        assert!(!result.converged, "termination: {:?}", result.termination);
    }

    #[test]
    fn database_only_grows_and_loop_is_deterministic() {
        let target = SubjectProfile::generate("S04", 15);
        let imitator = matched_imitator(&target, "imit", 16, 0.05);
        let db = sweep_db(&imitator, 10);
        let initial = db.len();
        let stolen = crate::synth::synthesize(
            &target,
            &target.natural,
            Session::Training,
            105.0,
            50.0,
            903,
        )
        .unwrap();
        let opts = AttackOptions::default();
        let a = run_attack(&stolen, &imitator, db.clone(), &[], &opts).unwrap();
        let b = run_attack(&stolen, &imitator, db, &[], &opts).unwrap();
        assert!(a.db.len() >= initial);
        for (ra, rb) in a.trace.iter().zip(&b.trace) {
            assert_eq!(ra.gcat, rb.gcat);
            assert_eq!(ra.fractions, rb.fractions);
        }
        assert_eq!(a.final_gcat, b.final_gcat);
        assert_eq!(a.spoof_recordings, b.spoof_recordings);
    }

    #[test]
    fn single_speed_instruction_moves_driving_feature_toward_target() {
        // the generator's ground truth: one speed increment strictly raises
        // cadence-driven features toward a faster target's mean
        let imitator = ImitatorModel::from_profile(SubjectProfile::generate("imit", 61));
        let natural = imitator.profile.natural.speed_mph;
        let slow = imitator
            .synthesize(&GcatConfig::regular(natural), Session::Calibration, 60.0, 50.0, 1)
            .unwrap();
        let faster = imitator
            .synthesize(
                &GcatConfig::regular(natural + SPEED_STEP_MPH),
                Session::Calibration,
                60.0,
                50.0,
                2,
            )
            .unwrap();
        let frame = FrameParams::default();
        let mean_abs_x = |rec: &Recording| {
            let frames = segment(rec, &frame).unwrap();
            let vals: Vec<f64> = frames
                .iter()
                .map(|f| extract_attack_features(f).unwrap().get("abs_x").unwrap())
                .collect();
            vals.iter().sum::<f64>() / vals.len() as f64
        };
        let target_mean = mean_abs_x(&faster) * 1.2; // target lies above
        let before = (mean_abs_x(&slow) - target_mean).abs();
        let after = (mean_abs_x(&faster) - target_mean).abs();
        assert!(after < before);
    }
}
