//! Parametric synthetic gait generator: seeded subject profiles, a
//! GCAT-conditioned imitator model, and calibration sweeps.
//!
//! Each sensor axis is a sum of three harmonics of the gait-cycle
//! frequency plus slow drift, slow amplitude modulation, and white noise;
//! rotation channels are leaky integrals of the gyroscope. The
//! treadmill-adjustable characteristics map onto the signal as:
//!
//! - speed: cycle frequency scales as (speed/natural)^0.6 and amplitudes
//!   as (speed/natural)^0.5
//! - step length: dominant-harmonic amplitude multiplier on every axis
//! - step width: lateral (z) amplitude multiplier
//! - thigh lift: vertical (y) amplitude multiplier and phase shift

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::derive_seed;
use crate::error::{Error, Result};
use crate::io::quantize_sample;
use crate::signal::{Recording, SensorKind, SensorTrace, Session};

pub const SPEED_MIN_MPH: f64 = 1.2;
pub const SPEED_MAX_MPH: f64 = 2.8;
pub const SPEED_STEP_MPH: f64 = 0.2;

/// Physiology distance below which an imitator counts as matched to a target.
pub const DEFAULT_MATCHED_DELTA: f64 = 0.5;

const CADENCE_EXPONENT: f64 = 0.6;
const AMPLITUDE_EXPONENT: f64 = 0.5;
const SESSION_AMP_JITTER: f64 = 0.02;
const SESSION_PERIOD_JITTER: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepLength {
    Small,
    Regular,
    Large,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepWidth {
    Close,
    Regular,
    Wide,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThighLift {
    Front,
    Regular,
    Back,
}

macro_rules! level_impl {
    ($ty:ident, $low:ident, $mid:ident, $high:ident) => {
        impl $ty {
            pub const ALL: [$ty; 3] = [$ty::$low, $ty::$mid, $ty::$high];

            /// Ordinal encoding used for correlations: -1, 0, +1.
            pub fn ordinal(self) -> i8 {
                match self {
                    $ty::$low => -1,
                    $ty::$mid => 0,
                    $ty::$high => 1,
                }
            }

            pub fn from_ordinal(v: i8) -> Option<$ty> {
                match v {
                    -1 => Some($ty::$low),
                    0 => Some($ty::$mid),
                    1 => Some($ty::$high),
                    _ => None,
                }
            }

            pub fn token(self) -> &'static str {
                match self {
                    $ty::$low => stringify!($low),
                    $ty::$mid => stringify!($mid),
                    $ty::$high => stringify!($high),
                }
            }
        }
    };
}

level_impl!(StepLength, Small, Regular, Large);
level_impl!(StepWidth, Close, Regular, Wide);
level_impl!(ThighLift, Front, Regular, Back);

impl StepLength {
    /// Dominant-harmonic amplitude multiplier.
    pub fn amp_multiplier(self) -> f64 {
        match self {
            StepLength::Small => 0.8,
            StepLength::Regular => 1.0,
            StepLength::Large => 1.2,
        }
    }
}

impl StepWidth {
    /// Lateral (z) amplitude multiplier.
    pub fn z_multiplier(self) -> f64 {
        match self {
            StepWidth::Close => 0.8,
            StepWidth::Regular => 1.0,
            StepWidth::Wide => 1.2,
        }
    }
}

impl ThighLift {
    /// Vertical (y) amplitude multiplier.
    pub fn y_multiplier(self) -> f64 {
        match self {
            ThighLift::Front => 0.9,
            ThighLift::Regular => 1.0,
            ThighLift::Back => 1.1,
        }
    }

    /// Vertical (y) harmonic phase shift, radians.
    pub fn y_phase_shift(self) -> f64 {
        match self {
            ThighLift::Front => -0.3,
            ThighLift::Regular => 0.0,
            ThighLift::Back => 0.3,
        }
    }
}

/// Gait Characteristics Adaptable over a Treadmill.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GcatConfig {
    pub speed_mph: f64,
    pub step_length: StepLength,
    pub step_width: StepWidth,
    pub thigh_lift: ThighLift,
}

impl GcatConfig {
    pub fn regular(speed_mph: f64) -> GcatConfig {
        GcatConfig {
            speed_mph,
            step_length: StepLength::Regular,
            step_width: StepWidth::Regular,
            thigh_lift: ThighLift::Regular,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.speed_mph < SPEED_MIN_MPH - 1e-9 || self.speed_mph > SPEED_MAX_MPH + 1e-9 {
            return Err(Error::Constraint {
                knob: "speed".into(),
                msg: format!(
                    "speed {} mph outside treadmill range [{SPEED_MIN_MPH}, {SPEED_MAX_MPH}]",
                    self.speed_mph
                ),
            });
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        format!(
            "speed={:.1},sl={},sw={},tl={}",
            self.speed_mph,
            self.step_length.token(),
            self.step_width.token(),
            self.thigh_lift.token()
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub amp: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisModel {
    pub harmonics: [Harmonic; 3],
    pub baseline: f64,
    pub drift_amp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorModel {
    pub axes: [AxisModel; 3],
    pub noise_sd: f64,
}

/// Everything that determines one walker's signals: physiology scales,
/// natural gait configuration, and the per-sensor harmonic model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectProfile {
    pub subject_id: String,
    pub height_scale: f64,
    pub weight_scale: f64,
    /// Gait-cycle period at natural speed, seconds.
    pub base_period_s: f64,
    pub natural: GcatConfig,
    /// Harmonic models for accelerometer, gyroscope, magnetometer.
    pub sensors: BTreeMap<SensorKind, SensorModel>,
    pub rot_leak: f64,
    pub rot_noise_sd: f64,
    pub am_depth: f64,
    pub am_period_s: f64,
    /// Relative depth of the slow cycle-frequency modulation.
    pub cadence_wander: f64,
    pub cadence_wander_period_s: f64,
    pub drift_period_s: f64,
    pub seed: u64,
}

/// Standard normal via Box-Muller.
fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Per-(sensor, axis) dominant-amplitude scale of the population.
fn base_amp(kind: SensorKind, axis: usize) -> f64 {
    match kind {
        SensorKind::Accelerometer => [2.0, 2.8, 1.4][axis],
        SensorKind::Gyroscope => [1.1, 0.8, 1.0][axis],
        SensorKind::Magnetometer => [0.35, 0.3, 0.4][axis],
        SensorKind::Rotation => [0.0, 0.0, 0.0][axis],
    }
}

fn base_baseline(kind: SensorKind, axis: usize) -> f64 {
    match kind {
        SensorKind::Accelerometer => [0.3, 9.81, 0.2][axis],
        SensorKind::Gyroscope => [0.0, 0.0, 0.0][axis],
        SensorKind::Magnetometer => [22.0, 5.0, 40.0][axis],
        SensorKind::Rotation => [0.0, 0.0, 0.0][axis],
    }
}

// Noise floors sit well below the harmonic crest curvature at the slowest
// sweep speed, so peak counts track cadence rather than sensor noise.
fn base_noise(kind: SensorKind) -> f64 {
    match kind {
        SensorKind::Accelerometer => 0.005,
        SensorKind::Gyroscope => 0.004,
        SensorKind::Magnetometer => 0.003,
        SensorKind::Rotation => 0.002,
    }
}

/// Population-level harmonic phase pattern; subjects jitter around it.
fn base_phase(kind: SensorKind, axis: usize, harmonic: usize) -> f64 {
    let axis_phase = [[0.0, 1.1, 2.3], [1.57, 0.6, 2.9], [0.8, 2.0, 0.3]][axis][harmonic];
    let sensor_shift = match kind {
        SensorKind::Accelerometer => 0.0,
        SensorKind::Gyroscope => 0.7,
        SensorKind::Magnetometer => 1.9,
        SensorKind::Rotation => 0.0,
    };
    axis_phase + sensor_shift
}

impl SubjectProfile {
    /// Draws a subject from the population distribution.
    pub fn generate(subject_id: impl Into<String>, seed: u64) -> SubjectProfile {
        Self::generate_scaled(subject_id, seed, 1.0)
    }

    /// `spread` scales how far this subject may sit from the population
    /// center (1.0 = regular population draw).
    pub fn generate_scaled(subject_id: impl Into<String>, seed: u64, spread: f64) -> SubjectProfile {
        let subject_id = subject_id.into();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let height_scale = 1.0 + spread * uniform(&mut rng, -0.08, 0.08);
        let weight_scale = 1.0 + spread * uniform(&mut rng, -0.08, 0.08);
        let base_period_s = 1.4 + spread * uniform(&mut rng, -0.18, 0.18);
        let speed_grid = [1.8, 2.0, 2.2, 2.4, 2.6];
        let natural_speed = speed_grid[rng.random_range(0..speed_grid.len())];
        let phys = height_scale.powf(0.8) * weight_scale.powf(0.4);

        let mut sensors = BTreeMap::new();
        for kind in [SensorKind::Accelerometer, SensorKind::Gyroscope, SensorKind::Magnetometer] {
            let mut axes = Vec::with_capacity(3);
            for axis in 0..3 {
                let idio = 1.0 + spread * uniform(&mut rng, -0.12, 0.12);
                let a1 = base_amp(kind, axis) * phys * idio;
                // 2*r2 + 3*r3 stays below 1 so every cycle has a single
                // peak and peak counts remain purely cadence-driven; the
                // narrow ranges keep waveform shape a population trait
                // rather than an identity signal
                let r2 = uniform(&mut rng, 0.12, 0.16);
                let r3 = uniform(&mut rng, 0.04, 0.07);
                let harmonics = [
                    Harmonic {
                        amp: a1,
                        phase: base_phase(kind, axis, 0) + spread * uniform(&mut rng, -0.08, 0.08),
                    },
                    Harmonic {
                        amp: a1 * r2,
                        phase: base_phase(kind, axis, 1) + spread * uniform(&mut rng, -0.08, 0.08),
                    },
                    Harmonic {
                        amp: a1 * r3,
                        phase: base_phase(kind, axis, 2) + spread * uniform(&mut rng, -0.08, 0.08),
                    },
                ];
                axes.push(AxisModel {
                    harmonics,
                    baseline: base_baseline(kind, axis),
                    drift_amp: 0.03 * a1,
                });
            }
            let noise_sd = base_noise(kind) * (1.0 + spread * uniform(&mut rng, -0.1, 0.1));
            sensors.insert(
                kind,
                SensorModel { axes: [axes[0].clone(), axes[1].clone(), axes[2].clone()], noise_sd },
            );
        }

        SubjectProfile {
            subject_id,
            height_scale,
            weight_scale,
            base_period_s,
            natural: GcatConfig::regular(natural_speed),
            sensors,
            rot_leak: 0.995,
            rot_noise_sd: base_noise(SensorKind::Rotation),
            am_depth: uniform(&mut rng, 0.10, 0.15),
            am_period_s: uniform(&mut rng, 15.0, 25.0),
            cadence_wander: uniform(&mut rng, 0.025, 0.035),
            cadence_wander_period_s: uniform(&mut rng, 25.0, 40.0),
            drift_period_s: uniform(&mut rng, 20.0, 40.0),
            seed,
        }
    }

    /// Gait-cycle frequency (Hz) at a treadmill speed.
    pub fn cycle_freq(&self, speed_mph: f64) -> f64 {
        (1.0 / self.base_period_s) * (speed_mph / self.natural.speed_mph).powf(CADENCE_EXPONENT)
    }
}

/// Weighted physiology distance between two walkers, over height scale,
/// weight scale, and base cycle period. Each term is normalized by the
/// population spread of its parameter.
pub fn physiology_distance(a: &SubjectProfile, b: &SubjectProfile) -> f64 {
    let dh = (a.height_scale - b.height_scale) / 0.1;
    let dw = (a.weight_scale - b.weight_scale) / 0.1;
    let dp = (a.base_period_s - b.base_period_s) / 0.2;
    (dh * dh + dw * dw + dp * dp).sqrt()
}

/// Synthesizes one recording of all four sensors.
///
/// Deterministic given (profile, gcat, duration, rate, seed); samples are
/// quantized to the CSV resolution so disk round trips are exact.
pub fn synthesize(
    profile: &SubjectProfile,
    gcat: &GcatConfig,
    session: Session,
    duration_s: f64,
    sample_rate_hz: f64,
    seed: u64,
) -> Result<Recording> {
    gcat.validate()?;
    if duration_s <= 0.0 || sample_rate_hz <= 0.0 {
        return Err(Error::invalid("duration and sample rate must be positive"));
    }
    let n = (duration_s * sample_rate_hz).round() as usize;
    if n == 0 {
        return Err(Error::invalid("duration too short for one sample"));
    }

    // small session-to-session variation, drawn before anything else
    let mut session_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &["session"]));
    let session_amp = 1.0 + SESSION_AMP_JITTER * gauss(&mut session_rng);
    let session_period = 1.0 + SESSION_PERIOD_JITTER * gauss(&mut session_rng);

    let freq = profile.cycle_freq(gcat.speed_mph) / session_period;
    let amp_speed = (gcat.speed_mph / profile.natural.speed_mph).powf(AMPLITUDE_EXPONENT);

    let dt = 1.0 / sample_rate_hz;

    // body-coherent cadence wander, shared by all sensors: the cycle
    // frequency is slowly modulated so strides are not metronome-exact
    let mut cadence_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &["cadence"]));
    let fm_phase = uniform(&mut cadence_rng, 0.0, 2.0 * PI);
    let mut cycle_phase = Vec::with_capacity(n);
    let mut acc_phase = uniform(&mut cadence_rng, 0.0, 2.0 * PI);
    for i in 0..n {
        cycle_phase.push(acc_phase);
        let t = i as f64 * dt;
        let fm = 1.0
            + profile.cadence_wander
                * (2.0 * PI * t / profile.cadence_wander_period_s + fm_phase).sin();
        acc_phase += 2.0 * PI * freq * fm * dt;
    }

    let mut recording = Recording::new(profile.subject_id.clone(), session);
    let mut gyro_axes: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];

    for (kind, model) in &profile.sensors {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &["sensor", kind.token()]));
        let am_phase = uniform(&mut rng, 0.0, 2.0 * PI);
        let drift_phases = [
            uniform(&mut rng, 0.0, 2.0 * PI),
            uniform(&mut rng, 0.0, 2.0 * PI),
            uniform(&mut rng, 0.0, 2.0 * PI),
        ];
        let mut axes_out: [Vec<f64>; 3] = [
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
        ];
        for i in 0..n {
            let t = i as f64 * dt;
            let am = 1.0 + profile.am_depth * (2.0 * PI * t / profile.am_period_s + am_phase).sin();
            for (axis, out) in axes_out.iter_mut().enumerate() {
                let ax = &model.axes[axis];
                let (axis_mult, phase_shift) = match axis {
                    1 => (gcat.thigh_lift.y_multiplier(), gcat.thigh_lift.y_phase_shift()),
                    2 => (gcat.step_width.z_multiplier(), 0.0),
                    _ => (1.0, 0.0),
                };
                let mut osc = 0.0;
                for (h, harm) in ax.harmonics.iter().enumerate() {
                    let order = (h + 1) as f64;
                    let dominant_mult = if h == 0 { gcat.step_length.amp_multiplier() } else { 1.0 };
                    osc += harm.amp
                        * dominant_mult
                        * (cycle_phase[i] * order + harm.phase + phase_shift).sin();
                }
                let drift = ax.drift_amp
                    * (2.0 * PI * t / profile.drift_period_s + drift_phases[axis]).sin();
                let v = ax.baseline
                    + drift
                    + session_amp * amp_speed * axis_mult * am * osc
                    + model.noise_sd * gauss(&mut rng);
                out.push(v);
            }
        }
        if *kind == SensorKind::Gyroscope {
            gyro_axes = axes_out.clone();
        }
        let samples: Vec<(u64, f64, f64, f64)> = (0..n)
            .map(|i| {
                (
                    (i as f64 * 1000.0 / sample_rate_hz).round() as u64,
                    quantize_sample(axes_out[0][i]),
                    quantize_sample(axes_out[1][i]),
                    quantize_sample(axes_out[2][i]),
                )
            })
            .collect();
        recording
            .traces
            .insert(*kind, SensorTrace::new(*kind, sample_rate_hz, samples)?);
    }

    // rotation vector: leaky integral of the gyroscope plus sensor noise
    let mut rot_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &["sensor", "rot"]));
    let mut state = [0.0f64; 3];
    let mut rot_samples = Vec::with_capacity(n);
    for i in 0..n {
        let mut vals = [0.0f64; 3];
        for axis in 0..3 {
            state[axis] = profile.rot_leak * state[axis] + gyro_axes[axis][i] * dt;
            vals[axis] = state[axis] + profile.rot_noise_sd * gauss(&mut rot_rng);
        }
        rot_samples.push((
            (i as f64 * 1000.0 / sample_rate_hz).round() as u64,
            quantize_sample(vals[0]),
            quantize_sample(vals[1]),
            quantize_sample(vals[2]),
        ));
    }
    recording.traces.insert(
        SensorKind::Rotation,
        SensorTrace::new(SensorKind::Rotation, sample_rate_hz, rot_samples)?,
    );
    Ok(recording)
}

/// Box constraints on the gait configurations an imitator can produce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibleRegion {
    pub speed_min: f64,
    pub speed_max: f64,
    pub step_lengths: Vec<StepLength>,
    pub step_widths: Vec<StepWidth>,
    pub thigh_lifts: Vec<ThighLift>,
}

impl Default for FeasibleRegion {
    fn default() -> Self {
        FeasibleRegion {
            speed_min: SPEED_MIN_MPH,
            speed_max: SPEED_MAX_MPH,
            step_lengths: StepLength::ALL.to_vec(),
            step_widths: StepWidth::ALL.to_vec(),
            thigh_lifts: ThighLift::ALL.to_vec(),
        }
    }
}

impl FeasibleRegion {
    pub fn check(&self, gcat: &GcatConfig) -> Result<()> {
        if gcat.speed_mph < self.speed_min - 1e-9 || gcat.speed_mph > self.speed_max + 1e-9 {
            return Err(Error::Constraint {
                knob: "speed".into(),
                msg: format!(
                    "speed {:.1} outside feasible [{:.1}, {:.1}]",
                    gcat.speed_mph, self.speed_min, self.speed_max
                ),
            });
        }
        if !self.step_lengths.contains(&gcat.step_length) {
            return Err(Error::Constraint {
                knob: "step_length".into(),
                msg: format!("step length {} not achievable", gcat.step_length.token()),
            });
        }
        if !self.step_widths.contains(&gcat.step_width) {
            return Err(Error::Constraint {
                knob: "step_width".into(),
                msg: format!("step width {} not achievable", gcat.step_width.token()),
            });
        }
        if !self.thigh_lifts.contains(&gcat.thigh_lift) {
            return Err(Error::Constraint {
                knob: "thigh_lift".into(),
                msg: format!("thigh lift {} not achievable", gcat.thigh_lift.token()),
            });
        }
        Ok(())
    }

    /// Clamps a configuration into the region (speed to the box, missing
    /// categorical levels to regular).
    pub fn clamp(&self, gcat: &GcatConfig) -> GcatConfig {
        GcatConfig {
            speed_mph: gcat.speed_mph.clamp(self.speed_min, self.speed_max),
            step_length: if self.step_lengths.contains(&gcat.step_length) {
                gcat.step_length
            } else {
                StepLength::Regular
            },
            step_width: if self.step_widths.contains(&gcat.step_width) {
                gcat.step_width
            } else {
                StepWidth::Regular
            },
            thigh_lift: if self.thigh_lifts.contains(&gcat.thigh_lift) {
                gcat.thigh_lift
            } else {
                ThighLift::Regular
            },
        }
    }
}

/// An imitator: a walker plus the feasible region of configurations they
/// can hold on a treadmill.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImitatorModel {
    pub profile: SubjectProfile,
    pub feasible: FeasibleRegion,
}

impl ImitatorModel {
    pub fn new(profile: SubjectProfile, feasible: FeasibleRegion) -> Result<ImitatorModel> {
        feasible.check(&profile.natural).map_err(|e| {
            Error::invalid(format!("natural gait outside feasible region: {e}"))
        })?;
        Ok(ImitatorModel { profile, feasible })
    }

    pub fn from_profile(profile: SubjectProfile) -> ImitatorModel {
        ImitatorModel { profile, feasible: FeasibleRegion::default() }
    }

    /// Synthesizes after checking the configuration is feasible.
    pub fn synthesize(
        &self,
        gcat: &GcatConfig,
        session: Session,
        duration_s: f64,
        sample_rate_hz: f64,
        seed: u64,
    ) -> Result<Recording> {
        self.feasible.check(gcat)?;
        synthesize(&self.profile, gcat, session, duration_s, sample_rate_hz, seed)
    }
}

/// Derives an imitator physically close to the target: same natural gait,
/// slightly jittered physiology and signal parameters.
pub fn matched_imitator(target: &SubjectProfile, imitator_id: &str, seed: u64, jitter: f64) -> ImitatorModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut profile = target.clone();
    profile.subject_id = imitator_id.to_string();
    profile.seed = seed;
    profile.height_scale *= 1.0 + jitter * uniform(&mut rng, -1.0, 1.0);
    profile.weight_scale *= 1.0 + jitter * uniform(&mut rng, -1.0, 1.0);
    profile.base_period_s *= 1.0 + jitter * uniform(&mut rng, -1.0, 1.0);
    for model in profile.sensors.values_mut() {
        for axis in &mut model.axes {
            for h in &mut axis.harmonics {
                h.amp *= 1.0 + jitter * uniform(&mut rng, -1.0, 1.0);
                h.phase += jitter * uniform(&mut rng, -1.0, 1.0);
            }
        }
    }
    ImitatorModel::from_profile(profile)
}

/// One calibration run: the configuration it was collected at and the data.
#[derive(Debug, Clone)]
pub struct CalibrationRun {
    pub tag: String,
    pub gcat: GcatConfig,
    pub recording: Recording,
}

/// The 15-run calibration protocol: nine speeds at regular everything,
/// then each categorical knob at its two off-regular levels with all other
/// knobs regular. Configurations are clamped into the imitator's feasible
/// region.
pub fn calibration_sweep(
    imitator: &ImitatorModel,
    duration_s: f64,
    sample_rate_hz: f64,
    seed: u64,
) -> Result<Vec<CalibrationRun>> {
    let natural_speed = imitator.profile.natural.speed_mph;
    let mut configs: Vec<(String, GcatConfig)> = Vec::with_capacity(15);
    for k in 0..9 {
        let speed = (12 + 2 * k) as f64 / 10.0;
        configs.push((format!("speed_{speed:.1}"), GcatConfig::regular(speed)));
    }
    for sl in [StepLength::Small, StepLength::Large] {
        let mut g = GcatConfig::regular(natural_speed);
        g.step_length = sl;
        configs.push((format!("sl_{}", sl.token()), g));
    }
    for sw in [StepWidth::Close, StepWidth::Wide] {
        let mut g = GcatConfig::regular(natural_speed);
        g.step_width = sw;
        configs.push((format!("sw_{}", sw.token()), g));
    }
    for tl in [ThighLift::Front, ThighLift::Back] {
        let mut g = GcatConfig::regular(natural_speed);
        g.thigh_lift = tl;
        configs.push((format!("tl_{}", tl.token()), g));
    }

    let mut runs = Vec::with_capacity(configs.len());
    for (tag, gcat) in configs {
        let clamped = imitator.feasible.clamp(&gcat);
        let recording = imitator.synthesize(
            &clamped,
            Session::Calibration,
            duration_s,
            sample_rate_hz,
            derive_seed(seed, &["calibration", &tag]),
        )?;
        runs.push(CalibrationRun { tag, gcat: clamped, recording });
    }
    Ok(runs)
}
