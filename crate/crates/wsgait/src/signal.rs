//! Sensor time-series representation, noise filtering, magnitude derivation,
//! and fixed-length sliding-window segmentation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default smoothing window (samples) for the moving-average filter.
pub const DEFAULT_SMOOTH_WINDOW: usize = 5;
/// Default frame length in seconds.
pub const DEFAULT_FRAME_LEN_S: f64 = 10.0;
/// Default frame overlap in seconds.
pub const DEFAULT_OVERLAP_S: f64 = 5.0;
/// Default sample rate for synthetic data.
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 50.0;

/// The four wearable sensors a recording may carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SensorKind {
    Accelerometer,
    Gyroscope,
    Magnetometer,
    Rotation,
}

impl SensorKind {
    pub const ALL: [SensorKind; 4] = [
        SensorKind::Accelerometer,
        SensorKind::Gyroscope,
        SensorKind::Magnetometer,
        SensorKind::Rotation,
    ];

    /// Three-letter token used in the recording CSV schema.
    pub fn token(self) -> &'static str {
        match self {
            SensorKind::Accelerometer => "acc",
            SensorKind::Gyroscope => "gyr",
            SensorKind::Magnetometer => "mag",
            SensorKind::Rotation => "rot",
        }
    }

    /// Single-letter code used in sensor-combination labels.
    pub fn letter(self) -> char {
        match self {
            SensorKind::Accelerometer => 'a',
            SensorKind::Gyroscope => 'g',
            SensorKind::Magnetometer => 'm',
            SensorKind::Rotation => 'r',
        }
    }

    pub fn from_token(tok: &str) -> Option<SensorKind> {
        match tok {
            "acc" => Some(SensorKind::Accelerometer),
            "gyr" => Some(SensorKind::Gyroscope),
            "mag" => Some(SensorKind::Magnetometer),
            "rot" => Some(SensorKind::Rotation),
            _ => None,
        }
    }

    pub fn from_letter(c: char) -> Option<SensorKind> {
        match c {
            'a' => Some(SensorKind::Accelerometer),
            'g' => Some(SensorKind::Gyroscope),
            'm' => Some(SensorKind::Magnetometer),
            'r' => Some(SensorKind::Rotation),
            _ => None,
        }
    }
}

/// Which phase of the protocol a recording belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Session {
    Training,
    Testing,
    Mimicry,
    Calibration,
}

impl Session {
    pub fn token(self) -> &'static str {
        match self {
            Session::Training => "training",
            Session::Testing => "testing",
            Session::Mimicry => "mimicry",
            Session::Calibration => "calibration",
        }
    }

    pub fn from_token(tok: &str) -> Option<Session> {
        match tok {
            "training" => Some(Session::Training),
            "testing" => Some(Session::Testing),
            "mimicry" => Some(Session::Mimicry),
            "calibration" => Some(Session::Calibration),
            _ => None,
        }
    }
}

/// One sensor's tri-axial samples with millisecond timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorTrace {
    pub kind: SensorKind,
    pub sample_rate_hz: f64,
    /// (t_ms, x, y, z) with strictly increasing t_ms.
    pub samples: Vec<(u64, f64, f64, f64)>,
}

impl SensorTrace {
    pub fn new(kind: SensorKind, sample_rate_hz: f64, samples: Vec<(u64, f64, f64, f64)>) -> Result<Self> {
        if sample_rate_hz <= 0.0 {
            return Err(Error::invalid("sample_rate_hz must be positive"));
        }
        for w in samples.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::invalid(format!(
                    "timestamps must be strictly increasing (t={} after t={})",
                    w[1].0, w[0].0
                )));
            }
        }
        Ok(SensorTrace { kind, sample_rate_hz, samples })
    }

    /// Trace duration in seconds, counted as samples over the nominal rate.
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    /// Resamples onto a uniform grid at the declared rate via linear
    /// interpolation. Input already on the grid passes through unchanged.
    pub fn resample(&self) -> ResampledTrace {
        let rate = self.sample_rate_hz;
        if self.samples.is_empty() {
            return ResampledTrace { kind: self.kind, sample_rate_hz: rate, start_ms: 0, x: vec![], y: vec![], z: vec![] };
        }
        let t0 = self.samples[0].0;
        let t_last = self.samples[self.samples.len() - 1].0;
        let span_ms = (t_last - t0) as f64;
        let n = (span_ms * rate / 1000.0).floor() as usize + 1;
        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        let mut z = Vec::with_capacity(n);
        let mut seg = 0usize; // index of the sample at or before the grid point
        for k in 0..n {
            let t = t0 as f64 + k as f64 * 1000.0 / rate;
            while seg + 1 < self.samples.len() && (self.samples[seg + 1].0 as f64) <= t {
                seg += 1;
            }
            let (ta, xa, ya, za) = self.samples[seg];
            if seg + 1 == self.samples.len() {
                x.push(xa);
                y.push(ya);
                z.push(za);
            } else {
                let (tb, xb, yb, zb) = self.samples[seg + 1];
                let u = (t - ta as f64) / (tb - ta) as f64;
                if u <= 0.0 {
                    x.push(xa);
                    y.push(ya);
                    z.push(za);
                } else {
                    x.push(xa + u * (xb - xa));
                    y.push(ya + u * (yb - ya));
                    z.push(za + u * (zb - za));
                }
            }
        }
        ResampledTrace { kind: self.kind, sample_rate_hz: rate, start_ms: t0, x, y, z }
    }
}

/// A trace on a uniform sample grid, split into per-axis series.
#[derive(Debug, Clone)]
pub struct ResampledTrace {
    pub kind: SensorKind,
    pub sample_rate_hz: f64,
    pub start_ms: u64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl ResampledTrace {
    /// Applies the moving-average filter to each axis in place.
    pub fn smooth(&mut self, window: usize) -> Result<()> {
        self.x = moving_average(&self.x, window)?;
        self.y = moving_average(&self.y, window)?;
        self.z = moving_average(&self.z, window)?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// All sensor traces of one subject-session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recording {
    pub subject_id: String,
    pub session: Session,
    pub traces: BTreeMap<SensorKind, SensorTrace>,
}

impl Recording {
    pub fn new(subject_id: impl Into<String>, session: Session) -> Self {
        Recording { subject_id: subject_id.into(), session, traces: BTreeMap::new() }
    }

    pub fn sensors(&self) -> Vec<SensorKind> {
        self.traces.keys().copied().collect()
    }

    /// Shortest trace duration across sensors, in seconds.
    pub fn duration_s(&self) -> f64 {
        self.traces
            .values()
            .map(|t| t.duration_s())
            .fold(f64::INFINITY, f64::min)
    }
}

/// One 10-second (by default) window of all sensors, with the derived
/// magnitude component.
#[derive(Debug, Clone)]
pub struct Frame {
    pub subject_id: String,
    pub session: Session,
    pub start_ms: u64,
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    pub sensors: BTreeMap<SensorKind, ComponentSeries>,
}

/// The four per-sensor component series of a frame: x, y, z and the
/// pointwise magnitude m.
#[derive(Debug, Clone)]
pub struct ComponentSeries {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub m: Vec<f64>,
}

impl ComponentSeries {
    pub fn component(&self, c: Component) -> &[f64] {
        match c {
            Component::X => &self.x,
            Component::Y => &self.y,
            Component::Z => &self.z,
            Component::M => &self.m,
        }
    }
}

/// Signal component within a senor trace: the three axes plus magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Component {
    X,
    Y,
    Z,
    M,
}

impl Component {
    pub const ALL: [Component; 4] = [Component::X, Component::Y, Component::Z, Component::M];

    pub fn suffix(self) -> &'static str {
        match self {
            Component::X => "x",
            Component::Y => "y",
            Component::Z => "z",
            Component::M => "m",
        }
    }
}

/// Euclidean norm of one tri-axial sample.
pub fn magnitude(x: f64, y: f64, z: f64) -> f64 {
    (x * x + y * y + z * z).sqrt()
}

/// Simple moving average with an odd window; edge windows are clipped to
/// the series bounds, so output length equals input length.
pub fn moving_average(series: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 || window % 2 == 0 {
        return Err(Error::invalid(format!("window must be odd and positive, got {window}")));
    }
    if window > series.len() {
        return Err(Error::invalid(format!(
            "window {} exceeds series length {}",
            window,
            series.len()
        )));
    }
    if window == 1 {
        return Ok(series.to_vec());
    }
    let half = window / 2;
    let n = series.len();
    let mut out = Vec::with_capacity(n);
    // prefix sums keep this O(n)
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for &v in series {
        prefix.push(prefix.last().unwrap() + v);
    }
    for i in 0..n {
        let lo = i.saturating_sub(half);
        let hi = usize::min(i + half, n - 1);
        let sum: f64 = prefix[hi + 1] - prefix[lo];
        out.push(sum / (hi - lo + 1) as f64);
    }
    Ok(out)
}

/// Parameters of the preprocessing + segmentation pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameParams {
    pub frame_len_s: f64,
    pub overlap_s: f64,
    pub smooth_window: usize,
}

impl Default for FrameParams {
    fn default() -> Self {
        FrameParams {
            frame_len_s: DEFAULT_FRAME_LEN_S,
            overlap_s: DEFAULT_OVERLAP_S,
            smooth_window: DEFAULT_SMOOTH_WINDOW,
        }
    }
}

impl FrameParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.frame_len_s > 0.0) {
            return Err(Error::invalid("frame_len_s must be positive"));
        }
        if self.overlap_s < 0.0 || self.overlap_s >= self.frame_len_s {
            return Err(Error::invalid("overlap_s must satisfy 0 <= overlap < frame_len"));
        }
        Ok(())
    }
}

/// Cuts a recording into fixed-length overlapping frames.
///
/// Traces are resampled to their declared rate and smoothed first; the
/// magnitude component is derived after smoothing. A recording shorter
/// than one frame yields an empty sequence. Trailing samples that do not
/// fill a frame are discarded.
pub fn segment(recording: &Recording, params: &FrameParams) -> Result<Vec<Frame>> {
    params.validate()?;
    if recording.traces.is_empty() {
        return Err(Error::invalid("recording has no traces"));
    }
    for (kind, trace) in &recording.traces {
        if trace.samples.is_empty() {
            return Err(Error::invalid(format!("{} trace is empty", kind.token())));
        }
    }
    let rate = recording.traces.values().next().unwrap().sample_rate_hz;
    for trace in recording.traces.values() {
        if (trace.sample_rate_hz - rate).abs() > 1e-9 {
            return Err(Error::invalid("traces of one recording must share a sample rate"));
        }
    }

    let frame_samples = (params.frame_len_s * rate).round() as usize;
    let step_samples = ((params.frame_len_s - params.overlap_s) * rate).round() as usize;
    if frame_samples < 2 || step_samples == 0 {
        return Err(Error::invalid("frame too short for the sample rate"));
    }

    let mut resampled: Vec<ResampledTrace> = Vec::new();
    for trace in recording.traces.values() {
        let mut r = trace.resample();
        if params.smooth_window > 1 {
            if params.smooth_window > r.len() {
                return Err(Error::invalid(format!(
                    "smooth window {} exceeds trace length {}",
                    params.smooth_window,
                    r.len()
                )));
            }
            r.smooth(params.smooth_window)?;
        }
        resampled.push(r);
    }

    let min_len = resampled.iter().map(|r| r.len()).min().unwrap();
    if min_len < frame_samples {
        return Ok(Vec::new());
    }
    let n_frames = (min_len - frame_samples) / step_samples + 1;
    let start0 = resampled.iter().map(|r| r.start_ms).min().unwrap();

    let mut frames = Vec::with_capacity(n_frames);
    for f in 0..n_frames {
        let begin = f * step_samples;
        let end = begin + frame_samples;
        let mut sensors = BTreeMap::new();
        for r in &resampled {
            let x = r.x[begin..end].to_vec();
            let y = r.y[begin..end].to_vec();
            let z = r.z[begin..end].to_vec();
            let m: Vec<f64> = x
                .iter()
                .zip(&y)
                .zip(&z)
                .map(|((&xv, &yv), &zv)| magnitude(xv, yv, zv))
                .collect();
            sensors.insert(r.kind, ComponentSeries { x, y, z, m });
        }
        frames.push(Frame {
            subject_id: recording.subject_id.clone(),
            session: recording.session,
            start_ms: start0 + ((begin as f64) * 1000.0 / rate).round() as u64,
            duration_s: params.frame_len_s,
            sample_rate_hz: rate,
            sensors,
        });
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn uniform_trace(kind: SensorKind, rate: f64, n: usize) -> SensorTrace {
        let samples = (0..n)
            .map(|i| {
                let t = (i as f64 * 1000.0 / rate).round() as u64;
                let v = (i as f64 * 0.1).sin();
                (t, v, v * 0.5, v - 1.0)
            })
            .collect();
        SensorTrace::new(kind, rate, samples).unwrap()
    }

    #[test]
    fn magnitude_examples() {
        assert_relative_eq!(magnitude(3.0, 4.0, 0.0), 5.0);
        assert_relative_eq!(magnitude(0.0, 0.0, 0.0), 0.0);
        assert_relative_eq!(magnitude(1.0, 2.0, 2.0), 3.0);
    }

    #[test]
    fn moving_average_examples() {
        assert_eq!(moving_average(&[5.0, 5.0, 5.0, 5.0], 3).unwrap(), vec![5.0, 5.0, 5.0, 5.0]);
        let out = moving_average(&[0.0, 3.0, 0.0], 3).unwrap();
        assert_relative_eq!(out[0], 1.5);
        assert_relative_eq!(out[1], 1.0);
        assert_relative_eq!(out[2], 1.5);
        assert_eq!(
            moving_average(&[1.0, 2.0, 3.0, 4.0, 5.0], 1).unwrap(),
            vec![1.0, 2.0, 3.0, 4.0, 5.0]
        );
    }

    #[test]
    fn moving_average_rejects_oversized_window() {
        assert!(moving_average(&[1.0, 2.0], 3).is_err());
        assert!(moving_average(&[1.0, 2.0, 3.0], 2).is_err());
    }

    #[test]
    fn segment_counts_match_formula() {
        let params = FrameParams { smooth_window: 1, ..FrameParams::default() };
        for (secs, expect) in [(60usize, 11usize), (10, 1), (9, 0), (120, 23)] {
            let mut rec = Recording::new("s", Session::Training);
            rec.traces.insert(
                SensorKind::Accelerometer,
                uniform_trace(SensorKind::Accelerometer, 50.0, secs * 50),
            );
            let frames = segment(&rec, &params).unwrap();
            assert_eq!(frames.len(), expect, "{secs}s");
        }
    }

    #[test]
    fn frame_magnitude_is_pointwise_norm() {
        let mut rec = Recording::new("s", Session::Training);
        rec.traces.insert(
            SensorKind::Gyroscope,
            uniform_trace(SensorKind::Gyroscope, 50.0, 600),
        );
        let frames = segment(&rec, &FrameParams::default()).unwrap();
        let cs = &frames[0].sensors[&SensorKind::Gyroscope];
        for i in 0..cs.x.len() {
            let m = magnitude(cs.x[i], cs.y[i], cs.z[i]);
            assert!((cs.m[i] - m).abs() < 1e-9);
        }
    }

    #[test]
    fn resample_is_identity_on_grid() {
        let tr = uniform_trace(SensorKind::Accelerometer, 50.0, 100);
        let r = tr.resample();
        assert_eq!(r.len(), 100);
        for (i, s) in tr.samples.iter().enumerate() {
            assert_eq!(r.x[i], s.1);
        }
    }

    #[test]
    fn resample_interpolates_irregular_input() {
        // 10 Hz declared, but one gap: points at 0,100,300 ms
        let tr = SensorTrace::new(
            SensorKind::Accelerometer,
            10.0,
            vec![(0, 0.0, 0.0, 0.0), (100, 1.0, 0.0, 0.0), (300, 3.0, 0.0, 0.0)],
        )
        .unwrap();
        let r = tr.resample();
        assert_eq!(r.len(), 4);
        assert_relative_eq!(r.x[2], 2.0); // 200 ms, halfway between 1 and 3
    }

    proptest! {
        #[test]
        fn segmentation_count_matches_brute_force(
            n in 2usize..4000,
            frame in 10usize..600,
            step in 1usize..300,
        ) {
            prop_assume!(step <= frame);
            // brute-force enumeration of complete windows
            let mut count = 0usize;
            let mut begin = 0usize;
            while begin + frame <= n {
                count += 1;
                begin += step;
            }
            let formula = if n >= frame { (n - frame) / step + 1 } else { 0 };
            prop_assert_eq!(count, formula);
        }

        #[test]
        fn moving_average_commutes_with_additive_constant(
            s in proptest::collection::vec(-100.0f64..100.0, 5..60),
            c in -50.0f64..50.0,
        ) {
            let shifted: Vec<f64> = s.iter().map(|v| v + c).collect();
            let a = moving_average(&s, 5).unwrap();
            let b = moving_average(&shifted, 5).unwrap();
            for (av, bv) in a.iter().zip(&b) {
                prop_assert!((av + c - bv).abs() < 1e-9);
            }
        }

        #[test]
        fn moving_average_idempotent_on_constants(
            c in -100.0f64..100.0,
            n in 5usize..40,
        ) {
            let s = vec![c; n];
            let out = moving_average(&s, 5).unwrap();
            for v in out {
                prop_assert!((v - c).abs() < 1e-12);
            }
        }
    }
}
