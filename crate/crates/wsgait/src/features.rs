//! Frame-level feature extraction: the 34-per-component authentication
//! catalog (136 per sensor) and the 17-item attack feature list.

use std::cell::RefCell;
use std::collections::BTreeMap;

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{Component, Frame, SensorKind};

/// Number of features per signal component.
pub const FEATURES_PER_COMPONENT: usize = 34;
/// Number of features per sensor (four components).
pub const FEATURES_PER_SENSOR: usize = 136;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureKind {
    Time,
    Frequency,
}

/// Per-component feature names in catalog order. The `bin_counts*` block
/// is generated; everything else is listed explicitly.
pub const SCALAR_TIME_FEATURES: [&str; 14] = [
    "amean",
    "stddev",
    "meanabschange",
    "mad",
    "skewness",
    "kurtosis",
    "mean_energy",
    "ncmean",
    "npeaks",
    "fquantile",
    "squantile",
    "tquantile",
    "strikebelowmean",
    "strikeabovemean",
];

pub const FREQUENCY_FEATURES: [&str; 4] =
    ["fftc_fquantile", "fftc_squantile", "fftc_tquantile", "fftc_std_dev"];

/// The 34 per-component feature names in catalog order.
pub fn component_feature_names() -> Vec<String> {
    let mut names: Vec<String> = SCALAR_TIME_FEATURES.iter().map(|s| s.to_string()).collect();
    for b in 1..=16 {
        names.push(format!("bin_counts{b}"));
    }
    names.extend(FREQUENCY_FEATURES.iter().map(|s| s.to_string()));
    names
}

/// One catalog entry: a named feature of one sensor component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    /// Globally unique id, `<sensor>_<feat>_<component>` (e.g. `acc_npeaks_x`).
    pub id: String,
    pub sensor: SensorKind,
    pub component: Component,
    pub feat: String,
    pub kind: FeatureKind,
}

/// Ordered feature catalog for a set of sensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureCatalog {
    pub entries: Vec<CatalogEntry>,
}

impl FeatureCatalog {
    /// Catalog over the given sensors, in sensor (a,g,m,r) then component
    /// (x,y,z,m) then feature order. This order is the tie-break order for
    /// feature selection.
    pub fn for_sensors(sensors: &[SensorKind]) -> FeatureCatalog {
        let names = component_feature_names();
        let mut entries = Vec::with_capacity(sensors.len() * FEATURES_PER_SENSOR);
        for &sensor in SensorKind::ALL.iter().filter(|s| sensors.contains(s)) {
            for component in Component::ALL {
                for (fi, feat) in names.iter().enumerate() {
                    let kind = if fi >= 30 { FeatureKind::Frequency } else { FeatureKind::Time };
                    entries.push(CatalogEntry {
                        id: format!("{}_{}_{}", sensor.token(), feat, component.suffix()),
                        sensor,
                        component,
                        feat: feat.clone(),
                        kind,
                    });
                }
            }
        }
        FeatureCatalog { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.id.clone()).collect()
    }

    /// Indices of the entries whose sensor is in `sensors`, preserving order.
    pub fn indices_for_sensors(&self, sensors: &[SensorKind]) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| sensors.contains(&e.sensor))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Class label of a feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Genuine,
    Impostor,
}

/// Named feature values for one frame, with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub subject_id: String,
    pub session: crate::signal::Session,
    pub start_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub label: Option<Label>,
    pub values: BTreeMap<String, f64>,
}

thread_local! {
    static FFT_PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Amplitude spectrum |X_k| for k = 1..=n/2 (DC excluded).
fn amplitude_spectrum(window: &[f64]) -> Vec<f64> {
    let n = window.len();
    let mut buf: Vec<Complex<f64>> = window.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FFT_PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_forward(n);
        fft.process(&mut buf);
    });
    (1..=n / 2).map(|k| buf[k].norm()).collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Population standard deviation.
fn stddev(v: &[f64], mu: f64) -> f64 {
    (v.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / v.len() as f64).sqrt()
}

/// Linear-interpolation empirical quantile over a pre-sorted slice.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = q * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Indices of peaks: strict local maxima, with plateaus counted once at
/// their left edge. Endpoints are never peaks.
pub fn peak_indices(v: &[f64]) -> Vec<usize> {
    let n = v.len();
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 <= n.saturating_sub(1) {
        if v[i] > v[i - 1] {
            let mut j = i;
            while j + 1 < n && v[j + 1] == v[i] {
                j += 1;
            }
            if j + 1 < n && v[j + 1] < v[i] {
                peaks.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
}

/// Sign changes of (v - mean); exact-mean samples inherit the previous sign.
fn mean_crossings(v: &[f64], mu: f64) -> usize {
    let mut prev: i8 = 0;
    let mut count = 0usize;
    for &x in v {
        let d = x - mu;
        let mut s: i8 = if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            0
        };
        if s == 0 {
            s = prev;
        }
        if prev != 0 && s != 0 && s != prev {
            count += 1;
        }
        if s != 0 {
            prev = s;
        }
    }
    count
}

fn longest_run(v: &[f64], pred: impl Fn(f64) -> bool) -> usize {
    let mut best = 0usize;
    let mut run = 0usize;
    for &x in v {
        if pred(x) {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    best
}

/// Counts into 16 equal-width bins over [min, max] of the window itself.
/// The maximum lands in bin 16; a constant window puts everything in bin 1.
fn bin_counts(v: &[f64]) -> [f64; 16] {
    let mn = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let mx = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut bins = [0.0f64; 16];
    if mx == mn {
        bins[0] = v.len() as f64;
        return bins;
    }
    let width = (mx - mn) / 16.0;
    for &x in v {
        let idx = (((x - mn) / width).floor() as usize).min(15);
        bins[idx] += 1.0;
    }
    bins
}

/// The 34 catalog features of one component window, in catalog order.
pub fn extract_component_features(window: &[f64], _sample_rate_hz: f64) -> Result<[f64; FEATURES_PER_COMPONENT]> {
    if window.len() < 2 {
        return Err(Error::invalid(format!(
            "component window must have at least 2 samples, got {}",
            window.len()
        )));
    }
    let n = window.len() as f64;
    let mu = mean(window);
    let sd = stddev(window, mu);

    let meanabschange =
        window.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>() / (n - 1.0);
    let mad = window.iter().map(|x| (x - mu).abs()).sum::<f64>() / n;
    let (skewness, kurtosis) = if sd == 0.0 {
        (0.0, 0.0)
    } else {
        let m3 = window.iter().map(|x| (x - mu).powi(3)).sum::<f64>() / n;
        let m4 = window.iter().map(|x| (x - mu).powi(4)).sum::<f64>() / n;
        (m3 / sd.powi(3), m4 / sd.powi(4) - 3.0)
    };
    let mean_energy = window.iter().map(|x| x * x).sum::<f64>() / n;
    let ncmean = mean_crossings(window, mu) as f64;
    let npeaks = peak_indices(window).len() as f64;

    let mut sorted = window.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q1 = quantile_sorted(&sorted, 0.25);
    let q2 = quantile_sorted(&sorted, 0.50);
    let q3 = quantile_sorted(&sorted, 0.75);

    let strike_below = longest_run(window, |x| x < mu) as f64;
    let strike_above = longest_run(window, |x| x > mu) as f64;
    let bins = bin_counts(window);

    let amps = amplitude_spectrum(window);
    let (fq1, fq2, fq3, fsd) = if amps.is_empty() {
        (0.0, 0.0, 0.0, 0.0)
    } else {
        let mut sorted_amps = amps.clone();
        sorted_amps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let fmu = mean(&amps);
        (
            quantile_sorted(&sorted_amps, 0.25),
            quantile_sorted(&sorted_amps, 0.50),
            quantile_sorted(&sorted_amps, 0.75),
            stddev(&amps, fmu),
        )
    };

    let mut out = [0.0f64; FEATURES_PER_COMPONENT];
    out[0] = mu;
    out[1] = sd;
    out[2] = meanabschange;
    out[3] = mad;
    out[4] = skewness;
    out[5] = kurtosis;
    out[6] = mean_energy;
    out[7] = ncmean;
    out[8] = npeaks;
    out[9] = q1;
    out[10] = q2;
    out[11] = q3;
    out[12] = strike_below;
    out[13] = strike_above;
    out[14..30].copy_from_slice(&bins);
    out[30] = fq1;
    out[31] = fq2;
    out[32] = fq3;
    out[33] = fsd;
    Ok(out)
}

/// Feature row of one frame, aligned with `FeatureCatalog::for_sensors`
/// over the frame's sensors.
pub fn extract_frame_features(frame: &Frame) -> Result<Vec<f64>> {
    let mut values = Vec::with_capacity(frame.sensors.len() * FEATURES_PER_SENSOR);
    for series in frame.sensors.values() {
        for component in Component::ALL {
            let feats = extract_component_features(series.component(component), frame.sample_rate_hz)?;
            values.extend_from_slice(&feats);
        }
    }
    Ok(values)
}

/// Builds a named [`FeatureVector`] from a frame.
pub fn feature_vector(frame: &Frame, label: Option<Label>) -> Result<FeatureVector> {
    let sensors = frame.sensors.keys().copied().collect::<Vec<_>>();
    let catalog = FeatureCatalog::for_sensors(&sensors);
    let values = extract_frame_features(frame)?;
    let map = catalog
        .entries
        .iter()
        .zip(values)
        .map(|(e, v)| (e.id.clone(), v))
        .collect();
    Ok(FeatureVector {
        subject_id: frame.subject_id.clone(),
        session: frame.session,
        start_ms: frame.start_ms,
        label,
        values: map,
    })
}

/// The 17 attack features, in the order the spoofing loop scans them.
pub const ATTACK_FEATURE_NAMES: [&str; 17] = [
    "abs_x", "rng_x", "nop_x", "api_x", "bap_x", "rng_y", "nop_y", "eng_y", "sef_x", "bap_y",
    "sef_y", "nop_z", "bap_z", "sef_z", "mean_m", "api_m", "rng_m",
];

/// Values of the 17 attack features for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackFeatureSet {
    pub values: [f64; 17],
}

impl AttackFeatureSet {
    pub fn get(&self, name: &str) -> Option<f64> {
        ATTACK_FEATURE_NAMES
            .iter()
            .position(|&n| n == name)
            .map(|i| self.values[i])
    }

    pub fn index_of(name: &str) -> Option<usize> {
        ATTACK_FEATURE_NAMES.iter().position(|&n| n == name)
    }
}

impl Serialize for AttackFeatureSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let map: BTreeMap<&str, f64> = ATTACK_FEATURE_NAMES
            .iter()
            .copied()
            .zip(self.values.iter().copied())
            .collect();
        map.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for AttackFeatureSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let map = BTreeMap::<String, f64>::deserialize(deserializer)?;
        let mut values = [0.0f64; 17];
        for (i, name) in ATTACK_FEATURE_NAMES.iter().enumerate() {
            values[i] = *map
                .get(*name)
                .ok_or_else(|| serde::de::Error::custom(format!("missing attack feature {name}")))?;
        }
        Ok(AttackFeatureSet { values })
    }
}

/// Sum of absolute values.
fn abs_sum(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Max minus min.
fn range(v: &[f64]) -> f64 {
    let mn = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let mx = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    mx - mn
}

/// Mean time between consecutive peaks, in seconds; 0 with fewer than two peaks.
fn avg_peak_interval(v: &[f64], rate: f64) -> f64 {
    let peaks = peak_indices(v);
    if peaks.len() < 2 {
        return 0.0;
    }
    let span = (peaks[peaks.len() - 1] - peaks[0]) as f64 / rate;
    span / (peaks.len() - 1) as f64
}

/// Lowest frequency below which 95% of spectral power (DC excluded) lies.
fn spectral_edge_freq(v: &[f64], rate: f64) -> f64 {
    let amps = amplitude_spectrum(v);
    let total: f64 = amps.iter().map(|a| a * a).sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mut cum = 0.0;
    for (i, a) in amps.iter().enumerate() {
        cum += a * a;
        if cum >= 0.95 * total {
            return (i + 1) as f64 * rate / v.len() as f64;
        }
    }
    amps.len() as f64 * rate / v.len() as f64
}

/// Fraction of spectral power (DC excluded) in the 0.5-3.0 Hz locomotion band.
fn band_power(v: &[f64], rate: f64) -> f64 {
    let amps = amplitude_spectrum(v);
    let total: f64 = amps.iter().map(|a| a * a).sum();
    if total <= 0.0 {
        return 0.0;
    }
    let n = v.len() as f64;
    let mut band = 0.0;
    for (i, a) in amps.iter().enumerate() {
        let f = (i + 1) as f64 * rate / n;
        if (0.5..=3.0).contains(&f) {
            band += a * a;
        }
    }
    band / total
}

/// Extracts the 17 attack features from a frame's accelerometer components.
pub fn extract_attack_features(frame: &Frame) -> Result<AttackFeatureSet> {
    let acc = frame
        .sensors
        .get(&SensorKind::Accelerometer)
        .ok_or_else(|| Error::invalid("frame has no accelerometer trace"))?;
    let rate = frame.sample_rate_hz;
    let (x, y, z, m) = (&acc.x, &acc.y, &acc.z, &acc.m);
    if x.len() < 2 {
        return Err(Error::invalid("accelerometer window too short"));
    }
    let values = [
        abs_sum(x),
        range(x),
        peak_indices(x).len() as f64,
        avg_peak_interval(x, rate),
        band_power(x, rate),
        range(y),
        peak_indices(y).len() as f64,
        y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64,
        spectral_edge_freq(x, rate),
        band_power(y, rate),
        spectral_edge_freq(y, rate),
        peak_indices(z).len() as f64,
        band_power(z, rate),
        spectral_edge_freq(z, rate),
        mean(m),
        avg_peak_interval(m, rate),
        range(m),
    ];
    for (i, v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::invalid(format!(
                "attack feature {} is not finite",
                ATTACK_FEATURE_NAMES[i]
            )));
        }
    }
    Ok(AttackFeatureSet { values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{ComponentSeries, Session};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn frame_from_acc(x: Vec<f64>, y: Vec<f64>, z: Vec<f64>, rate: f64) -> Frame {
        let m = x
            .iter()
            .zip(&y)
            .zip(&z)
            .map(|((&a, &b), &c)| crate::signal::magnitude(a, b, c))
            .collect();
        let mut sensors = BTreeMap::new();
        sensors.insert(SensorKind::Accelerometer, ComponentSeries { x, y, z, m });
        Frame {
            subject_id: "t".into(),
            session: Session::Training,
            start_ms: 0,
            duration_s: 10.0,
            sample_rate_hz: rate,
            sensors,
        }
    }

    #[test]
    fn constant_window_conventions() {
        let f = extract_component_features(&[2.0, 2.0, 2.0, 2.0], 50.0).unwrap();
        assert_eq!(f[1], 0.0); // stddev
        assert_eq!(f[2], 0.0); // meanabschange
        assert_eq!(f[8], 0.0); // npeaks
        assert_eq!(f[4], 0.0); // skewness (degenerate convention)
        let bins = &f[14..30];
        assert_eq!(bins[0], 4.0);
        assert!(bins[1..].iter().all(|&b| b == 0.0));
    }

    #[test]
    fn ramp_window_hand_computed() {
        let f = extract_component_features(&[1.0, 2.0, 3.0, 4.0], 50.0).unwrap();
        assert_relative_eq!(f[0], 2.5); // mean
        assert_relative_eq!(f[2], 1.0); // mean_abs_change
        assert_relative_eq!(f[3], 1.0); // mad
        assert_relative_eq!(f[13], 2.0); // longest strike above mean
    }

    #[test]
    fn catalog_counts() {
        assert_eq!(component_feature_names().len(), 34);
        let one = FeatureCatalog::for_sensors(&[SensorKind::Accelerometer]);
        assert_eq!(one.len(), 136);
        let all = FeatureCatalog::for_sensors(&SensorKind::ALL);
        assert_eq!(all.len(), 544);
        // ids are unique
        let mut ids = all.ids();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 544);
    }

    #[test]
    fn full_frame_extraction_is_544_values() {
        let n = 500;
        let rate = 50.0;
        let mut sensors = BTreeMap::new();
        for kind in SensorKind::ALL {
            let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.13).sin()).collect();
            let y: Vec<f64> = (0..n).map(|i| (i as f64 * 0.07).cos()).collect();
            let z: Vec<f64> = (0..n).map(|i| (i as f64 * 0.11).sin() * 0.5).collect();
            let m = x
                .iter()
                .zip(&y)
                .zip(&z)
                .map(|((&a, &b), &c)| crate::signal::magnitude(a, b, c))
                .collect();
            sensors.insert(kind, ComponentSeries { x, y, z, m });
        }
        let frame = Frame {
            subject_id: "t".into(),
            session: Session::Training,
            start_ms: 0,
            duration_s: 10.0,
            sample_rate_hz: rate,
            sensors,
        };
        let values = extract_frame_features(&frame).unwrap();
        assert_eq!(values.len(), 544);
        assert!(values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn window_shorter_than_two_rejected() {
        assert!(extract_component_features(&[1.0], 50.0).is_err());
    }

    #[test]
    fn attack_features_constant_window() {
        let n = 500;
        let f = frame_from_acc(vec![-3.0; n], vec![1.0; n], vec![0.5; n], 50.0);
        let a = extract_attack_features(&f).unwrap();
        assert_eq!(a.get("rng_x").unwrap(), 0.0);
        assert_eq!(a.get("nop_x").unwrap(), 0.0);
        assert_relative_eq!(a.get("abs_x").unwrap(), n as f64 * 3.0);
    }

    #[test]
    fn attack_features_alternating_window() {
        let x = vec![-1.0, 1.0, -1.0, 1.0];
        let f = frame_from_acc(x.clone(), x.clone(), x, 50.0);
        let a = extract_attack_features(&f).unwrap();
        assert_relative_eq!(a.get("abs_x").unwrap(), 4.0);
        assert_relative_eq!(a.get("rng_x").unwrap(), 2.0);
        // mean_m of |(-1,1,-1)| magnitudes is sqrt(3)
        assert_relative_eq!(a.get("mean_m").unwrap(), 3.0f64.sqrt());
    }

    #[test]
    fn attack_features_pure_sine() {
        let rate = 50.0;
        let n = 500; // 10 s
        let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * i as f64 / rate).sin()).collect();
        let f = frame_from_acc(x.clone(), x.clone(), x, rate);
        let a = extract_attack_features(&f).unwrap();
        assert_eq!(a.get("nop_x").unwrap(), 10.0);
        assert_relative_eq!(a.get("sef_x").unwrap(), 1.0, epsilon = 1e-9);
        // everything in the 0.5-3 Hz band
        assert_relative_eq!(a.get("bap_x").unwrap(), 1.0, epsilon = 1e-9);
        // ten peaks spaced one second apart
        assert_relative_eq!(a.get("api_x").unwrap(), 1.0, epsilon = 0.05);
    }

    #[test]
    fn missing_accelerometer_rejected() {
        let mut f = frame_from_acc(vec![0.0; 4], vec![0.0; 4], vec![0.0; 4], 50.0);
        f.sensors.clear();
        assert!(extract_attack_features(&f).is_err());
    }

    #[test]
    fn plateau_peaks_count_once() {
        assert_eq!(peak_indices(&[0.0, 1.0, 1.0, 0.0]), vec![1]);
        assert_eq!(peak_indices(&[0.0, 1.0, 0.0, 2.0, 2.0, 2.0, 1.0]), vec![1, 3]);
        // plateau running to the end is not a peak
        assert_eq!(peak_indices(&[0.0, 1.0, 1.0]), Vec::<usize>::new());
    }

    proptest! {
        #[test]
        fn bin_counts_sum_to_window_length(
            w in proptest::collection::vec(-100.0f64..100.0, 2..200)
        ) {
            let f = extract_component_features(&w, 50.0).unwrap();
            let total: f64 = f[14..30].iter().sum();
            prop_assert_eq!(total as usize, w.len());
        }

        #[test]
        fn quantiles_are_ordered(
            w in proptest::collection::vec(-100.0f64..100.0, 2..200)
        ) {
            let f = extract_component_features(&w, 50.0).unwrap();
            prop_assert!(f[9] <= f[10] && f[10] <= f[11]);
            prop_assert!(f[30] <= f[31] && f[31] <= f[32]);
        }

        #[test]
        fn scaling_equivariance_spot_checks(
            w in proptest::collection::vec(-100.0f64..100.0, 8..120)
        ) {
            // doubling is exact in binary floating point
            let scaled: Vec<f64> = w.iter().map(|v| v * 2.0).collect();
            let a = extract_component_features(&w, 50.0).unwrap();
            let b = extract_component_features(&scaled, 50.0).unwrap();
            // linear: mean, stddev, mad
            prop_assert!((b[0] - 2.0 * a[0]).abs() <= 1e-9 * (1.0 + a[0].abs()));
            prop_assert!((b[1] - 2.0 * a[1]).abs() <= 1e-9 * (1.0 + a[1].abs()));
            prop_assert!((b[3] - 2.0 * a[3]).abs() <= 1e-9 * (1.0 + a[3].abs()));
            // invariant: npeaks, ncmean, strikes, bins
            prop_assert_eq!(a[8], b[8]);
            prop_assert_eq!(a[7], b[7]);
            prop_assert_eq!(a[12], b[12]);
            prop_assert_eq!(a[13], b[13]);
            for i in 14..30 {
                prop_assert_eq!(a[i], b[i]);
            }
        }

        #[test]
        fn extraction_is_deterministic(
            w in proptest::collection::vec(-10.0f64..10.0, 16..64)
        ) {
            let a = extract_component_features(&w, 50.0).unwrap();
            let b = extract_component_features(&w, 50.0).unwrap();
            prop_assert_eq!(a.to_vec(), b.to_vec());
        }
    }
}
