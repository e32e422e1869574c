//! File formats: the recording CSV schema and the NDJSON feature store.
//!
//! Recording CSV layout:
//!
//! ```text
//! # subject = S01
//! # session = training
//! # sample_rate_hz = 50
//! t_ms,sensor,x,y,z
//! 0,acc,0.123456,9.810000,0.200000
//! ...
//! ```
//!
//! Comment lines carry recording metadata; rows are sorted by `t_ms`
//! within each sensor. Malformed rows are rejected with their 1-based
//! line number.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::signal::{Recording, SensorKind, SensorTrace, Session};

/// Samples are quantized to 10^-6 when written, so an export/ingest round
/// trip reproduces the recording exactly.
const SAMPLE_SCALE: f64 = 1e6;

/// Rounds a sample to the CSV resolution. Dividing by the exactly
/// representable scale makes the result identical to parsing the printed
/// six-decimal value.
pub fn quantize_sample(v: f64) -> f64 {
    (v * SAMPLE_SCALE).round() / SAMPLE_SCALE
}

fn csv_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Csv { path: path.display().to_string(), line, msg: msg.into() }
}

/// Reads one recording from its CSV file.
pub fn read_recording_csv(path: &Path) -> Result<Recording> {
    let file = File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })?;
    let mut text = String::new();
    BufReader::new(file).read_to_string(&mut text)?;
    read_recording_str(&text, path)
}

use std::io::Read;

/// Parses recording CSV text; `path` is used only for error messages.
pub fn read_recording_str(text: &str, path: &Path) -> Result<Recording> {
    // metadata prelude
    let mut meta: BTreeMap<String, String> = BTreeMap::new();
    for line in text.lines() {
        let Some(rest) = line.strip_prefix('#') else { break };
        if let Some((k, v)) = rest.split_once('=') {
            meta.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    let subject = meta
        .get("subject")
        .ok_or_else(|| csv_err(path, 1, "missing `# subject = ...` metadata line"))?
        .clone();
    let session_tok = meta
        .get("session")
        .ok_or_else(|| csv_err(path, 1, "missing `# session = ...` metadata line"))?;
    let session = Session::from_token(session_tok)
        .ok_or_else(|| csv_err(path, 1, format!("unknown session `{session_tok}`")))?;
    let rate: f64 = meta
        .get("sample_rate_hz")
        .ok_or_else(|| csv_err(path, 1, "missing `# sample_rate_hz = ...` metadata line"))?
        .parse()
        .map_err(|_| csv_err(path, 1, "sample_rate_hz is not a number"))?;
    if rate <= 0.0 {
        return Err(csv_err(path, 1, "sample_rate_hz must be positive"));
    }

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    {
        let headers = reader
            .headers()
            .map_err(|e| csv_err(path, 1, format!("bad header: {e}")))?;
        let expect = ["t_ms", "sensor", "x", "y", "z"];
        if headers.iter().collect::<Vec<_>>() != expect {
            return Err(csv_err(
                path,
                meta.len() + 1,
                format!("header must be `t_ms,sensor,x,y,z`, got `{}`", headers.iter().collect::<Vec<_>>().join(",")),
            ));
        }
    }

    let mut per_sensor: BTreeMap<SensorKind, Vec<(u64, f64, f64, f64)>> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            csv_err(path, line, format!("malformed row: {e}"))
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != 5 {
            return Err(csv_err(path, line, format!("expected 5 fields, got {}", record.len())));
        }
        let t_ms: u64 = record[0]
            .parse()
            .map_err(|_| csv_err(path, line, format!("bad t_ms `{}`", &record[0])))?;
        let kind = SensorKind::from_token(&record[1])
            .ok_or_else(|| csv_err(path, line, format!("unknown sensor token `{}`", &record[1])))?;
        let mut vals = [0.0f64; 3];
        for (i, field) in record.iter().skip(2).enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| csv_err(path, line, format!("bad value `{field}`")))?;
            if !v.is_finite() {
                return Err(csv_err(path, line, format!("non-finite value `{field}`")));
            }
            vals[i] = v;
        }
        let series = per_sensor.entry(kind).or_default();
        if let Some(&(last, ..)) = series.last() {
            if t_ms <= last {
                return Err(csv_err(
                    path,
                    line,
                    format!("timestamps for {} not strictly increasing ({t_ms} after {last})", kind.token()),
                ));
            }
        }
        series.push((t_ms, vals[0], vals[1], vals[2]));
    }

    if per_sensor.is_empty() {
        return Err(csv_err(path, 1, "recording has no sample rows"));
    }

    let mut recording = Recording::new(subject, session);
    for (kind, samples) in per_sensor {
        recording.traces.insert(kind, SensorTrace::new(kind, rate, samples)?);
    }
    Ok(recording)
}

/// Writes one recording to CSV. `extra_header` lines (without the leading
/// `#`) are emitted before the metadata block.
pub fn write_recording_csv(path: &Path, recording: &Recording, extra_header: Option<&str>) -> Result<()> {
    let rate = recording
        .traces
        .values()
        .next()
        .ok_or_else(|| Error::invalid("cannot write a recording with no traces"))?
        .sample_rate_hz;
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    if let Some(extra) = extra_header {
        for line in extra.lines() {
            writeln!(w, "# {line}")?;
        }
    }
    writeln!(w, "# subject = {}", recording.subject_id)?;
    writeln!(w, "# session = {}", recording.session.token())?;
    writeln!(w, "# sample_rate_hz = {rate}")?;
    writeln!(w, "t_ms,sensor,x,y,z")?;
    for (kind, trace) in &recording.traces {
        for &(t, x, y, z) in &trace.samples {
            writeln!(w, "{t},{},{x:.6},{y:.6},{z:.6}", kind.token())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes feature vectors as NDJSON, one object per frame.
pub fn write_feature_store(path: &Path, vectors: &[FeatureVector], extra_header: Option<&str>) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    if let Some(extra) = extra_header {
        for line in extra.lines() {
            writeln!(w, "# {line}")?;
        }
    }
    for v in vectors {
        let line = serde_json::to_string(v)?;
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an NDJSON feature store, skipping comment lines.
pub fn read_feature_store(path: &Path) -> Result<Vec<FeatureVector>> {
    let file = File::open(path)?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let v: FeatureVector = serde_json::from_str(&line).map_err(|e| Error::Csv {
            path: path.display().to_string(),
            line: i + 1,
            msg: format!("bad feature-store line: {e}"),
        })?;
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::Label;
    use std::path::PathBuf;

    fn sample_recording() -> Recording {
        let mut rec = Recording::new("S01", Session::Training);
        let samples: Vec<(u64, f64, f64, f64)> = (0..10)
            .map(|i| {
                (
                    i * 20,
                    quantize_sample(0.1 * i as f64),
                    quantize_sample(9.81 - 0.01 * i as f64),
                    quantize_sample(-0.2 + 0.002 * i as f64),
                )
            })
            .collect();
        rec.traces.insert(
            SensorKind::Accelerometer,
            SensorTrace::new(SensorKind::Accelerometer, 50.0, samples.clone()).unwrap(),
        );
        rec.traces.insert(
            SensorKind::Gyroscope,
            SensorTrace::new(SensorKind::Gyroscope, 50.0, samples).unwrap(),
        );
        rec
    }

    #[test]
    fn recording_round_trip_is_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rec.csv");
        let rec = sample_recording();
        write_recording_csv(&path, &rec, Some("config = test")).unwrap();
        let back = read_recording_csv(&path).unwrap();
        assert_eq!(rec, back);
    }

    #[test]
    fn two_sensor_file_yields_two_traces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rec.csv");
        write_recording_csv(&path, &sample_recording(), None).unwrap();
        let rec = read_recording_csv(&path).unwrap();
        assert_eq!(rec.traces.len(), 2);
    }

    #[test]
    fn out_of_order_timestamps_name_the_line() {
        let text = "# subject = S01\n# session = training\n# sample_rate_hz = 50\n\
                    t_ms,sensor,x,y,z\n0,acc,0,0,0\n20,acc,0,0,0\n20,acc,0,0,0\n";
        let err = read_recording_str(text, &PathBuf::from("bad.csv")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bad.csv:7"), "{msg}");
        assert!(msg.contains("strictly increasing"), "{msg}");
    }

    #[test]
    fn unknown_sensor_token_rejected() {
        let text = "# subject = S01\n# session = training\n# sample_rate_hz = 50\n\
                    t_ms,sensor,x,y,z\n0,foo,0,0,0\n";
        let err = read_recording_str(text, &PathBuf::from("bad.csv")).unwrap_err();
        assert!(err.to_string().contains("unknown sensor token"), "{err}");
        assert!(err.to_string().contains(":5"), "{err}");
    }

    #[test]
    fn malformed_value_names_the_line() {
        let text = "# subject = S01\n# session = training\n# sample_rate_hz = 50\n\
                    t_ms,sensor,x,y,z\n0,acc,0,0,0\n20,acc,zebra,0,0\n";
        let err = read_recording_str(text, &PathBuf::from("bad.csv")).unwrap_err();
        assert!(err.to_string().contains("bad.csv:6"), "{err}");
    }

    #[test]
    fn feature_store_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("frames.ndjson");
        let mut values = BTreeMap::new();
        values.insert("acc_amean_x".to_string(), 1.25);
        values.insert("acc_npeaks_m".to_string(), 7.0);
        let vecs = vec![FeatureVector {
            subject_id: "S01".into(),
            session: Session::Testing,
            start_ms: 5000,
            label: Some(Label::Genuine),
            values,
        }];
        write_feature_store(&path, &vecs, Some("config = test")).unwrap();
        let back = read_feature_store(&path).unwrap();
        assert_eq!(vecs, back);
    }
}
