//! RSS trace data model and the CSV trace format.
//!
//! A trace file looks like
//!
//! ```text
//! # sample_rate_hz=449,center_freq_hz=434000000,gt_label=kick
//! t_s,rss_db,gt_hr_bpm
//! 0,-50.01,60
//! 0.0022271714922048997,-49.98,60
//! ```
//!
//! Header values are percent-encoded for `%`, `,`, `=` and line breaks.
//! Numbers are written with Rust's shortest round-trip formatting, so
//! `load_trace(save_trace(t)) == t` holds value-exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::ops::Range;
use std::path::Path;

use crate::error::{Error, Result};
use crate::{DEFAULT_CENTER_FREQUENCY_HZ, NOMINAL_SAMPLE_RATE_HZ};

const GT_PREFIX: &str = "gt_";

/// Labels attached to simulated (or annotated) traces.
///
/// `series` holds per-sample values (one `gt_<name>` column each) and
/// `labels` holds scalar values written as `gt_<name>=<value>` header keys.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruth {
    pub series: BTreeMap<String, Vec<f64>>,
    pub labels: BTreeMap<String, String>,
}

impl GroundTruth {
    pub fn is_empty(&self) -> bool {
        self.series.is_empty() && self.labels.is_empty()
    }

    pub fn label(&self, key: &str) -> Option<&str> {
        self.labels.get(key).map(String::as_str)
    }

    /// Scalar label parsed as a float.
    pub fn value(&self, key: &str) -> Option<f64> {
        self.label(key).and_then(|v| v.parse().ok())
    }

    pub fn set_label(&mut self, key: &str, value: impl ToString) {
        self.labels.insert(key.to_string(), value.to_string());
    }
}

/// Well-known ground-truth keys used by the simulator and the pipelines.
pub mod gt {
    /// Per-sample instantaneous heart rate in bpm.
    pub const HEART_RATE_BPM: &str = "hr_bpm";
    /// Per-sample walking speed in m/s (crossing traces).
    pub const SPEED_MPS: &str = "speed_mps";
    /// Time at which the walker crosses the link line, seconds.
    pub const CROSSING_TIME_S: &str = "t_cross_s";
    /// Gesture label name.
    pub const GESTURE_LABEL: &str = "label";
    pub const GESTURE_START_S: &str = "start_s";
    pub const GESTURE_END_S: &str = "end_s";
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceMetadata {
    pub sample_rate: f64,
    pub center_frequency: f64,
    pub description: String,
    /// Extra `key=value` header entries that are not ground truth.
    pub attributes: BTreeMap<String, String>,
    pub ground_truth: GroundTruth,
}

impl Default for TraceMetadata {
    fn default() -> Self {
        Self::new(NOMINAL_SAMPLE_RATE_HZ)
    }
}

impl TraceMetadata {
    pub fn new(sample_rate: f64) -> Self {
        Self {
            sample_rate,
            center_frequency: DEFAULT_CENTER_FREQUENCY_HZ,
            description: String::new(),
            attributes: BTreeMap::new(),
            ground_truth: GroundTruth::default(),
        }
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = description.into();
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.sample_rate.is_finite() && self.sample_rate > 0.0) {
            return Err(Error::InvalidTrace(format!(
                "sample rate must be positive, got {}",
                self.sample_rate
            )));
        }
        if !(self.center_frequency.is_finite() && self.center_frequency > 0.0) {
            return Err(Error::InvalidTrace(format!(
                "center frequency must be positive, got {}",
                self.center_frequency
            )));
        }
        Ok(())
    }
}

/// Timestamped RSS series in dB. Immutable once constructed.
#[derive(Debug, Clone, PartialEq)]
pub struct RssTrace {
    metadata: TraceMetadata,
    timestamps: Vec<f64>,
    rss: Vec<f64>,
}

impl RssTrace {
    pub fn new(metadata: TraceMetadata, timestamps: Vec<f64>, rss: Vec<f64>) -> Result<Self> {
        metadata.validate()?;
        if rss.is_empty() {
            return Err(Error::InvalidTrace("trace has no samples".into()));
        }
        if timestamps.len() != rss.len() {
            return Err(Error::InvalidTrace(format!(
                "{} timestamps but {} rss values",
                timestamps.len(),
                rss.len()
            )));
        }
        if let Some(i) = rss.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidTrace(format!("non-finite rss at sample {i}")));
        }
        if let Some(i) = timestamps.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidTrace(format!(
                "non-finite timestamp at sample {i}"
            )));
        }
        if let Some(i) = timestamps.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidTrace(format!(
                "timestamps not strictly increasing at sample {}",
                i + 1
            )));
        }
        for (name, series) in &metadata.ground_truth.series {
            if series.len() != rss.len() {
                return Err(Error::InvalidTrace(format!(
                    "ground-truth series {name} has {} values, trace has {}",
                    series.len(),
                    rss.len()
                )));
            }
        }
        Ok(Self {
            metadata,
            timestamps,
            rss,
        })
    }

    /// Builds a trace with nominal timestamps `i / sample_rate`.
    pub fn from_samples(metadata: TraceMetadata, rss: Vec<f64>) -> Result<Self> {
        let fs = metadata.sample_rate;
        let timestamps = (0..rss.len()).map(|i| i as f64 / fs).collect();
        Self::new(metadata, timestamps, rss)
    }

    pub fn metadata(&self) -> &TraceMetadata {
        &self.metadata
    }

    pub fn sample_rate(&self) -> f64 {
        self.metadata.sample_rate
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn rss(&self) -> &[f64] {
        &self.rss
    }

    pub fn ground_truth(&self) -> &GroundTruth {
        &self.metadata.ground_truth
    }

    pub fn len(&self) -> usize {
        self.rss.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rss.is_empty()
    }

    /// Nominal duration `len / sample_rate` in seconds.
    pub fn duration(&self) -> f64 {
        self.rss.len() as f64 / self.metadata.sample_rate
    }

    /// Sliding windows of `window` seconds advanced by `hop` seconds.
    ///
    /// Boundaries come from the nominal sample rate, not the timestamps.
    pub fn windows(&self, window: f64, hop: f64) -> Result<impl Iterator<Item = TraceWindow<'_>>> {
        let ranges = window_ranges(self.len(), self.sample_rate(), window, hop)?;
        Ok(ranges.map(move |r| TraceWindow {
            start: r.start,
            timestamps: &self.timestamps[r.clone()],
            rss: &self.rss[r],
        }))
    }

    /// Copy of `range` as a new trace, ground-truth series sliced alongside.
    pub fn slice(&self, range: Range<usize>) -> Result<RssTrace> {
        let mut metadata = self.metadata.clone();
        for series in metadata.ground_truth.series.values_mut() {
            *series = series[range.clone()].to_vec();
        }
        RssTrace::new(
            metadata,
            self.timestamps[range.clone()].to_vec(),
            self.rss[range].to_vec(),
        )
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TraceWindow<'a> {
    /// Index of the first sample in the parent trace.
    pub start: usize,
    pub timestamps: &'a [f64],
    pub rss: &'a [f64],
}

/// Sample ranges of sliding windows over a series of `len` samples.
///
/// Windows hold exactly `round(window * fs)` samples; a trailing partial
/// window is dropped, and a window longer than the series yields nothing.
pub fn window_ranges(
    len: usize,
    fs: f64,
    window: f64,
    hop: f64,
) -> Result<impl Iterator<Item = Range<usize>>> {
    if !(window > 0.0 && hop > 0.0 && fs > 0.0) {
        return Err(Error::invalid(format!(
            "window ({window}) and hop ({hop}) must be positive"
        )));
    }
    let n = (window * fs).round() as usize;
    let step = ((hop * fs).round() as usize).max(1);
    if n == 0 {
        return Err(Error::invalid(format!(
            "window of {window} s is shorter than one sample"
        )));
    }
    let count = if n > len { 0 } else { (len - n) / step + 1 };
    Ok((0..count).map(move |k| k * step..k * step + n))
}

// ── CSV format ─────────────────────────────────────────────────────────────

fn encode_value(v: &str) -> String {
    let mut out = String::with_capacity(v.len());
    for c in v.chars() {
        match c {
            '%' => out.push_str("%25"),
            ',' => out.push_str("%2C"),
            '=' => out.push_str("%3D"),
            '\n' => out.push_str("%0A"),
            '\r' => out.push_str("%0D"),
            c => out.push(c),
        }
    }
    out
}

fn decode_value(v: &str, line: usize) -> Result<String> {
    let mut out = String::with_capacity(v.len());
    let mut chars = v.chars();
    while let Some(c) = chars.next() {
        if c != '%' {
            out.push(c);
            continue;
        }
        let hex: String = chars.by_ref().take(2).collect();
        let byte = u8::from_str_radix(&hex, 16).map_err(|_| Error::Parse {
            line,
            message: format!("bad percent escape %{hex}"),
        })?;
        out.push(byte as char);
    }
    Ok(out)
}

/// Canonical CSV serialization of a trace.
pub fn to_csv_string(trace: &RssTrace) -> String {
    let md = &trace.metadata;
    let mut out = String::new();
    let _ = write!(
        out,
        "# sample_rate_hz={},center_freq_hz={}",
        md.sample_rate, md.center_frequency
    );
    if !md.description.is_empty() {
        let _ = write!(out, ",description={}", encode_value(&md.description));
    }
    for (k, v) in &md.attributes {
        let _ = write!(out, ",{}={}", encode_value(k), encode_value(v));
    }
    for (k, v) in &md.ground_truth.labels {
        let _ = write!(out, ",{GT_PREFIX}{}={}", encode_value(k), encode_value(v));
    }
    out.push('\n');

    out.push_str("t_s,rss_db");
    for name in md.ground_truth.series.keys() {
        let _ = write!(out, ",{GT_PREFIX}{name}");
    }
    out.push('\n');

    let series: Vec<&Vec<f64>> = md.ground_truth.series.values().collect();
    for i in 0..trace.len() {
        let _ = write!(out, "{},{}", trace.timestamps[i], trace.rss[i]);
        for s in &series {
            let _ = write!(out, ",{}", s[i]);
        }
        out.push('\n');
    }
    out
}

/// Parses the CSV trace format.
pub fn from_csv_str(text: &str) -> Result<RssTrace> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (ln, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty file".into(),
    })?;
    let header = header.strip_prefix('#').ok_or(Error::Parse {
        line: ln,
        message: "metadata line must start with '#'".into(),
    })?;

    let mut sample_rate = None;
    let mut center_frequency = None;
    let mut description = String::new();
    let mut attributes = BTreeMap::new();
    let mut ground_truth = GroundTruth::default();
    for entry in header.trim().split(',').filter(|e| !e.is_empty()) {
        let (key, value) = entry.split_once('=').ok_or_else(|| Error::Parse {
            line: ln,
            message: format!("metadata entry {entry:?} is not key=value"),
        })?;
        let key = decode_value(key.trim(), ln)?;
        let value = decode_value(value.trim(), ln)?;
        let parse_f = |v: &str| {
            v.parse::<f64>().map_err(|_| Error::Parse {
                line: ln,
                message: format!("{key} is not a number: {v:?}"),
            })
        };
        match key.as_str() {
            "sample_rate_hz" => sample_rate = Some(parse_f(&value)?),
            "center_freq_hz" => center_frequency = Some(parse_f(&value)?),
            "description" => description = value,
            k => {
                if let Some(name) = k.strip_prefix(GT_PREFIX) {
                    ground_truth.labels.insert(name.to_string(), value);
                } else {
                    attributes.insert(key, value);
                }
            }
        }
    }
    let sample_rate = sample_rate.ok_or(Error::Parse {
        line: ln,
        message: "missing sample_rate_hz".into(),
    })?;
    let center_frequency = center_frequency.ok_or(Error::Parse {
        line: ln,
        message: "missing center_freq_hz".into(),
    })?;

    let (ln, columns) = lines.next().ok_or(Error::Parse {
        line: 2,
        message: "missing column header".into(),
    })?;
    let columns: Vec<&str> = columns.split(',').map(str::trim).collect();
    if columns.len() < 2 || columns[0] != "t_s" || columns[1] != "rss_db" {
        return Err(Error::Parse {
            line: ln,
            message: "column header must start with t_s,rss_db".into(),
        });
    }
    let mut gt_names = Vec::new();
    for c in &columns[2..] {
        let name = c.strip_prefix(GT_PREFIX).ok_or_else(|| Error::Parse {
            line: ln,
            message: format!("unexpected column {c:?}; extra columns must start with gt_"),
        })?;
        gt_names.push(name.to_string());
    }

    let mut timestamps = Vec::new();
    let mut rss = Vec::new();
    let mut gt_values: Vec<Vec<f64>> = vec![Vec::new(); gt_names.len()];
    for (ln, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let mut next = |what: &str| -> Result<f64> {
            let f = fields.next().ok_or_else(|| Error::Parse {
                line: ln,
                message: format!("missing {what}"),
            })?;
            f.trim().parse::<f64>().map_err(|_| Error::Parse {
                line: ln,
                message: format!("{what} is not a number: {f:?}"),
            })
        };
        timestamps.push(next("t_s")?);
        rss.push(next("rss_db")?);
        for (i, name) in gt_names.iter().enumerate() {
            gt_values[i].push(next(name)?);
        }
        if fields.next().is_some() {
            return Err(Error::Parse {
                line: ln,
                message: "too many fields".into(),
            });
        }
    }
    ground_truth.series = gt_names.into_iter().zip(gt_values).collect();

    let metadata = TraceMetadata {
        sample_rate,
        center_frequency,
        description,
        attributes,
        ground_truth,
    };
    RssTrace::new(metadata, timestamps, rss)
}

pub fn load_trace(path: impl AsRef<Path>) -> Result<RssTrace> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_csv_str(&text)
}

pub fn save_trace(trace: &RssTrace, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_csv_string(trace)).map_err(|e| Error::io(path, e))
}
