use std::io::{self, Write};
use std::path::{Path, PathBuf};

use super::features::{extract_features, FeatureVector};
use super::label::GestureLabel;
use super::segment::{interval_iou, preprocess, segment, GestureSegment, SegmentationConfig};
use crate::error::{Error, Result};
use crate::sim::corpora::read_manifest_rows;
use crate::trace::{load_trace, RssTrace};

pub const GESTURE_MANIFEST_HEADER: &str = "file,label,start_s,end_s";

/// One row of a gesture manifest: a trace file with its label and the
/// gesture's true bounds in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct GestureManifestEntry {
    pub file: String,
    pub label: GestureLabel,
    pub start_s: f64,
    pub end_s: f64,
}

pub fn write_gesture_manifest(w: &mut impl Write, rows: &[GestureManifestEntry]) -> io::Result<()> {
    writeln!(w, "{GESTURE_MANIFEST_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.file, r.label, r.start_s, r.end_s)?;
    }
    Ok(())
}

pub fn read_gesture_manifest(path: &Path) -> Result<Vec<GestureManifestEntry>> {
    read_manifest_rows(path, GESTURE_MANIFEST_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            let num = |s: &str| {
                s.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("bad number '{s}'"),
                })
            };
            Ok(GestureManifestEntry {
                file: f[0].clone(),
                label: f[1].parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("unknown gesture '{}'", f[1]),
                })?,
                start_s: num(&f[2])?,
                end_s: num(&f[3])?,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct LabelledTrace {
    pub path: PathBuf,
    pub entry: GestureManifestEntry,
    pub trace: RssTrace,
}

/// Loads every trace named in `dir/manifest.csv`.
pub fn load_gesture_corpus(dir: &Path) -> Result<Vec<LabelledTrace>> {
    read_gesture_manifest(&dir.join(crate::sim::corpora::MANIFEST))?
        .into_iter()
        .map(|entry| {
            let path = dir.join(&entry.file);
            let trace = load_trace(&path)?;
            Ok(LabelledTrace { path, entry, trace })
        })
        .collect()
}

/// Preprocessed samples of `[start, end)` seconds of a trace.
fn slice_preprocessed(trace: &RssTrace, start: f64, end: f64, cfg: &SegmentationConfig) -> Result<Vec<f64>> {
    let fs = trace.sample_rate();
    let pre = preprocess(trace.rss(), fs, cfg)?;
    let t0 = trace.timestamps()[0];
    let a = (((start - t0) * fs).round().max(0.0) as usize).min(pre.len());
    let b = (((end - t0) * fs).round().max(0.0) as usize).min(pre.len());
    if b < a + 2 {
        return Err(Error::invalid(format!("gesture bounds {start}..{end} fall outside the trace")));
    }
    Ok(pre[a..b].to_vec())
}

/// Samples used for training: the detected segment that best overlaps the
/// known bounds, or the bounds themselves when nothing overlaps.
pub fn training_samples(trace: &RssTrace, bounds: (f64, f64), cfg: &SegmentationConfig) -> Result<Vec<f64>> {
    let best = segment(trace, cfg)?
        .into_iter()
        .map(|s| (interval_iou((s.start, s.end), bounds), s))
        .filter(|(iou, _)| *iou > 0.0)
        .max_by(|a, b| a.0.total_cmp(&b.0));
    match best {
        Some((_, s)) => Ok(s.samples),
        None => slice_preprocessed(trace, bounds.0, bounds.1, cfg),
    }
}

/// The segment to classify in an unlabelled trace: the most energetic one,
/// or the whole preprocessed trace when none is detected.
pub fn classification_segment(trace: &RssTrace, cfg: &SegmentationConfig) -> Result<GestureSegment> {
    let segs = segment(trace, cfg)?;
    if let Some(best) = segs.into_iter().max_by(|a, b| a.energy().total_cmp(&b.energy())) {
        return Ok(best);
    }
    let t0 = trace.timestamps()[0];
    Ok(GestureSegment {
        start: t0,
        end: t0 + trace.len() as f64 / trace.sample_rate(),
        samples: preprocess(trace.rss(), trace.sample_rate(), cfg)?,
        source: trace.metadata().description.clone(),
    })
}

/// Feature vectors with labels for every trace of a corpus.
pub fn training_set(corpus: &[LabelledTrace], cfg: &SegmentationConfig) -> Result<Vec<(FeatureVector, GestureLabel)>> {
    corpus
        .iter()
        .map(|t| {
            let samples = training_samples(&t.trace, (t.entry.start_s, t.entry.end_s), cfg)?;
            Ok((extract_features(&samples, t.trace.sample_rate())?, t.entry.label))
        })
        .collect()
}

/// Feature vectors of the classification segment of every trace, paired with
/// the manifest label.
pub fn evaluation_set(corpus: &[LabelledTrace], cfg: &SegmentationConfig) -> Result<Vec<(FeatureVector, GestureLabel)>> {
    corpus
        .iter()
        .map(|t| {
            let seg = classification_segment(&t.trace, cfg)?;
            Ok((extract_features(&seg.samples, t.trace.sample_rate())?, t.entry.label))
        })
        .collect()
}
