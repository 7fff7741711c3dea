use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::dsp::{butterworth_lowpass, filter_forward, hampel_filter, moving_variance, remove_local_mean, HampelConfig};
use crate::error::{Error, Result};
use crate::trace::RssTrace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentationConfig {
    /// Moving-variance window, samples.
    pub short_window: usize,
    /// History over which the running maximum and minimum variance are kept,
    /// samples.
    pub long_window: usize,
    /// Active when variance exceeds this fraction of the running maximum.
    pub threshold: f64,
    /// Active only when variance also exceeds this multiple of the running
    /// minimum, which tracks the noise floor.
    pub floor_factor: f64,
    pub min_duration: f64,
    /// Active runs separated by less than this many seconds are joined.
    pub merge_gap: f64,
    pub lowpass_cutoff: f64,
    pub lowpass_order: usize,
    /// Window of the local mean removed before the variance, samples.
    pub local_mean_window: usize,
    pub hampel: HampelConfig,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self {
            short_window: 45,
            long_window: 30 * 449,
            threshold: 0.1,
            floor_factor: 30.0,
            min_duration: 0.2,
            merge_gap: 0.1,
            lowpass_cutoff: 90.0,
            lowpass_order: 4,
            local_mean_window: 449,
            hampel: HampelConfig {
                half_window: 10,
                n_sigmas: 3.0,
            },
        }
    }
}

impl SegmentationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2 <= self.short_window && self.short_window < self.long_window) {
            return Err(Error::invalid("segmentation needs 2 <= short_window < long_window"));
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::invalid("segmentation threshold must lie in (0, 1]"));
        }
        if !(self.min_duration > 0.0 && self.merge_gap >= 0.0 && self.floor_factor >= 1.0) {
            return Err(Error::invalid("min_duration must be positive, merge_gap non-negative, floor_factor at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GestureSegment {
    pub start: f64,
    pub end: f64,
    /// Preprocessed samples covering `[start, end)`.
    pub samples: Vec<f64>,
    pub source: String,
}

impl GestureSegment {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum()
    }
}

/// Hampel, low-pass and local mean removal.
pub fn preprocess(x: &[f64], fs: f64, cfg: &SegmentationConfig) -> Result<Vec<f64>> {
    let cleaned = hampel_filter(x, &cfg.hampel)?;
    // start the filter near its steady state
    let head = cleaned.len().min(cfg.short_window);
    let offset = cleaned[..head].iter().sum::<f64>() / head as f64;
    let centred: Vec<f64> = cleaned.iter().map(|v| v - offset).collect();
    let cutoff = cfg.lowpass_cutoff.min(0.45 * fs);
    let lowpass = butterworth_lowpass(cfg.lowpass_order, cutoff, fs)?;
    Ok(remove_local_mean(&filter_forward(&lowpass, &centred), cfg.local_mean_window))
}

/// Trailing extreme over the last `len` values, via a monotone deque.
fn trailing_extreme(v: &[f64], len: usize, keep: impl Fn(f64, f64) -> bool) -> Vec<f64> {
    let mut dq: VecDeque<usize> = VecDeque::new();
    let mut out = Vec::with_capacity(v.len());
    for i in 0..v.len() {
        while dq.back().is_some_and(|&j| !keep(v[j], v[i])) {
            dq.pop_back();
        }
        dq.push_back(i);
        while dq.front().is_some_and(|&j| j + len <= i) {
            dq.pop_front();
        }
        out.push(v[dq[0]]);
    }
    out
}

/// Per-sample activity of a preprocessed series.
pub fn activity(pre: &[f64], cfg: &SegmentationConfig) -> Result<Vec<bool>> {
    cfg.validate()?;
    let w = cfg.short_window;
    let var = moving_variance(pre, w)?;
    let max = trailing_extreme(&var, cfg.long_window, |kept, new| kept > new);
    let min = trailing_extreme(&var, cfg.long_window, |kept, new| kept < new);
    let mut active = vec![false; pre.len()];
    for j in 0..var.len() {
        active[j + w / 2] = var[j] > cfg.threshold * max[j] && var[j] > cfg.floor_factor * min[j];
    }
    Ok(active)
}

/// Half-open sample ranges of the merged active runs lasting at least
/// `min_duration`.
pub fn active_runs(active: &[bool], fs: f64, cfg: &SegmentationConfig) -> Vec<(usize, usize)> {
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < active.len() {
        if active[i] {
            let start = i;
            while i < active.len() && active[i] {
                i += 1;
            }
            runs.push((start, i));
        } else {
            i += 1;
        }
    }
    let max_gap = cfg.merge_gap * fs;
    let mut merged: Vec<(usize, usize)> = Vec::new();
    for r in runs {
        match merged.last_mut() {
            Some(last) if ((r.0 - last.1) as f64) < max_gap => last.1 = r.1,
            _ => merged.push(r),
        }
    }
    let min_len = cfg.min_duration * fs;
    merged.retain(|&(s, e)| (e - s) as f64 >= min_len - 1e-9);
    merged
}

/// Segments of a trace holding gesture activity.
pub fn segment(trace: &RssTrace, cfg: &SegmentationConfig) -> Result<Vec<GestureSegment>> {
    cfg.validate()?;
    let fs = trace.sample_rate();
    let needed = cfg.short_window.max(cfg.hampel.window());
    if trace.len() < needed {
        return Err(Error::TooShort {
            needed,
            got: trace.len(),
        });
    }
    let pre = preprocess(trace.rss(), fs, cfg)?;
    let active = activity(&pre, cfg)?;
    let t0 = trace.timestamps()[0];
    Ok(active_runs(&active, fs, cfg)
        .into_iter()
        .map(|(s, e)| GestureSegment {
            start: t0 + s as f64 / fs,
            end: t0 + e as f64 / fs,
            samples: pre[s..e].to_vec(),
            source: trace.metadata().description.clone(),
        })
        .collect())
}

/// Intersection over union of two intervals.
pub fn interval_iou(a: (f64, f64), b: (f64, f64)) -> f64 {
    let inter = (a.1.min(b.1) - a.0.max(b.0)).max(0.0);
    let union = (a.1 - a.0) + (b.1 - b.0) - inter;
    if union > 0.0 {
        inter / union
    } else {
        0.0
    }
}
