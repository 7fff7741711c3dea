//! Walking-speed estimation from link crossings.
//!
//! The average frequency of the RSS spectrogram falls as a person nears the
//! link line and bottoms out at the crossing. Its smoothed minimum scaled by
//! a per-link constant alpha estimates the walking speed.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dsp::{moving_average, spectrogram, Spectrogram};
use crate::error::{Error, Result};
use crate::trace::RssTrace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpeedConfig {
    /// Spectrogram window, seconds.
    pub window: f64,
    /// Spectrogram hop, seconds.
    pub hop: f64,
    pub nfft: usize,
    /// Moving-average length over the average-frequency series, columns.
    pub smoothing_window: usize,
    /// Hz; the smoothed average frequency falling below it opens a search.
    pub crossing_threshold: f64,
    /// Metres; speed per hertz of minimum average frequency.
    pub alpha: f64,
    /// Seconds searched for the minimum after the threshold is crossed.
    pub search_interval: f64,
}

impl Default for SpeedConfig {
    fn default() -> Self {
        Self {
            window: 2.0,
            hop: 0.25,
            nfft: 4096,
            smoothing_window: 5,
            // half the white-noise average frequency at 449 Hz
            crossing_threshold: 56.0,
            alpha: 1.0,
            search_interval: 15.0,
        }
    }
}

impl SpeedConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.window > 0.0 && self.hop > 0.0) {
            return Err(Error::invalid("speed window and hop must be positive"));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::invalid("alpha must be positive"));
        }
        if !(self.crossing_threshold > 0.0) {
            return Err(Error::invalid("crossing threshold must be positive"));
        }
        if !(self.search_interval > 0.0) || self.smoothing_window == 0 {
            return Err(Error::invalid("search interval and smoothing window must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingEvent {
    pub t_cross: f64,
    pub f_min_av: f64,
    pub v_hat: f64,
}

/// Time interval searched for a crossing minimum, `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingWindow {
    pub start: f64,
    pub end: f64,
}

/// Power-weighted mean frequency of every spectrogram column.
pub fn average_frequency(spec: &Spectrogram) -> Vec<f64> {
    spec.power
        .iter()
        .map(|col| {
            let total: f64 = col.iter().sum();
            if total < 1e-12 {
                0.0
            } else {
                spec.frequencies.iter().zip(col).map(|(f, p)| f * p).sum::<f64>() / total
            }
        })
        .collect()
}

/// Opens a search window at the first time the smoothed series drops below
/// the threshold.
pub fn detect_crossing(times: &[f64], smoothed: &[f64], cfg: &SpeedConfig) -> Option<CrossingWindow> {
    let i = smoothed.iter().position(|&f| f < cfg.crossing_threshold)?;
    Some(CrossingWindow {
        start: times[i],
        end: times[i] + cfg.search_interval,
    })
}

/// Column times (absolute) and smoothed average frequency of a trace.
pub fn smoothed_average_frequency(trace: &RssTrace, cfg: &SpeedConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    cfg.validate()?;
    let spec = spectrogram(trace.rss(), trace.sample_rate(), cfg.window, cfg.hop, cfg.nfft)?;
    let t0 = trace.timestamps()[0];
    let times = spec.times.iter().map(|t| t + t0).collect();
    Ok((times, moving_average(&average_frequency(&spec), cfg.smoothing_window)))
}

fn event_in(times: &[f64], smoothed: &[f64], cfg: &SpeedConfig) -> Option<(CrossingEvent, CrossingWindow)> {
    let w = detect_crossing(times, smoothed, cfg)?;
    let (k, f) = times
        .iter()
        .zip(smoothed)
        .enumerate()
        .filter(|(_, (t, _))| **t >= w.start && **t < w.end)
        .map(|(k, (_, f))| (k, *f))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))?;
    let event = CrossingEvent {
        t_cross: times[k],
        f_min_av: f,
        v_hat: cfg.alpha * f,
    };
    Some((event, w))
}

/// First crossing of a trace, or `None` when the average frequency never
/// drops below the threshold.
pub fn estimate_speed(trace: &RssTrace, cfg: &SpeedConfig) -> Result<Option<CrossingEvent>> {
    let (times, smoothed) = smoothed_average_frequency(trace, cfg)?;
    Ok(event_in(&times, &smoothed, cfg).map(|(e, _)| e))
}

/// Every crossing of a trace, each search resuming after the previous
/// window once the series has risen back above the threshold.
pub fn estimate_speeds(trace: &RssTrace, cfg: &SpeedConfig) -> Result<Vec<CrossingEvent>> {
    let (times, smoothed) = smoothed_average_frequency(trace, cfg)?;
    let mut events = Vec::new();
    let mut from = 0;
    while from < times.len() {
        let Some((e, w)) = event_in(&times[from..], &smoothed[from..], cfg) else {
            break;
        };
        events.push(e);
        let after = from + times[from..].partition_point(|&t| t < w.end);
        let Some(rise) = smoothed[after..].iter().position(|&f| f >= cfg.crossing_threshold) else {
            break;
        };
        from = after + rise;
    }
    Ok(events)
}

/// Least-squares slope through the origin of speed against minimum average
/// frequency, with the residual RMSE.
pub fn calibrate_alpha(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: points.len(),
        });
    }
    let sff: f64 = points.iter().map(|(f, _)| f * f).sum();
    if sff == 0.0 {
        return Err(Error::invalid("all minimum average frequencies are zero"));
    }
    let alpha = points.iter().map(|(f, v)| f * v).sum::<f64>() / sff;
    let rmse = (points.iter().map(|(f, v)| (alpha * f - v).powi(2)).sum::<f64>() / points.len() as f64).sqrt();
    Ok((alpha, rmse))
}

/// Half the median raw average frequency of a scene without crossings.
pub fn calibrate_threshold(quiet: &RssTrace, cfg: &SpeedConfig) -> Result<f64> {
    let spec = spectrogram(quiet.rss(), quiet.sample_rate(), cfg.window, cfg.hop, cfg.nfft)?;
    let mut f = average_frequency(&spec);
    f.sort_by(f64::total_cmp);
    let n = f.len();
    let median = if n % 2 == 1 { f[n / 2] } else { 0.5 * (f[n / 2 - 1] + f[n / 2]) };
    if median <= 0.0 {
        return Err(Error::invalid("quiet trace has no spectral power"));
    }
    Ok(0.5 * median)
}

pub fn write_alpha(path: &Path, alpha: f64) -> Result<()> {
    fs::write(path, format!("alpha={alpha}\n")).map_err(|e| Error::io(path, e))
}

pub fn read_alpha(path: &Path) -> Result<f64> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let line = text.lines().next().unwrap_or("").trim();
    let alpha = line
        .strip_prefix("alpha=")
        .and_then(|v| v.trim().parse::<f64>().ok())
        .ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("expected alpha=<float>, found '{line}'"),
        })?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("alpha must be positive, found {alpha}")));
    }
    Ok(alpha)
}

pub fn write_events_csv<W: Write>(mut w: W, events: &[CrossingEvent]) -> std::io::Result<()> {
    writeln!(w, "t_cross_s,f_min_av_hz,v_hat_mps")?;
    for e in events {
        writeln!(w, "{},{},{}", e.t_cross, e.f_min_av, e.v_hat)?;
    }
    Ok(())
}
